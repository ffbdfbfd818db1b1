"""Delimited table output for spectrum results.

CSV layout: '#'-prefixed 'key = value' metadata lines, a header row
qx,qy,omega,s_abs,s_norm[,stderr], then one row per (q, omega) pair with
'.' decimal points, 17-significant-digit floats and '\n' newlines.  The
metadata is complete enough to regenerate the table bit-exactly.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .spectra import SpectrumResult

_FLOAT_FMT = "%.17g"


def _fmt_meta_value(value) -> str:
    if isinstance(value, float):
        return repr(value)  # shortest exact round-trip
    if isinstance(value, bool):
        return str(value).lower()
    return str(value)


def result_rows(result: SpectrumResult) -> np.ndarray:
    """Row-major (q outer, omega inner) table columns, shape (P*W, 5 or 6)."""
    n_q, n_w = result.values.shape
    qx = np.repeat(result.q_grid[:, 0], n_w)
    qy = np.repeat(result.q_grid[:, 1], n_w)
    om = np.tile(result.omega_grid, n_q)
    cols = [qx, qy, om, result.values.ravel(), result.shot_normalized.ravel()]
    if result.stderr is not None:
        cols.append(result.stderr.ravel())
    return np.stack(cols, axis=1)


def write_csv(path, result: SpectrumResult, meta: dict) -> None:
    rows = result_rows(result)
    with_err = result.stderr is not None
    header = "qx,qy,omega,s_abs,s_norm" + (",stderr" if with_err else "")
    lines = [f"# {key} = {_fmt_meta_value(value)}" for key, value in meta.items()]
    lines.append(header)
    for row in rows:
        lines.append(",".join(_FLOAT_FMT % v for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def write_json(path, result: SpectrumResult, meta: dict) -> None:
    rows = result_rows(result)
    with_err = result.stderr is not None
    keys = ["qx", "qy", "omega", "s_abs", "s_norm"] + (["stderr"] if with_err else [])
    payload = {
        "meta": {key: value for key, value in meta.items()},
        "rows": [dict(zip(keys, map(float, row))) for row in rows],
    }
    Path(path).write_text(
        json.dumps(payload, indent=1, sort_keys=False) + "\n", encoding="ascii"
    )


def read_meta(path) -> dict:
    """Metadata block of a CSV table, as written by write_csv."""
    meta = {}
    for line in Path(path).read_text(encoding="ascii").splitlines():
        if not line.startswith("#"):
            break
        key, _, value = line[1:].partition("=")
        meta[key.strip()] = value.strip()
    return meta
