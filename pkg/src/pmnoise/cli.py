"""Command-line interface: spectrum sweeps, figure data, Monte-Carlo runs and
the validation gate.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 validation
failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    ConfigError,
    RunSetup,
    build_setup,
    flatten_config,
    parse_config_text,
    unflatten_config,
)
from .figures import FIGURE_IDS, build_figure
from .oracle import SimulationConfig, run_oracle
from .spectra import DetectionScheme, analytic_spectrum
from .tables import write_csv, write_json

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_VALIDATION = 4

_DEFAULT_SEED = 20240811


def _load_sections(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise exc
    return parse_config_text(text, origin=path)


def _info_meta(mode: str, **extra) -> dict:
    meta = {"info.version": __version__, "info.mode": mode, "info.schema": 1}
    for key, value in extra.items():
        meta[f"info.{key}"] = value
    return meta


def _write_table(path, result, meta, fmt: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        write_json(path, result, meta)
    else:
        write_csv(path, result, meta)


def run_spectrum(sections: dict, out: str, fmt: str) -> int:
    """Closed-form sweep over the configured (q, Omega) grid."""
    setup = build_setup(sections)
    result = analytic_spectrum(setup.query())
    meta = {**_info_meta("analytic"), **flatten_config(sections)}
    _write_table(out, result, meta, fmt)
    print(f"wrote {out}")
    return EXIT_OK


def oracle_defaults(setup: RunSetup, overrides: dict, seed: int) -> SimulationConfig:
    """Simulation parameters satisfying the sampling bounds for this scan."""
    w0 = setup.mode.waist_w0
    c = setup.geometry.frequency_per_length
    pitch = overrides.get("grid_pitch", w0 / 4.0)
    lattice_extent = 0.0
    if setup.lattice is not None:
        lattice_extent = setup.lattice.pitch_l * (setup.lattice.side_count_N - 1)
    q_need = 2.1 * float(np.abs(setup.q_grid).max()) / c
    extent = overrides.get("grid_extent")
    if extent is None:
        extent = max(lattice_extent + 8.0 * w0, q_need)
        extent = 2.0 * pitch * int(np.ceil(extent / (2.0 * pitch)))
    source = setup.source
    from .sources import _lorentzian_params
    from .sources import Quadrature

    gamma_max = max(_lorentzian_params(source, quad)[1] for quad in Quadrature)
    dt = overrides.get("dt", 0.05 / gamma_max)
    duration = overrides.get("duration", 512.0 * dt)
    trajectories = overrides.get("trajectories", 64)
    return SimulationConfig(
        source=source,
        mode=setup.mode,
        geometry=setup.geometry,
        scheme=setup.scheme,
        branch=setup.branch,
        lattice=setup.lattice,
        grid_extent=extent,
        grid_pitch=pitch,
        duration=duration,
        dt=dt,
        trajectories=trajectories,
        seed=seed,
    )


def run_oracle_mode(sections: dict, out: str, fmt: str, seed: int, workers: int) -> int:
    """Monte-Carlo estimate on the configured grid (nearest-bin snapped)."""
    setup = build_setup(sections)
    overrides = dict(setup.oracle_overrides)
    config = oracle_defaults(setup, overrides, seed)
    result = run_oracle(config, setup.q_grid, setup.omega_grid, workers=workers)
    oracle_meta = {
        "oracle.grid_extent": config.grid_extent,
        "oracle.grid_pitch": config.grid_pitch,
        "oracle.duration": config.duration,
        "oracle.dt": config.dt,
        "oracle.trajectories": config.trajectories,
    }
    meta = {
        **_info_meta("oracle", seed=seed, workers=workers),
        **flatten_config(sections),
        **oracle_meta,
    }
    _write_table(out, result, meta, fmt)
    print(f"wrote {out}")
    return EXIT_OK


def run_figure(fig_id: str, out_base: str, fmt: str, plot: bool) -> int:
    """Emit the canned figure scans, one table per curve, plus a rendering."""
    curves = build_figure(fig_id)
    base = Path(out_base)
    if base.suffix in (".csv", ".json"):
        base = base.with_suffix("")
    base.parent.mkdir(parents=True, exist_ok=True)
    ext = "json" if fmt == "json" else "csv"
    written = []
    for curve in curves:
        meta = {
            **_info_meta("figure", figure=fig_id, curve=curve.label),
            **flatten_config(curve.sections),
        }
        path = base.parent / f"{base.name}_{curve.label}.{ext}"
        _write_table(path, curve.result, meta, fmt)
        written.append(str(path))
    if plot:
        from .plotting import save_figure_png

        png = base.parent / f"{base.name}.png"
        save_figure_png(curves, png, title=fig_id)
        written.append(str(png))
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def run_validate(out: str | None, seed: int, workers: int, quick: bool) -> int:
    from .validation import run_all

    report = run_all(workers=workers, seed=seed, quick=quick)
    text = json.dumps(report, indent=1, sort_keys=False) + "\n"
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="ascii")
        print(f"wrote {out}")
    else:
        sys.stdout.write(text)
    for record in report["criteria"]:
        status = "PASS" if record["passed"] else "FAIL"
        if record["details"].get("skipped"):
            status = "SKIP"
        print(f"{record['cid']} {status}  {record['name']}", file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pmnoise",
        description=(
            "Photocurrent noise spectra of coherent squeezed-light sources "
            "under plus-minus detection in the far field"
        ),
    )
    parser.add_argument("--version", action="version", version=f"pmnoise {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="run configuration file")
        p.add_argument("--out", required=True, help="output table path")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p_spec = sub.add_parser("spectrum", help="closed-form spectrum sweep")
    common(p_spec)

    p_orc = sub.add_parser("oracle", help="Monte-Carlo spectrum estimate")
    common(p_orc)
    p_orc.add_argument("--seed", type=int, default=_DEFAULT_SEED, help="master RNG seed")
    p_orc.add_argument("--workers", type=int, default=1, help="parallel trajectory workers")

    p_fig = sub.add_parser("figure", help="canned figure data (and rendering)")
    p_fig.add_argument("id", choices=FIGURE_IDS, help="figure identifier")
    p_fig.add_argument("--out", required=True, help="output base path")
    p_fig.add_argument("--format", choices=("csv", "json"), default="csv")
    p_fig.add_argument("--no-plot", action="store_true", help="skip the PNG rendering")

    p_val = sub.add_parser("validate", help="run the acceptance-criteria gate")
    p_val.add_argument("--out", help="report path (default: stdout)")
    p_val.add_argument("--seed", type=int, default=_DEFAULT_SEED)
    p_val.add_argument("--workers", type=int, default=1)
    p_val.add_argument(
        "--quick",
        action="store_true",
        help="skip the Monte-Carlo criterion (not the official gate)",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "spectrum":
            sections = _load_sections(args.config)
            return run_spectrum(sections, args.out, args.format)
        if args.command == "oracle":
            sections = _load_sections(args.config)
            return run_oracle_mode(
                sections, args.out, args.format, args.seed, args.workers
            )
        if args.command == "figure":
            return run_figure(args.id, args.out, args.format, not args.no_plot)
        if args.command == "validate":
            return run_validate(args.out, args.seed, args.workers, args.quick)
        raise AssertionError(f"unhandled command {args.command!r}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
