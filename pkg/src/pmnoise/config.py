"""Flat key-value run configuration with sections, and its schema.

The format is INI-like but parsed by hand so that every diagnostic carries
the offending line number; unknown sections or keys are rejected.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import OpticalGeometry, PixelLattice
from .sources import SourceKind, SourceParams, SignBranch
from .spatial import GaussianMode
from .spectra import DetectionScheme, SpectrumQuery


class ConfigError(ValueError):
    """Invalid run configuration; message carries file/line context."""


_SCHEMA = {
    "source": {
        "kind": str,
        "kappa": float,
        "mean_photons": float,
        "mu_th": float,
    },
    "geometry": {
        "wavelength": float,
        "focal_length": float,
        "waist": float,
    },
    "lattice": {
        "pitch": float,
        "side_count": int,
    },
    "detection": {
        "scheme": str,
        "branch": str,
    },
    "scan": {
        "qx_min": float,
        "qx_max": float,
        "qx_points": int,
        "qy": float,
        "omega_min": float,
        "omega_max": float,
        "omega_points": int,
    },
    "oracle": {
        "grid_extent": float,
        "grid_pitch": float,
        "duration": float,
        "dt": float,
        "trajectories": int,
    },
}

_REQUIRED = {
    "source": ("kind", "kappa", "mean_photons"),
    "geometry": ("wavelength", "focal_length", "waist"),
    "lattice": ("pitch", "side_count"),
    "detection": ("scheme", "branch"),
    "scan": ("qx_min", "qx_max", "qx_points", "omega_min", "omega_max", "omega_points"),
    "oracle": (),
}


def parse_config_text(text: str, origin: str = "<config>") -> dict:
    """Parse sectioned key-value text into {section: {key: value}}.

    Raises ConfigError with `origin:line:` context for syntax errors,
    unknown sections/keys, bad value types and duplicates.
    """
    sections: dict[str, dict] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            if name not in _SCHEMA:
                raise ConfigError(f"{origin}:{lineno}: unknown section [{name}]")
            if name in sections:
                raise ConfigError(f"{origin}:{lineno}: duplicate section [{name}]")
            sections[name] = {}
            current = name
            continue
        if "=" not in line:
            raise ConfigError(
                f"{origin}:{lineno}: expected 'key = value' or '[section]', got {raw.strip()!r}"
            )
        if current is None:
            raise ConfigError(f"{origin}:{lineno}: key outside of any section")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if key not in _SCHEMA[current]:
            raise ConfigError(
                f"{origin}:{lineno}: unknown key {key!r} in section [{current}]"
            )
        if key in sections[current]:
            raise ConfigError(
                f"{origin}:{lineno}: duplicate key {key!r} in section [{current}]"
            )
        caster = _SCHEMA[current][key]
        try:
            sections[current][key] = caster(value)
        except ValueError:
            raise ConfigError(
                f"{origin}:{lineno}: value {value!r} for {key!r} is not a valid "
                f"{caster.__name__}"
            ) from None

    for name, keys in _REQUIRED.items():
        if name == "lattice" and "lattice" not in sections:
            continue
        if name == "oracle" and "oracle" not in sections:
            continue
        if name not in sections:
            raise ConfigError(f"{origin}: missing required section [{name}]")
        for key in keys:
            if key not in sections[name]:
                raise ConfigError(f"{origin}: missing key {key!r} in section [{name}]")
    return sections


@dataclass(frozen=True)
class RunSetup:
    """Physical objects and scan grids assembled from a parsed config."""

    source: SourceParams
    mode: GaussianMode
    geometry: OpticalGeometry
    scheme: DetectionScheme
    branch: SignBranch
    lattice: PixelLattice | None
    q_grid: np.ndarray
    omega_grid: np.ndarray
    oracle_overrides: dict

    def query(self) -> SpectrumQuery:
        return SpectrumQuery(
            source=self.source,
            mode=self.mode,
            geometry=self.geometry,
            scheme=self.scheme,
            branch=self.branch,
            lattice=self.lattice,
            q_grid=self.q_grid,
            omega_grid=self.omega_grid,
        )


def _enum_value(enum_cls, value: str, what: str):
    try:
        return enum_cls(value.strip().lower())
    except ValueError:
        allowed = ", ".join(member.value for member in enum_cls)
        raise ConfigError(f"{what} must be one of: {allowed}; got {value!r}") from None


def build_setup(sections: dict) -> RunSetup:
    """Turn parsed sections into validated physics objects and grids."""
    src = sections["source"]
    kind = _enum_value(SourceKind, src["kind"], "source.kind")
    try:
        source = SourceParams(
            kind=kind,
            kappa=src["kappa"],
            mean_photons_n=src["mean_photons"],
            mu_th=src.get("mu_th"),
        )
        geo = sections["geometry"]
        geometry = OpticalGeometry(
            wavelength=geo["wavelength"],
            focal_length=geo["focal_length"],
            waist_w0=geo["waist"],
        )
        mode = GaussianMode(geo["waist"])
        lattice = None
        if "lattice" in sections:
            lattice = PixelLattice(
                pitch_l=sections["lattice"]["pitch"],
                side_count_N=sections["lattice"]["side_count"],
            )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    det = sections["detection"]
    scheme = _enum_value(DetectionScheme, det["scheme"], "detection.scheme")
    branch = _enum_value(SignBranch, det["branch"], "detection.branch")

    scan = sections["scan"]
    if scan["qx_points"] < 1 or scan["omega_points"] < 1:
        raise ConfigError("scan point counts must be >= 1")
    qx = np.linspace(scan["qx_min"], scan["qx_max"], scan["qx_points"])
    qy = float(scan.get("qy", 0.0))
    q_grid = np.stack([qx, np.full_like(qx, qy)], axis=1)
    omega = np.linspace(scan["omega_min"], scan["omega_max"], scan["omega_points"])

    setup = RunSetup(
        source=source,
        mode=mode,
        geometry=geometry,
        scheme=scheme,
        branch=branch,
        lattice=lattice,
        q_grid=q_grid,
        omega_grid=omega,
        oracle_overrides=dict(sections.get("oracle", {})),
    )
    try:
        setup.query()  # validates cross-object invariants
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return setup


def flatten_config(sections: dict) -> dict:
    """Flatten to 'section.key' -> value, with deterministic key order."""
    flat = {}
    for name in _SCHEMA:
        if name not in sections:
            continue
        for key in _SCHEMA[name]:
            if key in sections[name]:
                flat[f"{name}.{key}"] = sections[name][key]
    return flat


def unflatten_config(flat: dict) -> dict:
    """Inverse of flatten_config; validates keys against the schema."""
    sections: dict[str, dict] = {}
    for dotted, value in flat.items():
        name, _, key = dotted.partition(".")
        if name not in _SCHEMA or key not in _SCHEMA[name]:
            raise ConfigError(f"unknown config entry {dotted!r}")
        caster = _SCHEMA[name][key]
        sections.setdefault(name, {})[key] = caster(value)
    return sections


def config_text(sections: dict) -> str:
    """Render sections back to the canonical config text."""
    lines = []
    for name in _SCHEMA:
        if name not in sections:
            continue
        lines.append(f"[{name}]")
        for key in _SCHEMA[name]:
            if key in sections[name]:
                value = sections[name][key]
                if isinstance(value, float):
                    value = repr(value)  # shortest exact round-trip
                lines.append(f"{key} = {value}")
        lines.append("")
    return "\n".join(lines)
