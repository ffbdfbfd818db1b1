"""Canned spectrum scans reproducing the reference noise-comb figures.

All figures use the dimensionless preset: kappa = 1, mean photon number 1,
far-field spot size 1 (via wavelength 2*pi, focal length 1, waist 1), and
emitter pitch 10 waists.  The pump ratio for OPO curves defaults to 2 and is
recorded in every output header.  Scans run along q_x at q_y = 0, Omega = 0,
spanning 1.2 times the comb range D with 40 points per hole width.
"""
from __future__ import annotations

from dataclasses import dataclass

from .config import build_setup
from .spectra import SpectrumResult, analytic_spectrum

#: points per Gaussian hole 1/e half-width in figure scans
POINTS_PER_HOLE_WIDTH = 40

#: scan range in units of the comb range D
RANGE_FACTOR = 1.2

#: default pump-to-threshold ratio for OPO figure curves
DEFAULT_MU_TH = 2.0

_PITCH_OVER_WAIST = 10.0

FIGURE_IDS = ("fig3", "fig4", "fig5")

_CURVES = {
    # (source kind, branch, scheme, side count)
    "fig3": [
        ("spl", "plus", "two_beam", 7),
        ("spl", "plus", "two_beam", 99),
        ("dopo", "minus", "two_beam", 7),
        ("dopo", "minus", "two_beam", 99),
    ],
    "fig4": [
        ("spl", "plus", "single_beam", 7),
        ("spl", "plus", "single_beam", 99),
    ],
    "fig5": [
        ("dopo", "minus", "single_beam", 7),
    ],
}


@dataclass(frozen=True)
class FigureCurve:
    label: str
    sections: dict
    result: SpectrumResult


def curve_sections(kind: str, branch: str, scheme: str, side_count: int) -> dict:
    """Config sections (dimensionless preset) for one figure curve."""
    comb_range = _PITCH_OVER_WAIST * side_count  # D in units of 1/w0_tilde
    span = RANGE_FACTOR * comb_range
    step = 1.0 / POINTS_PER_HOLE_WIDTH
    half_points = int(round(span / step))
    sections = {
        "source": {"kind": kind, "kappa": 1.0, "mean_photons": 1.0},
        "geometry": {"wavelength": 6.283185307179586, "focal_length": 1.0, "waist": 1.0},
        "lattice": {"pitch": _PITCH_OVER_WAIST, "side_count": side_count},
        "detection": {"scheme": scheme, "branch": branch},
        "scan": {
            "qx_min": -half_points * step,
            "qx_max": half_points * step,
            "qx_points": 2 * half_points + 1,
            "qy": 0.0,
            "omega_min": 0.0,
            "omega_max": 0.0,
            "omega_points": 1,
        },
    }
    if kind == "dopo":
        sections["source"]["mu_th"] = DEFAULT_MU_TH
    return sections


def build_figure(fig_id: str) -> list[FigureCurve]:
    """Compute all curves of one figure; raises ValueError on unknown ids."""
    if fig_id not in _CURVES:
        raise ValueError(
            f"unknown figure id {fig_id!r}; available: {', '.join(FIGURE_IDS)}"
        )
    curves = []
    for kind, branch, scheme, side_count in _CURVES[fig_id]:
        sections = curve_sections(kind, branch, scheme, side_count)
        result = analytic_spectrum(build_setup(sections).query())
        curves.append(
            FigureCurve(
                label=f"{kind}_{branch}_n{side_count}",
                sections=sections,
                result=result,
            )
        )
    return curves
