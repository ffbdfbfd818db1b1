"""Closed-form photocurrent noise spectra for all source/scheme/branch combinations.

Every spectrum has the shape

    S(q, Omega) = 4*kappa*n * [1 + sign * envelope(q) * L(Omega)]

with the unit vacuum floor, the spatial envelope of the emitter arrangement,
and the source's temporal Lorentzian; sign selects squeezing or excess noise.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .geometry import OpticalGeometry, PixelLattice, effective_waist
from .sources import SignBranch, SourceParams, detection_sign, temporal_lorentzian
from .spatial import EnvelopeKind, GaussianMode, envelope


class DetectionScheme(enum.Enum):
    """Two mirrored beams on two detectors, or even/odd sampling of one beam."""

    TWO_BEAM = "two_beam"
    SINGLE_BEAM = "single_beam"


class SpectrumConsistencyError(RuntimeError):
    """A computed spectrum violated a structural bound; indicates a bug."""


@dataclass(frozen=True)
class SpectrumQuery:
    """One request for spectra on a (q, Omega) grid."""

    source: SourceParams
    mode: GaussianMode
    geometry: OpticalGeometry
    scheme: DetectionScheme
    branch: SignBranch
    q_grid: np.ndarray
    omega_grid: np.ndarray
    lattice: PixelLattice | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "q_grid", np.atleast_2d(np.asarray(self.q_grid, dtype=float))
        )
        object.__setattr__(
            self, "omega_grid", np.atleast_1d(np.asarray(self.omega_grid, dtype=float))
        )
        if self.q_grid.ndim != 2 or self.q_grid.shape[1] != 2:
            raise ValueError(f"q_grid must have shape (P, 2), got {self.q_grid.shape}")
        if self.mode.waist_w0 != self.geometry.waist_w0:
            raise ValueError(
                "mode waist and geometry waist disagree: "
                f"{self.mode.waist_w0!r} vs {self.geometry.waist_w0!r}"
            )
        if self.scheme is DetectionScheme.SINGLE_BEAM and self.lattice is None:
            raise ValueError(
                "single-beam detection requires a lattice; use side_count_N = 1 "
                "for a lone emitter"
            )
        if self.lattice is not None:
            self.lattice.validate_against_waist(self.mode.waist_w0)

    @property
    def envelope_kind(self) -> EnvelopeKind:
        if self.scheme is DetectionScheme.TWO_BEAM:
            if self.lattice is None:
                return EnvelopeKind.SINGLE_POINTLIKE
            return EnvelopeKind.TWO_BEAM_PIXELLISED
        if self.branch is SignBranch.PLUS:
            return EnvelopeKind.SINGLE_BEAM_PIXELLISED_PLUS
        return EnvelopeKind.SINGLE_BEAM_PIXELLISED_MINUS


@dataclass(frozen=True)
class SpectrumResult:
    """Spectra on the query grid: absolute values and shot-normalized ones.

    values has shape (len(q_grid), len(omega_grid)); shot_normalized is the
    same array divided by the shot level 4*kappa*n.  stderr (same shape) is
    present only for Monte-Carlo estimates.
    """

    q_grid: np.ndarray
    omega_grid: np.ndarray
    values: np.ndarray
    shot_normalized: np.ndarray
    meta: dict = field(default_factory=dict)
    stderr: np.ndarray | None = None


def shot_level(source: SourceParams) -> float:
    """Flat shot-noise floor 4*kappa*n of the absolute spectra."""
    return 4.0 * source.kappa * source.mean_photons_n


def _negative_tolerance(query: SpectrumQuery) -> float:
    """Worst-case undershoot of the closed form below zero.

    The pixellised envelope exceeds 1 by at most N^2 exp(-(d*w0t)^2) (cross
    terms of the diagonal peak), so the squeezed branch may undershoot zero
    by that amount; anything more negative is a bug.
    """
    tol = 1e-12
    if query.lattice is not None:
        d_w0t = (
            query.geometry.frequency_per_length
            * query.lattice.pitch_l
            * effective_waist(query.geometry)
        )
        overshoot = query.lattice.side_count_N**2 * np.exp(-(d_w0t**2))
        tol += overshoot
    return tol


def analytic_spectrum(query: SpectrumQuery) -> SpectrumResult:
    """Evaluate the closed-form spectrum on the query grid.

    Fixed evaluation order, pure arithmetic: results are identical no matter
    how callers split the grid.
    """
    sign, quad = detection_sign(query.source, query.branch)
    lorentz = temporal_lorentzian(query.source, quad, query.omega_grid)
    env = envelope(query.envelope_kind, query.q_grid, query.lattice, query.geometry)

    normalized = 1.0 + sign * env[:, None] * lorentz[None, :]
    tol = _negative_tolerance(query)
    low = normalized.min(initial=np.inf)
    if low < -tol:
        raise SpectrumConsistencyError(
            f"shot-normalized spectrum reached {low:.6e}, below -{tol:.3e}"
        )
    np.clip(normalized, 0.0, None, out=normalized)

    level = shot_level(query.source)
    return SpectrumResult(
        q_grid=query.q_grid,
        omega_grid=query.omega_grid,
        values=level * normalized,
        shot_normalized=normalized,
        meta={
            "kind": query.source.kind.value,
            "scheme": query.scheme.value,
            "branch": query.branch.value,
            "envelope": query.envelope_kind.value,
            "sign": sign,
            "quadrature": quad.value,
            "shot_level": level,
        },
    )
