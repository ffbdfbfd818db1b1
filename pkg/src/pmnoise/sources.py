"""Temporal noise models of the two coherent squeezed-light sources.

Both source types (sub-Poissonian laser, above-threshold degenerate OPO) have
Lorentzian excess-noise spectra in their quadratures.  The excess enters the
detected spectra as sign * L(Omega) on top of the unit vacuum floor; which
quadrature carries squeezing (sign -1) and which carries excess (sign +1) is
fixed per source and selected by the plus/minus detection branch.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

#: smallest pump ratio above threshold accepted for the OPO; the amplitude
#: Lorentzian width kappa*(mu_th - 1) collapses to zero at threshold
MIN_MU_ABOVE_THRESHOLD = 1.0 + 1e-6


class SourceKind(enum.Enum):
    SPL = "spl"
    DOPO = "dopo"


class Quadrature(enum.Enum):
    X = "x"
    Y = "y"


class SignBranch(enum.Enum):
    """Summed (plus) or differenced (minus) photocurrent combination."""

    PLUS = "plus"
    MINUS = "minus"


@dataclass(frozen=True)
class SourceParams:
    """Physical parameters of one coherent source.

    kappa is the cavity decay rate in rad/s, mean_photons_n the intracavity
    mean photon number, mu_th the pump-to-threshold power ratio (OPO only,
    must exceed 1).
    """

    kind: SourceKind
    kappa: float
    mean_photons_n: float
    mu_th: float | None = None

    def __post_init__(self):
        if not (np.isfinite(self.kappa) and self.kappa > 0):
            raise ValueError(f"kappa must be positive, got {self.kappa!r}")
        if not (np.isfinite(self.mean_photons_n) and self.mean_photons_n >= 0):
            raise ValueError(
                f"mean_photons_n must be >= 0, got {self.mean_photons_n!r}"
            )
        if self.kind is SourceKind.DOPO:
            if self.mu_th is None or not np.isfinite(self.mu_th):
                raise ValueError("DOPO source requires mu_th > 1")
            if self.mu_th < MIN_MU_ABOVE_THRESHOLD:
                raise ValueError(
                    f"mu_th = {self.mu_th!r} too close to threshold; require "
                    f">= {MIN_MU_ABOVE_THRESHOLD}"
                )
        elif self.mu_th is not None:
            raise ValueError("mu_th is only meaningful for a DOPO source")


def _lorentzian_params(source: SourceParams, quad: Quadrature) -> tuple[float, float]:
    """Peak value A = L(0) and half-width gamma of the excess Lorentzian."""
    k = source.kappa
    if source.kind is SourceKind.DOPO:
        mu = source.mu_th
        if quad is Quadrature.X:
            gamma = k * (mu - 1.0)
        else:
            gamma = k * mu
        return (k / gamma) ** 2, gamma
    # SPL
    if quad is Quadrature.X:
        return 1.0, k
    return 8.0, k / 2.0


def temporal_lorentzian(source: SourceParams, quad: Quadrature, omega) -> np.ndarray:
    """Excess-noise Lorentzian L(Omega), dimensionless and >= 0.

    SPL:  X -> k^2/(k^2 + W^2),            Y -> 2 k^2/(k^2/4 + W^2)
    DOPO: X -> k^2/(k^2 (mu-1)^2 + W^2),   Y -> k^2/(k^2 mu^2 + W^2)
    """
    omega = np.asarray(omega, dtype=float)
    peak, gamma = _lorentzian_params(source, quad)
    return peak * gamma**2 / (gamma**2 + omega**2)


def detection_sign(source: SourceParams, branch: SignBranch) -> tuple[int, Quadrature]:
    """Sign and quadrature selected by a detection branch for this source.

    The shot-normalized single-source spectrum is 1 + sign * envelope * L.
    The squeezed branch (sign -1) is plus/X for the SPL and minus/Y for the
    DOPO; the conjugate branch carries excess noise (sign +1).
    """
    if source.kind is SourceKind.DOPO:
        if branch is SignBranch.PLUS:
            return +1, Quadrature.X
        return -1, Quadrature.Y
    if branch is SignBranch.PLUS:
        return -1, Quadrature.X
    return +1, Quadrature.Y


def quadrature_sign(source: SourceParams, quad: Quadrature) -> int:
    """Sign with which a quadrature's Lorentzian enters the output spectrum."""
    for branch in SignBranch:
        sign, selected = detection_sign(source, branch)
        if selected is quad:
            return sign
    raise AssertionError("unreachable: every quadrature is selected by one branch")


def output_quadrature_psd(source: SourceParams, quad: Quadrature, omega) -> np.ndarray:
    """Output-field quadrature PSD 1 + sign * L(Omega), in vacuum units.

    This is the total (vacuum plus excess) power spectral density of one
    emitter's output quadrature, the target spectrum for synthesized
    time series.  Raises if it would go negative, which is impossible for
    the built-in source models (L <= 1 whenever sign = -1).
    """
    omega = np.asarray(omega, dtype=float)
    sign = quadrature_sign(source, quad)
    psd = 1.0 + sign * temporal_lorentzian(source, quad, omega)
    if np.any(psd < 0.0):
        raise ValueError(
            f"negative quadrature PSD for {source.kind.value}/{quad.value}: "
            "inconsistent source parameters"
        )
    return psd


def normally_ordered_correlator(source: SourceParams, quad: Quadrature, tau) -> np.ndarray:
    """Time-domain excess correlator sign * (A*gamma/(8*kappa)) * exp(-gamma*|tau|).

    Inverse Fourier partner of the excess spectrum: integrating
    4*kappa * correlator(tau) * exp(i*Omega*tau) over tau returns
    sign * L(Omega).
    """
    tau = np.asarray(tau, dtype=float)
    peak, gamma = _lorentzian_params(source, quad)
    sign = quadrature_sign(source, quad)
    return sign * (peak * gamma / (8.0 * source.kappa)) * np.exp(-gamma * np.abs(tau))
