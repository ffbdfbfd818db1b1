"""Spatial structure factors: Gaussian mode transform, grating-lobe factor,
and the noise-spectrum envelopes of pixellised emitter arrays.

The pixellised envelopes are double sums over emitter pairs.  They are
evaluated through the difference multiset: Q_m - Q_n takes only (2N-1)^2
distinct values with separable multiplicities (N-|j_x|)(N-|j_y|), so each
axis reduces to a 1-D sum of 2N-1 Gaussians instead of the naive N^4 terms.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .geometry import OpticalGeometry, PixelLattice, effective_waist

#: exp() arguments below this underflow double precision; such terms are skipped
_EXP_UNDERFLOW = -700.0

#: brute-force lattice sums above this side count are refused
_DIRECT_N_LIMIT = 201


@dataclass(frozen=True)
class GaussianMode:
    """Normalized Gaussian emitter mode f(rho) = (pi w0^2/2)^(-1/2) exp(-rho^2/w0^2)."""

    waist_w0: float

    def __post_init__(self):
        if not (np.isfinite(self.waist_w0) and self.waist_w0 > 0):
            raise ValueError(f"waist_w0 must be positive, got {self.waist_w0!r}")

    def amplitude(self, rho) -> np.ndarray:
        """Mode amplitude at position(s) rho, shape (..., 2) in meters."""
        rho = np.asarray(rho, dtype=float)
        r2 = np.sum(rho**2, axis=-1)
        return np.exp(-r2 / self.waist_w0**2) / np.sqrt(np.pi * self.waist_w0**2 / 2.0)


class EnvelopeKind(enum.Enum):
    SINGLE_POINTLIKE = "single_pointlike"
    TWO_BEAM_PIXELLISED = "two_beam_pixellised"
    SINGLE_BEAM_PIXELLISED_PLUS = "single_beam_pixellised_plus"
    SINGLE_BEAM_PIXELLISED_MINUS = "single_beam_pixellised_minus"


def mode_fourier(mode: GaussianMode, Q) -> np.ndarray:
    """Fourier amplitude f_Q = sqrt(w0^2/(2 pi)) * exp(-w0^2 |Q|^2 / 4).

    Fourier convention (1/2pi) Int d^2rho f(rho) exp(-i Q.rho); Q in rad/m,
    shape (..., 2) or a single 2-vector.
    """
    Q = np.asarray(Q, dtype=float)
    q2 = np.sum(Q**2, axis=-1)
    w0 = mode.waist_w0
    return np.sqrt(w0**2 / (2.0 * np.pi)) * np.exp(-0.25 * w0**2 * q2)


def _dirichlet_axis(u: np.ndarray, pitch: float, n: int) -> np.ndarray:
    """Per-axis lobe factor sin(N u l/2)/sin(u l/2) with removable singularities.

    Where |sin(u l/2)| < 1e-12 the analytic limit N cos(N u l/2)/cos(u l/2)
    is used (equal to +N on lobe centers for odd N).
    """
    half = 0.5 * u * pitch
    den = np.sin(half)
    num = np.sin(n * half)
    singular = np.abs(den) < 1e-12
    safe_den = np.where(singular, 1.0, den)
    ratio = num / safe_den
    limit = n * np.cos(n * half) / np.cos(half)
    return np.where(singular, limit, ratio)


def lattice_factor(lattice: PixelLattice, Q) -> np.ndarray:
    """Grating-lobe factor Lambda_Q as a separable closed form.

    Product over the two axes of sin(Q_a l N/2)/sin(Q_a l/2); equals N^2 at
    Q = 0 and +-N per axis on lobe centers.
    """
    Q = np.asarray(Q, dtype=float)
    fx = _dirichlet_axis(Q[..., 0], lattice.pitch_l, lattice.side_count_N)
    fy = _dirichlet_axis(Q[..., 1], lattice.pitch_l, lattice.side_count_N)
    return fx * fy


def lattice_factor_direct(lattice: PixelLattice, Q) -> np.ndarray:
    """Brute-force phasor sum over all N^2 emitters; oracle for lattice_factor.

    The imaginary part must vanish (symmetric lattice) and is checked against
    1e-10 * N^2.  Refuses N > 201 to guard against accidental huge sums.
    """
    if lattice.side_count_N > _DIRECT_N_LIMIT:
        raise ValueError(
            f"direct sum limited to N <= {_DIRECT_N_LIMIT}, got {lattice.side_count_N}"
        )
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    positions = lattice.positions()  # (N^2, 2)
    n_sq = positions.shape[0]
    total = np.zeros(Q.shape[0], dtype=complex)
    # chunk the phase matrix to bound memory at large N
    chunk = max(1, int(5e6) // n_sq)
    for lo in range(0, Q.shape[0], chunk):
        phases = Q[lo : lo + chunk] @ positions.T  # (chunk, N^2)
        total[lo : lo + chunk] = np.exp(-1j * phases).sum(axis=1)
    imag_bound = 1e-10 * n_sq
    if np.any(np.abs(total.imag) > imag_bound):
        raise AssertionError(
            f"imaginary residue {np.max(np.abs(total.imag)):.3e} exceeds {imag_bound:.3e}"
        )
    result = total.real
    return result if result.size > 1 else result[0]


def _axis_multiplicity_sum(
    u: np.ndarray, step: float, n: int, inv_width: float, skip_center: bool = False
) -> np.ndarray:
    """1-D reduced lattice sum S(u) = sum_j (N-|j|) exp(-(inv_width*(u + step*j))^2).

    j runs over -(N-1) .. N-1 (without j = 0 when skip_center); terms whose
    exponent underflows are skipped.
    """
    j = np.arange(-(n - 1), n)
    if skip_center:
        j = j[j != 0]
        if j.size == 0:
            return np.zeros_like(u)
    weights = (n - np.abs(j)).astype(float)
    args = inv_width * (u[..., None] + step * j)
    expo = -(args**2)
    out = np.zeros_like(expo)
    mask = expo > _EXP_UNDERFLOW
    np.exp(expo, out=out, where=mask)
    return out @ weights


def _center_gaussian(u: np.ndarray, inv_width: float) -> np.ndarray:
    expo = -((inv_width * u) ** 2)
    out = np.zeros_like(expo)
    np.exp(expo, out=out, where=expo > _EXP_UNDERFLOW)
    return out


def envelope(
    kind: EnvelopeKind,
    q,
    lattice: PixelLattice | None,
    geometry: OpticalGeometry,
) -> np.ndarray:
    """Spatial envelope multiplying the temporal Lorentzian in the spectra.

    q is the detector-plane spatial frequency in rad/m, shape (..., 2).
    Pointlike: exp(-w0t^2 q^2).  Two-beam pixellised: (1/N^2) double sum of
    Gaussians at the lattice difference frequencies.  Single-beam pixellised:
    (1/(2N^2)) [half-spaced sum +- full-spaced sum], per branch.
    All kinds are evaluated through the separable multiset reduction.
    """
    q = np.asarray(q, dtype=float)
    w0t = effective_waist(geometry)
    qx, qy = q[..., 0], q[..., 1]

    if kind is EnvelopeKind.SINGLE_POINTLIKE:
        expo = -(w0t**2) * (qx**2 + qy**2)
        out = np.zeros_like(expo)
        np.exp(expo, out=out, where=expo > _EXP_UNDERFLOW)
        return out

    if lattice is None:
        raise ValueError(f"envelope kind {kind.value} requires a lattice")
    n = lattice.side_count_N
    d = geometry.frequency_per_length * lattice.pitch_l

    def reduced(step: float) -> np.ndarray:
        return _axis_multiplicity_sum(qx, step, n, w0t) * _axis_multiplicity_sum(
            qy, step, n, w0t
        )

    if kind is EnvelopeKind.TWO_BEAM_PIXELLISED:
        return reduced(d) / n**2
    if kind is EnvelopeKind.SINGLE_BEAM_PIXELLISED_PLUS:
        return (reduced(0.5 * d) + reduced(d)) / (2.0 * n**2)
    if kind is EnvelopeKind.SINGLE_BEAM_PIXELLISED_MINUS:
        # the half-spaced and full-spaced sums share the diagonal mass
        # N^2 g(qx) g(qy); cancel it analytically so small differences
        # between the combs are not lost to rounding
        gx = _center_gaussian(qx, w0t)
        gy = _center_gaussian(qy, w0t)
        rhx = _axis_multiplicity_sum(qx, 0.5 * d, n, w0t, skip_center=True)
        rhy = _axis_multiplicity_sum(qy, 0.5 * d, n, w0t, skip_center=True)
        rfx = _axis_multiplicity_sum(qx, d, n, w0t, skip_center=True)
        rfy = _axis_multiplicity_sum(qy, d, n, w0t, skip_center=True)
        diff = n * gx * (rhy - rfy) + n * gy * (rhx - rfx) + (rhx * rhy - rfx * rfy)
        return diff / (2.0 * n**2)
    raise ValueError(f"unknown envelope kind: {kind!r}")


def envelope_direct(
    kind: EnvelopeKind,
    q,
    lattice: PixelLattice | None,
    geometry: OpticalGeometry,
) -> np.ndarray:
    """Literal N^4 pair sum over emitters; oracle for the reduced envelope."""
    q = np.atleast_2d(np.asarray(q, dtype=float))
    w0t = effective_waist(geometry)

    if kind is EnvelopeKind.SINGLE_POINTLIKE:
        return np.exp(-(w0t**2) * np.sum(q**2, axis=-1))

    if lattice is None:
        raise ValueError(f"envelope kind {kind.value} requires a lattice")
    if lattice.side_count_N > 15:
        raise ValueError("direct envelope sum is meant for small N only")
    freqs = geometry.frequency_per_length * lattice.positions()  # (N^2, 2)
    n_sq = freqs.shape[0]

    total = np.zeros(q.shape[0])
    for m in range(n_sq):
        delta = freqs[m] - freqs  # (N^2, 2)
        full = q[:, None, :] + delta[None, :, :]
        g_full = np.exp(-(w0t**2) * np.sum(full**2, axis=-1))
        if kind is EnvelopeKind.TWO_BEAM_PIXELLISED:
            total += g_full.sum(axis=1)
            continue
        half = q[:, None, :] + 0.5 * delta[None, :, :]
        g_half = np.exp(-(w0t**2) * np.sum(half**2, axis=-1))
        if kind is EnvelopeKind.SINGLE_BEAM_PIXELLISED_PLUS:
            total += (g_half + g_full).sum(axis=1)
        elif kind is EnvelopeKind.SINGLE_BEAM_PIXELLISED_MINUS:
            total += (g_half - g_full).sum(axis=1)
        else:
            raise ValueError(f"unknown envelope kind: {kind!r}")

    if kind is EnvelopeKind.TWO_BEAM_PIXELLISED:
        return total / n_sq
    return total / (2.0 * n_sq)
