"""Optical geometry: lens mapping between near and far field, and the emitter lattice.

A thin lens at focal distance maps a detector-plane position rho to the
near-field spatial frequency Q = (2*pi/(lambda*f)) * rho, so positions on the
detection plane are labelled by spatial frequencies in rad/m throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class OpticalGeometry:
    """Lens geometry of the detection setup.

    wavelength, focal_length and waist_w0 are in meters; waist_w0 is the
    1/e amplitude radius of the Gaussian emitter mode.
    """

    wavelength: float
    focal_length: float
    waist_w0: float

    def __post_init__(self):
        for name in ("wavelength", "focal_length", "waist_w0"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")

    @property
    def frequency_per_length(self) -> float:
        """Lens mapping constant 2*pi/(lambda*f), in rad/m per meter."""
        return 2.0 * np.pi / (self.wavelength * self.focal_length)


@dataclass(frozen=True)
class PixelLattice:
    """Square N x N grid of emitters at pitch l, centered on the axis.

    The index range per axis is 0, +-1, ..., +-(N-1)/2, which requires an odd
    side count.  The pitch must be large against the beam waist so that
    neighbouring emitters do not overlap; l/w0 < 5 is rejected because the
    cross-emitter overlap exp(-(l/w0)^2/2) is then no longer negligible.
    """

    pitch_l: float
    side_count_N: int

    #: minimum allowed pitch-to-waist ratio
    MIN_PITCH_TO_WAIST = 5.0

    def __post_init__(self):
        if not (np.isfinite(self.pitch_l) and self.pitch_l > 0):
            raise ValueError(f"pitch_l must be positive, got {self.pitch_l!r}")
        n = self.side_count_N
        if not (isinstance(n, (int, np.integer)) and n >= 1):
            raise ValueError(f"side_count_N must be a positive integer, got {n!r}")
        if n % 2 == 0:
            raise ValueError(
                f"side_count_N must be odd (symmetric index range), got {n}"
            )

    def validate_against_waist(self, waist_w0: float) -> None:
        """Reject lattices whose emitters are not well separated."""
        ratio = self.pitch_l / waist_w0
        if ratio < self.MIN_PITCH_TO_WAIST:
            raise ValueError(
                f"pitch/waist = {ratio:.3g} < {self.MIN_PITCH_TO_WAIST}: emitters "
                "overlap and the independent-emitter assumption breaks down"
            )

    @property
    def index_range(self) -> np.ndarray:
        half = (self.side_count_N - 1) // 2
        return np.arange(-half, half + 1)

    def positions(self) -> np.ndarray:
        """Emitter positions rho_m = l*(m_x, m_y), shape (N*N, 2), in meters."""
        m = self.index_range
        mx, my = np.meshgrid(m, m, indexing="ij")
        return self.pitch_l * np.stack([mx.ravel(), my.ravel()], axis=-1).astype(float)


def far_frequency_of_position(rho, geometry: OpticalGeometry) -> np.ndarray:
    """Map detector-plane position(s) rho (m) to spatial frequency Q (rad/m).

    Linear map Q = (2*pi/(lambda*f)) * rho, applied componentwise; accepts a
    single 2-vector or an (..., 2) array.
    """
    rho = np.asarray(rho, dtype=float)
    return geometry.frequency_per_length * rho


def effective_waist(geometry: OpticalGeometry) -> float:
    """Far-field spot size w0_tilde = lambda*f/(2*pi*w0), in meters.

    Its inverse is the 1/e half-width Delta_q = 1/w0_tilde of every Gaussian
    peak or hole in the detector-plane noise spectra.
    """
    return 1.0 / (geometry.frequency_per_length * geometry.waist_w0)


def lattice_far_frequencies(lattice: PixelLattice, geometry: OpticalGeometry) -> np.ndarray:
    """Spatial frequencies Q_m of all emitters, shape (N*N, 2) in rad/m."""
    return far_frequency_of_position(lattice.positions(), geometry)


def hole_geometry(lattice: PixelLattice, geometry: OpticalGeometry) -> dict:
    """Characteristic scales of the noise-spectrum comb.

    Returns `delta_q` (hole 1/e half-width), `d` (hole spacing) and `D`
    (full comb range), all in rad/m.
    """
    c = geometry.frequency_per_length
    return {
        "delta_q": 1.0 / effective_waist(geometry),
        "d": c * lattice.pitch_l,
        "D": c * lattice.pitch_l * lattice.side_count_N,
    }
