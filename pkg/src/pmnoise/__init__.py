"""Quadrature-noise spectra of coherent squeezed-light sources measured by
plus-minus detection in the far field, without a local oscillator.

Closed-form spectra live in `spectra`; the independent Monte-Carlo
verification pipeline lives in `oracle`; `cli` provides the command line.
"""

from .geometry import (
    OpticalGeometry,
    PixelLattice,
    effective_waist,
    far_frequency_of_position,
    hole_geometry,
    lattice_far_frequencies,
)
from .sources import (
    Quadrature,
    SignBranch,
    SourceKind,
    SourceParams,
    detection_sign,
    normally_ordered_correlator,
    output_quadrature_psd,
    temporal_lorentzian,
)
from .spatial import (
    EnvelopeKind,
    GaussianMode,
    envelope,
    envelope_direct,
    lattice_factor,
    lattice_factor_direct,
    mode_fourier,
)
from .spectra import (
    DetectionScheme,
    SpectrumConsistencyError,
    SpectrumQuery,
    SpectrumResult,
    analytic_spectrum,
    shot_level,
)

__version__ = "0.1.0"

__all__ = [
    "OpticalGeometry",
    "PixelLattice",
    "effective_waist",
    "far_frequency_of_position",
    "hole_geometry",
    "lattice_far_frequencies",
    "Quadrature",
    "SignBranch",
    "SourceKind",
    "SourceParams",
    "detection_sign",
    "normally_ordered_correlator",
    "output_quadrature_psd",
    "temporal_lorentzian",
    "EnvelopeKind",
    "GaussianMode",
    "envelope",
    "envelope_direct",
    "lattice_factor",
    "lattice_factor_direct",
    "mode_fourier",
    "DetectionScheme",
    "SpectrumConsistencyError",
    "SpectrumQuery",
    "SpectrumResult",
    "analytic_spectrum",
    "shot_level",
    "__version__",
]
