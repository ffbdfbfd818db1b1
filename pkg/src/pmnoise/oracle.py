"""Semiclassical Monte-Carlo pipeline: stochastic emitter fields -> near field
-> lens transform -> pointwise detection -> current combination -> spectral
estimate.  Verifies the closed-form spectra through an independent route.

Statistical model
-----------------
All fields are classical complex amplitudes whose quadratures carry
symmetric-ordering statistics: empty modes are white noise with quadrature
PSD 1 (vacuum units).  Each emitter's output mode carries a stationary
Gaussian complex amplitude whose quadrature PSDs are the full output spectra
1 + sign*L(Omega); all remaining spatial modes stay at the vacuum level.  On
the grid this is realized by drawing white vacuum everywhere and replacing
its component in each emitter mode by a synthesized series, so the shot
floor emerges from the pipeline end to end rather than being added by hand.

Detection is linearized: delta_i = <S_F>* dS_F + c.c., valid for coherent
sources whose mean amplitude dominates the fluctuations.  In the two-beam
scheme the source beams are mixed on a symmetric beamsplitter before the
lenses, as the detection arrangement prescribes; mixing two independent
vacua yields two independent vacua, so it is applied to the emitter series
and the mean fields while each mixed beam draws its own grid vacuum.

Normalization
-------------
The raw estimator measures the two-sided spatio-temporal power spectral
density of the combined photocurrents.  For two mirrored coherent beams this
floor is 2 * N^2 times the conventional shot level 4*kappa*n that normalizes
the closed-form spectra, so reported values carry a fixed 1/(2*N^2)
calibration; the vacuum-only shot-floor test pins this constant end to end.
"""
from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .geometry import OpticalGeometry, PixelLattice
from .sources import Quadrature, SignBranch, SourceParams, output_quadrature_psd
from .spatial import GaussianMode
from .spectra import DetectionScheme, SpectrumResult, shot_level

#: raw two-beam vacuum floor is 2 * N^2 * (4 kappa n); see module docstring
_FLOOR_OVER_SHOT = 2.0

#: emitter-mode patches extend this many waists from the emitter center
_MODE_PATCH_RADIUS_W0 = 4.5

#: fraction of mean-field energy tolerated near the grid edge
_EDGE_ENERGY_TOL = 1e-6


@dataclass(frozen=True)
class SimulationConfig:
    """Full parameter set of one Monte-Carlo run.

    duration and dt are per trajectory; each trajectory is one statistically
    independent record (and one averaging segment unless subdivided).
    single_precision selects the fluctuation-field dtype; the estimator
    itself always accumulates in double.
    """

    source: SourceParams
    mode: GaussianMode
    geometry: OpticalGeometry
    scheme: DetectionScheme
    branch: SignBranch
    grid_extent: float
    grid_pitch: float
    duration: float
    dt: float
    trajectories: int
    seed: int
    lattice: PixelLattice | None = None
    squeezing_enabled: bool = True
    single_precision: bool = True

    def __post_init__(self):
        if self.mode.waist_w0 != self.geometry.waist_w0:
            raise ValueError("mode waist and geometry waist disagree")
        if self.scheme is DetectionScheme.SINGLE_BEAM and self.lattice is None:
            raise ValueError("single-beam detection requires a lattice")
        if self.lattice is not None:
            self.lattice.validate_against_waist(self.mode.waist_w0)
        w0 = self.mode.waist_w0
        if self.grid_pitch > w0 / 4.0:
            raise ValueError(
                f"grid pitch {self.grid_pitch!r} must be <= w0/4 = {w0 / 4.0!r}"
            )
        min_extent = self._lattice_extent() + 6.0 * w0
        if self.grid_extent < min_extent:
            raise ValueError(
                f"grid extent {self.grid_extent!r} must be >= lattice extent "
                f"+ 6*w0 = {min_extent!r}"
            )
        cells = self.grid_extent / self.grid_pitch
        if abs(cells - round(cells)) > 1e-9 or round(cells) % 2:
            raise ValueError(
                "grid extent must be an even number of grid pitches, got "
                f"{cells!r}"
            )
        gamma_min, gamma_max = self.decay_rates()
        if self.dt > 0.05 / gamma_max:
            raise ValueError(
                f"dt {self.dt!r} must be <= 0.05/gamma_max = {0.05 / gamma_max!r}"
            )
        if self.trajectories < 1:
            raise ValueError("need at least one trajectory")
        if self.trajectories * self.duration < 200.0 / gamma_min:
            raise ValueError(
                "total record too short: trajectories*duration must be >= "
                f"200/gamma_min = {200.0 / gamma_min!r}"
            )

    def _lattice_extent(self) -> float:
        if self.lattice is None:
            return 0.0
        return self.lattice.pitch_l * (self.lattice.side_count_N - 1)

    def decay_rates(self) -> tuple[float, float]:
        """(gamma_min, gamma_max) over the two quadrature Lorentzian widths."""
        from .sources import _lorentzian_params

        widths = [_lorentzian_params(self.source, quad)[1] for quad in Quadrature]
        return min(widths), max(widths)

    @property
    def n_cells(self) -> int:
        return int(round(self.grid_extent / self.grid_pitch))

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))

    @property
    def n_beams(self) -> int:
        return 2 if self.scheme is DetectionScheme.TWO_BEAM else 1

    @property
    def float_dtype(self):
        return np.float32 if self.single_precision else np.float64

    @property
    def complex_dtype(self):
        return np.complex64 if self.single_precision else np.complex128

    def grid_axis(self) -> np.ndarray:
        """Centered cell coordinates, shape (G,), in meters."""
        g = self.n_cells
        return (np.arange(g) - g // 2) * self.grid_pitch

    def emitter_positions(self) -> np.ndarray:
        if self.lattice is None:
            return np.zeros((1, 2))
        return self.lattice.positions()

    def detector_axis(self) -> np.ndarray:
        """Centered detector-plane coordinates conjugate to the grid, meters."""
        g = self.n_cells
        dq = 2.0 * np.pi / (g * self.grid_pitch)
        return (np.arange(g) - g // 2) * dq / self.geometry.frequency_per_length


@dataclass
class FieldEnsemble:
    """Space-time record of one or two beams on a common grid.

    mean_fields has shape (B, G, G) and fluctuations (B, M, G, G); axes are
    the centered cell coordinates in meters, t_axis in seconds.
    """

    x_axis: np.ndarray
    y_axis: np.ndarray
    t_axis: np.ndarray
    mean_fields: np.ndarray
    fluctuations: np.ndarray
    cell_area: float


def synthesize_quadrature_series(psd, duration: float, dt: float, rng) -> np.ndarray:
    """Stationary zero-mean Gaussian series whose periodogram expectation is psd.

    psd maps angular frequency (rad/s, array) to a two-sided PSD >= 0.
    Frequency-domain synthesis: white Hermitian spectrum shaped by sqrt(psd),
    inverse transformed.  The returned record is circularly stationary, so
    its full-length periodogram is exactly unbiased at the native bins.
    """
    n = int(round(duration / dt))
    if n < 2:
        raise ValueError("need at least two samples")
    omegas = 2.0 * np.pi * np.fft.fftfreq(n, d=dt)
    target = np.asarray(psd(omegas), dtype=float)
    if target.shape != omegas.shape:
        raise ValueError("psd must return one value per frequency")
    if np.any(~np.isfinite(target)) or np.any(target < 0.0):
        raise ValueError("psd must be finite and non-negative on the Nyquist band")

    z = rng.standard_normal(n)
    spec = np.zeros(n, dtype=complex)
    half = n // 2
    spec[0] = z[0] * np.sqrt(n * target[0] / dt)
    k = np.arange(1, half + (n % 2))
    amp = np.sqrt(n * target[k] / (2.0 * dt))
    spec[k] = amp * (z[2 * k - 1] + 1j * z[2 * k])
    spec[n - k] = np.conj(spec[k])
    if n % 2 == 0:
        spec[half] = z[n - 1] * np.sqrt(n * target[half] / dt)
    return np.fft.ifft(spec).real


def _beam_phases(scheme: DetectionScheme) -> np.ndarray:
    """Mean-amplitude phases of the source beams (second beam shifted by pi/2)."""
    if scheme is DetectionScheme.TWO_BEAM:
        return np.array([1.0, 1.0j])
    return np.array([1.0 + 0.0j])


class _ModePatch:
    """One emitter mode restricted to its support box on the grid."""

    __slots__ = ("sx", "sy", "profile")

    def __init__(self, sx: slice, sy: slice, profile: np.ndarray):
        self.sx = sx
        self.sy = sy
        self.profile = profile


def _mode_patches(config: SimulationConfig) -> list[_ModePatch]:
    """Discretely orthonormal emitter mode profiles (sum |phi|^2 * area = 1)."""
    axis = config.grid_axis()
    pitch = config.grid_pitch
    area = pitch**2
    w0 = config.mode.waist_w0
    half_cells = int(np.ceil(_MODE_PATCH_RADIUS_W0 * w0 / pitch))
    g = config.n_cells
    patches = []
    for pos in config.emitter_positions():
        icx = int(np.argmin(np.abs(axis - pos[0])))
        icy = int(np.argmin(np.abs(axis - pos[1])))
        sx = slice(max(0, icx - half_cells), min(g, icx + half_cells + 1))
        sy = slice(max(0, icy - half_cells), min(g, icy + half_cells + 1))
        xx = axis[sx, None] - pos[0]
        yy = axis[None, sy] - pos[1]
        profile = np.exp(-(xx**2 + yy**2) / w0**2)
        profile /= np.sqrt(np.sum(profile**2) * area)
        patches.append(_ModePatch(sx, sy, profile.astype(config.float_dtype)))
    return patches


def _emitter_series(config: SimulationConfig, rng) -> np.ndarray:
    """Complex output-mode series for every (beam, emitter), shape (B, P, M).

    Per emitter the two quadratures are independent series at the full
    output PSDs; disabling squeezing replaces both by the flat vacuum level.
    For the two-beam scheme the returned series are those of the
    beamsplitter outputs, (c1 +- c2)/sqrt(2).
    """
    if config.squeezing_enabled:
        psd_x = lambda w: output_quadrature_psd(config.source, Quadrature.X, w)
        psd_y = lambda w: output_quadrature_psd(config.source, Quadrature.Y, w)
    else:
        psd_x = psd_y = lambda w: np.ones_like(np.asarray(w, dtype=float))
    phases = _beam_phases(config.scheme)
    n_pix = config.emitter_positions().shape[0]
    out = np.empty((len(phases), n_pix, config.n_steps), dtype=complex)
    for b, phase in enumerate(phases):
        for p in range(n_pix):
            u = synthesize_quadrature_series(psd_x, config.duration, config.dt, rng)
            w = synthesize_quadrature_series(psd_y, config.duration, config.dt, rng)
            out[b, p] = phase * (u + 1j * w)
    if config.scheme is DetectionScheme.TWO_BEAM:
        s = 1.0 / np.sqrt(2.0)
        out = np.stack([s * (out[0] + out[1]), s * (out[0] - out[1])])
    return out


def _mean_fields(config: SimulationConfig) -> np.ndarray:
    """Mean near fields of the beams as detected, shape (B, G, G).

    Source beams are sqrt(kappa*n) sum_m f(rho - rho_m) times the beam
    phase; for the two-beam scheme the beamsplitter outputs are returned.
    """
    axis = config.grid_axis()
    w0 = config.mode.waist_w0
    profile = np.zeros((config.n_cells, config.n_cells))
    for pos in config.emitter_positions():
        xx = axis[:, None] - pos[0]
        yy = axis[None, :] - pos[1]
        profile += np.exp(-(xx**2 + yy**2) / w0**2)
    profile /= np.sqrt(np.pi * w0**2 / 2.0)
    amplitude = np.sqrt(config.source.kappa * config.source.mean_photons_n)
    phases = _beam_phases(config.scheme)
    means = amplitude * profile[None, :, :] * phases[:, None, None]
    if config.scheme is DetectionScheme.TWO_BEAM:
        s = 1.0 / np.sqrt(2.0)
        means = np.stack([s * (means[0] + means[1]), s * (means[0] - means[1])])
    return means


def _vacuum_block(config: SimulationConfig, n_t: int, rng) -> np.ndarray:
    """White complex vacuum with quadrature PSD 1 on every cell, (T, G, G)."""
    g = config.n_cells
    scale = 1.0 / np.sqrt(config.grid_pitch**2 * config.dt)
    z = rng.standard_normal((n_t, g, g, 2), dtype=config.float_dtype)
    vac = z.view(config.complex_dtype)[..., 0]
    vac *= config.float_dtype(scale)
    return vac


def _inject_modes(
    config: SimulationConfig,
    vac: np.ndarray,
    series_block: np.ndarray,
    patches: list[_ModePatch],
) -> np.ndarray:
    """Replace the vacuum's emitter-mode components by the emitter series."""
    area = config.float_dtype(config.grid_pitch**2)
    for p, patch in enumerate(patches):
        local = vac[:, patch.sx, patch.sy]
        overlap = np.einsum("tij,ij->t", local, patch.profile) * area
        coeff = (series_block[p].astype(vac.dtype)) - overlap
        local += coeff[:, None, None] * patch.profile
    return vac


def _checkerboard(g: int, dtype) -> np.ndarray:
    sign = 1 - 2 * ((np.arange(g)[:, None] + np.arange(g)[None, :]) % 2)
    return sign.astype(dtype)


def _lens_arrays(fields: np.ndarray, geometry: OpticalGeometry, pitch: float) -> np.ndarray:
    """Far-field amplitudes of (..., G, G) near-field arrays (centered layout).

    S_F(rho_d) = -(2 pi i/(lambda f)) * S_N(Q) with Q conjugate to the grid.
    Centered-to-centered DFT via checkerboard phase factors (even G), which
    is unitary up to the physical scaling: sum |S|^2 * cell_area is
    preserved exactly.
    """
    g = fields.shape[-1]
    real_dtype = np.float32 if fields.dtype == np.complex64 else np.float64
    chk = _checkerboard(g, real_dtype)
    c = geometry.frequency_per_length
    out = np.fft.fft2(fields * chk, axes=(-2, -1))
    out *= chk
    out *= np.asarray(-1j * c * pitch**2 / (2.0 * np.pi), dtype=out.dtype)
    return out


def trajectory_rng(config: SimulationConfig, trajectory: int) -> np.random.Generator:
    """Deterministic per-trajectory generator derived from (seed, index)."""
    children = np.random.SeedSequence(config.seed).spawn(config.trajectories)
    return np.random.Generator(np.random.PCG64(children[trajectory]))


def build_near_field(config: SimulationConfig, trajectory: int = 0) -> FieldEnsemble:
    """Materialize one trajectory's near-field record for all beams.

    For the two-beam scheme the returned beams are the beamsplitter outputs
    that actually hit the two lenses.
    """
    rng = trajectory_rng(config, trajectory)
    series = _emitter_series(config, rng)
    patches = _mode_patches(config)
    n_t = config.n_steps
    g = config.n_cells
    fluct = np.empty((config.n_beams, n_t, g, g), dtype=config.complex_dtype)
    for b in range(config.n_beams):
        vac = _vacuum_block(config, n_t, rng)
        fluct[b] = _inject_modes(config, vac, series[b], patches)
    axis = config.grid_axis()
    return FieldEnsemble(
        x_axis=axis,
        y_axis=axis.copy(),
        t_axis=np.arange(n_t) * config.dt,
        mean_fields=_mean_fields(config),
        fluctuations=fluct,
        cell_area=config.grid_pitch**2,
    )


def lens_transform(ensemble: FieldEnsemble, config: SimulationConfig) -> FieldEnsemble:
    """Propagate an ensemble to the detection plane through the lens.

    Checks discrete Parseval on the mean field (1e-10 relative) and warns if
    mean-field energy within 3 cells of the grid edge exceeds 1e-6 of the
    total (far-field aliasing risk).
    """
    edge = np.ones(ensemble.mean_fields.shape[-2:], dtype=bool)
    edge[3:-3, 3:-3] = False
    energy = np.abs(ensemble.mean_fields) ** 2
    total = energy.sum()
    if total > 0 and energy[:, edge].sum() > _EDGE_ENERGY_TOL * total:
        warnings.warn(
            "mean-field energy near the grid edge exceeds 1e-6 of the total; "
            "far-field samples may alias",
            stacklevel=2,
        )

    far_means = _lens_arrays(ensemble.mean_fields, config.geometry, config.grid_pitch)
    far_flucts = _lens_arrays(ensemble.fluctuations, config.geometry, config.grid_pitch)

    det_axis = config.detector_axis()
    det_area = (det_axis[1] - det_axis[0]) ** 2 if det_axis.size > 1 else 1.0
    near_flux = (np.abs(ensemble.mean_fields) ** 2).sum() * ensemble.cell_area
    far_flux = (np.abs(far_means) ** 2).sum() * det_area
    if near_flux > 0 and abs(far_flux - near_flux) > 1e-10 * near_flux:
        raise AssertionError(
            f"lens transform broke Parseval: {near_flux!r} -> {far_flux!r}"
        )

    return FieldEnsemble(
        x_axis=det_axis,
        y_axis=det_axis.copy(),
        t_axis=ensemble.t_axis,
        mean_fields=far_means,
        fluctuations=far_flucts,
        cell_area=det_area,
    )


def _mirror(a: np.ndarray) -> np.ndarray:
    """Point reflection rho -> -rho on the centered even grid (last two axes)."""
    g = a.shape[-1]
    idx = (g - np.arange(g)) % g
    return a[..., idx, :][..., :, idx]


def _detect_one(mean_far: np.ndarray, fluct_far: np.ndarray) -> np.ndarray:
    """Linearized photocurrent 2 Re[<S_F>* dS_F] on the detector grid."""
    real_dtype = np.float32 if fluct_far.dtype == np.complex64 else np.float64
    mr = np.ascontiguousarray(mean_far.real, dtype=real_dtype)
    mi = np.ascontiguousarray(mean_far.imag, dtype=real_dtype)
    cur = fluct_far.real * mr
    cur += fluct_far.imag * mi
    cur *= 2.0
    return cur


def detect_and_combine(
    far: FieldEnsemble, scheme: DetectionScheme, branch: SignBranch
) -> np.ndarray:
    """Combined photocurrent fluctuations i_+- on the detector grid, (M, G, G).

    Two-beam: i1(rho) +- i2(-rho) from the two detectors; single-beam:
    i(rho) +- i(-rho) from symmetric points of the one detector plane.
    """
    sign = 1.0 if branch is SignBranch.PLUS else -1.0
    first = _detect_one(far.mean_fields[0], far.fluctuations[0])
    if scheme is DetectionScheme.TWO_BEAM:
        second = _detect_one(far.mean_fields[1], far.fluctuations[1])
        return first + sign * _mirror(second)
    return first + sign * _mirror(first)


def snap_probe_points(
    config: SimulationConfig, q_points, omega_points, segment_steps: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-grid assignment of requested probe frequencies.

    Returns the snapped q 2-vectors and omegas actually measurable with this
    configuration; comparisons against closed forms must use these values.
    """
    det_axis = config.detector_axis()
    g = det_axis.size
    q_axis = 2.0 * np.pi * np.fft.fftshift(np.fft.fftfreq(g, det_axis[1] - det_axis[0]))
    q_points = np.atleast_2d(np.asarray(q_points, dtype=float))
    snapped_q = np.empty_like(q_points)
    for col in range(2):
        idx = np.argmin(np.abs(q_points[:, col, None] - q_axis[None, :]), axis=1)
        snapped_q[:, col] = q_axis[idx]
    n_seg = segment_steps or config.n_steps
    omega_bins = 2.0 * np.pi * np.fft.rfftfreq(n_seg, config.dt)
    omega_points = np.atleast_1d(np.asarray(omega_points, dtype=float))
    idx = np.argmin(np.abs(np.abs(omega_points)[:, None] - omega_bins[None, :]), axis=1)
    return snapped_q, omega_bins[idx]


class _ProbeTransform:
    """Spatial transform i(q, t) = sum_cells i(rho, t) e^{i q.rho} * area.

    Evaluated separably: contract the y axis against the unique q_y phase
    vectors, then the x axis per probe.  Detector currents are real, so the
    two contractions run in real arithmetic.
    """

    def __init__(self, det_axis: np.ndarray, snapped_q: np.ndarray, dtype):
        self.area = (det_axis[1] - det_axis[0]) ** 2
        uniq_qy, self.y_index = np.unique(snapped_q[:, 1], return_inverse=True)
        phase_y = np.exp(1j * np.outer(det_axis, uniq_qy))
        self.y_re = np.ascontiguousarray(phase_y.real, dtype=dtype)
        self.y_im = np.ascontiguousarray(phase_y.imag, dtype=dtype)
        phase_x = np.exp(1j * np.outer(det_axis, snapped_q[:, 0]))  # (G, P)
        self.x_re = np.ascontiguousarray(phase_x.real, dtype=dtype)
        self.x_im = np.ascontiguousarray(phase_x.imag, dtype=dtype)

    def __call__(self, currents: np.ndarray) -> np.ndarray:
        """(T, G, G) real currents -> (T, P) complex transform values."""
        py_re = currents @ self.y_re  # (T, G, U)
        py_im = currents @ self.y_im
        pre = py_re[:, :, self.y_index]  # (T, G, P)
        pim = py_im[:, :, self.y_index]
        real = np.einsum("tgp,gp->tp", pre, self.x_re) - np.einsum(
            "tgp,gp->tp", pim, self.x_im
        )
        imag = np.einsum("tgp,gp->tp", pre, self.x_im) + np.einsum(
            "tgp,gp->tp", pim, self.x_re
        )
        return (real + 1j * imag).astype(np.complex128) * self.area


def _periodogram_samples(
    transformed: np.ndarray, snapped_omega: np.ndarray, dt: float, segment_steps: int
) -> np.ndarray:
    """Per-segment spectral samples, shape (S, P, W).

    Segments are consecutive non-overlapping blocks; within each, the
    temporal periodogram is averaged over the +-Omega bins (the spectra are
    even in Omega).
    """
    n_t, n_probes = transformed.shape
    n_seg = n_t // segment_steps
    if n_seg < 1:
        raise ValueError("record shorter than one segment")
    used = transformed[: n_seg * segment_steps].reshape(n_seg, segment_steps, n_probes)
    spec = np.fft.fft(used, axis=1)
    power = (dt / segment_steps) * np.abs(spec) ** 2  # (S, M_seg, P)

    omega_all = 2.0 * np.pi * np.fft.fftfreq(segment_steps, dt)
    samples = np.empty((n_seg, n_probes, snapped_omega.size))
    for w, omega in enumerate(snapped_omega):
        k_pos = int(np.argmin(np.abs(omega_all - omega)))
        k_neg = (-k_pos) % segment_steps
        samples[:, :, w] = 0.5 * (power[:, k_pos, :] + power[:, k_neg, :])
    return samples


def estimate_spectrum(
    currents: np.ndarray,
    config: SimulationConfig,
    q_points,
    omega_points,
    segment_steps: int | None = None,
    min_segments: int = 50,
) -> SpectrumResult:
    """Spectral estimate with per-point standard errors from one record.

    Requires enough duration for `min_segments` averaging segments at the
    requested resolution; each segment contributes one periodogram sample
    per probe point.
    """
    seg = segment_steps or config.n_steps
    n_seg = currents.shape[0] // seg
    if n_seg < min_segments:
        raise ValueError(
            f"insufficient duration: {n_seg} segments available, "
            f"{min_segments} required"
        )
    snapped_q, snapped_omega = snap_probe_points(config, q_points, omega_points, seg)
    transform = _ProbeTransform(
        config.detector_axis(), snapped_q, currents.dtype.type
    )
    samples = _periodogram_samples(transform(currents), snapped_omega, config.dt, seg)
    return _result_from_samples(config, snapped_q, snapped_omega, samples)


def _result_from_samples(
    config: SimulationConfig,
    snapped_q: np.ndarray,
    snapped_omega: np.ndarray,
    samples: np.ndarray,
) -> SpectrumResult:
    n_pix = config.emitter_positions().shape[0]
    calibration = 1.0 / (_FLOOR_OVER_SHOT * n_pix)
    values = samples.mean(axis=0) * calibration
    stderr = samples.std(axis=0, ddof=1) / np.sqrt(samples.shape[0]) * calibration
    level = shot_level(config.source)
    return SpectrumResult(
        q_grid=snapped_q,
        omega_grid=snapped_omega,
        values=values,
        shot_normalized=values / level,
        stderr=stderr,
        meta={
            "estimator": "monte-carlo",
            "segments": int(samples.shape[0]),
            "trajectories": config.trajectories,
            "seed": config.seed,
            "shot_level": level,
            "scheme": config.scheme.value,
            "branch": config.branch.value,
            "kind": config.source.kind.value,
            "squeezing_enabled": config.squeezing_enabled,
        },
    )


def _trajectory_samples(args) -> np.ndarray:
    """One trajectory's periodogram samples; module-level for multiprocessing."""
    config, trajectory, snapped_q, snapped_omega, segment_steps, chunk_steps = args
    rng = trajectory_rng(config, trajectory)
    series = _emitter_series(config, rng)
    patches = _mode_patches(config)
    det_axis = config.detector_axis()
    far_means = _lens_arrays(_mean_fields(config), config.geometry, config.grid_pitch)
    transform = _ProbeTransform(det_axis, snapped_q, config.float_dtype)
    sign = 1.0 if config.branch is SignBranch.PLUS else -1.0

    n_t = config.n_steps
    transformed = np.empty((n_t, snapped_q.shape[0]), dtype=np.complex128)
    for lo in range(0, n_t, chunk_steps):
        hi = min(n_t, lo + chunk_steps)
        combined = None
        for b in range(config.n_beams):
            vac = _vacuum_block(config, hi - lo, rng)
            _inject_modes(config, vac, series[b, :, lo:hi], patches)
            far = _lens_arrays(vac, config.geometry, config.grid_pitch)
            current = _detect_one(far_means[b], far)
            if b == 0:
                combined = current
            else:
                combined += sign * _mirror(current)
        if config.n_beams == 1:
            combined = combined + sign * _mirror(combined)
        transformed[lo:hi] = transform(combined)
    return _periodogram_samples(transformed, snapped_omega, config.dt, segment_steps)


def run_oracle(
    config: SimulationConfig,
    q_points,
    omega_points,
    workers: int = 1,
    segment_steps: int | None = None,
    min_segments: int = 50,
    chunk_steps: int = 64,
) -> SpectrumResult:
    """Full Monte-Carlo estimate pooled over all trajectories.

    Trajectories are independent units of work; their periodogram samples
    are reduced in trajectory order, so results are identical for any worker
    count.  Each trajectory contributes duration/segment_steps segments
    (default: the whole trajectory is one segment).
    """
    seg = segment_steps or config.n_steps
    total_segments = config.trajectories * (config.n_steps // seg)
    if total_segments < min_segments:
        raise ValueError(
            f"insufficient duration: {total_segments} segments available, "
            f"{min_segments} required"
        )
    snapped_q, snapped_omega = snap_probe_points(config, q_points, omega_points, seg)
    tasks = [
        (config, t, snapped_q, snapped_omega, seg, chunk_steps)
        for t in range(config.trajectories)
    ]
    if workers <= 1:
        results = [_trajectory_samples(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trajectory_samples, tasks, chunksize=1))
    samples = np.concatenate(results, axis=0)
    return _result_from_samples(config, snapped_q, snapped_omega, samples)
