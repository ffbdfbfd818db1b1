import numpy as np
import pytest

from pmnoise import (
    DetectionScheme,
    GaussianMode,
    OpticalGeometry,
    PixelLattice,
    SignBranch,
    SourceKind,
    SourceParams,
    SpectrumQuery,
    analytic_spectrum,
)
from pmnoise.oracle import (
    FieldEnsemble,
    SimulationConfig,
    build_near_field,
    detect_and_combine,
    estimate_spectrum,
    lens_transform,
    run_oracle,
    synthesize_quadrature_series,
    trajectory_rng,
    _emitter_series,
    _mirror,
)

GEOM = OpticalGeometry(wavelength=2.0 * np.pi, focal_length=1.0, waist_w0=1.0)
MODE = GaussianMode(1.0)
SPL = SourceParams(SourceKind.SPL, kappa=1.0, mean_photons_n=1.0)


def small_config(**overrides):
    defaults = dict(
        source=SPL,
        mode=MODE,
        geometry=GEOM,
        scheme=DetectionScheme.TWO_BEAM,
        branch=SignBranch.PLUS,
        lattice=None,
        grid_extent=8.0,
        grid_pitch=0.25,
        duration=25.6,
        dt=0.05,
        trajectories=50,
        seed=123,
    )
    defaults.update(overrides)
    return SimulationConfig(**defaults)


def test_config_invariants_enforced():
    with pytest.raises(ValueError, match="pitch"):
        small_config(grid_pitch=0.3)
    with pytest.raises(ValueError, match="extent"):
        small_config(grid_extent=4.0)
    with pytest.raises(ValueError, match="dt"):
        small_config(dt=0.06)
    with pytest.raises(ValueError, match="total record"):
        small_config(trajectories=1, duration=25.6)
    with pytest.raises(ValueError, match="single-beam"):
        small_config(scheme=DetectionScheme.SINGLE_BEAM)


def test_synthesize_flat_and_zero_psd():
    rng = np.random.default_rng(0)
    zero = synthesize_quadrature_series(lambda w: np.zeros_like(w), 51.2, 0.05, rng)
    assert np.all(zero == 0.0)
    samples = []
    for _ in range(60):
        x = synthesize_quadrature_series(lambda w: np.ones_like(w), 51.2, 0.05, rng)
        samples.append(np.var(x))
    mean_var = np.mean(samples)
    # flat two-sided PSD 1 over the Nyquist band integrates to 1/dt
    expected = 1.0 / 0.05
    sem = np.std(samples) / np.sqrt(len(samples))
    assert abs(mean_var - expected) < 4.0 * sem


def test_synthesize_negative_psd_rejected():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError, match="non-negative"):
        synthesize_quadrature_series(lambda w: -np.ones_like(w), 10.0, 0.05, rng)


def test_synthesized_periodogram_matches_target():
    # averaged periodograms of the squeezed-quadrature series reproduce
    # 1 - kappa^2/(kappa^2 + W^2) within 5% rms over [0, 5 kappa]
    rng = np.random.default_rng(42)
    dt, duration, reps = 0.05, 51.2, 700
    n = int(duration / dt)
    psd = lambda w: 1.0 - 1.0 / (1.0 + np.asarray(w) ** 2)
    acc = np.zeros(n)
    for _ in range(reps):
        x = synthesize_quadrature_series(psd, duration, dt, rng)
        acc += dt * np.abs(np.fft.fft(x)) ** 2 / n
    acc /= reps
    omegas = 2.0 * np.pi * np.fft.fftfreq(n, dt)
    band = (omegas >= 0.3) & (omegas <= 5.0)
    rel = acc[band] / psd(omegas[band]) - 1.0
    assert np.sqrt(np.mean(rel**2)) < 0.05
    # exact zero at the zero-frequency bin of the squeezed quadrature
    assert acc[0] == 0.0


def test_emitter_series_pixel_independence():
    lat = PixelLattice(pitch_l=10.0, side_count_N=3)
    cfg = small_config(
        lattice=lat, grid_extent=28.0, duration=204.8, trajectories=2, seed=5
    )
    series = _emitter_series(cfg, trajectory_rng(cfg, 0))
    assert series.shape == (2, 9, cfg.n_steps)
    x0 = series[0, 0].real
    x1 = series[0, 1].real
    r = np.corrcoef(x0, x1)[0, 1]
    assert abs(r) < 4.0 / np.sqrt(x0.size)


def test_build_near_field_mean_profile():
    cfg = small_config(trajectories=16, duration=25.6)
    ens = build_near_field(cfg, trajectory=0)
    xx = ens.x_axis[:, None]
    yy = ens.y_axis[None, :]
    expected = np.exp(-(xx**2 + yy**2)) / np.sqrt(np.pi / 2.0)
    assert np.allclose(ens.mean_fields[0].real, expected, rtol=0, atol=1e-12)
    # second beam carries the pi/2 phase
    assert np.allclose(ens.mean_fields[1].imag, expected, atol=1e-12)
    assert np.allclose(ens.mean_fields[1].real, 0.0, atol=1e-12)


def test_build_near_field_deterministic():
    cfg = small_config(trajectories=16, duration=25.6)
    a = build_near_field(cfg, trajectory=3)
    b = build_near_field(cfg, trajectory=3)
    assert np.array_equal(a.fluctuations, b.fluctuations)
    c = build_near_field(cfg, trajectory=4)
    assert not np.array_equal(a.fluctuations, c.fluctuations)


def test_lens_transform_gaussian_and_parseval():
    cfg = small_config(trajectories=16, duration=25.6, single_precision=False)
    ens = build_near_field(cfg, trajectory=0)
    far = lens_transform(ens, cfg)
    # Gaussian in -> Gaussian out, far-field 1/e intensity radius sqrt(2)*w0t
    intensity = np.abs(far.mean_fields[0]) ** 2
    center = np.unravel_index(np.argmax(intensity), intensity.shape)
    assert far.x_axis[center[0]] == 0.0 and far.y_axis[center[1]] == 0.0
    profile = intensity[:, center[1]] / intensity[center]
    expected = np.exp(-far.x_axis**2)  # |f_Q|^2 with w0 = w0t = 1
    assert np.allclose(profile, expected, atol=1e-6)
    near_flux = (np.abs(ens.fluctuations) ** 2).sum() * ens.cell_area
    far_flux = (np.abs(far.fluctuations) ** 2).sum() * far.cell_area
    assert abs(far_flux - near_flux) < 1e-10 * near_flux


def test_lens_transform_two_emitter_fringes():
    # two coherent emitters -> cos^2 fringe with period 2 pi / (C * separation)
    cfg = small_config(trajectories=16, duration=25.6)
    axis = cfg.grid_axis()
    sep = 2.0
    xx, yy = axis[:, None], axis[None, :]
    mean = np.exp(-((xx - sep / 2.0) ** 2 + yy**2)) + np.exp(
        -((xx + sep / 2.0) ** 2 + yy**2)
    )
    ens = FieldEnsemble(
        x_axis=axis,
        y_axis=axis.copy(),
        t_axis=np.zeros(1),
        mean_fields=mean[None].astype(complex),
        fluctuations=np.zeros((1, 1) + mean.shape, dtype=complex),
        cell_area=cfg.grid_pitch**2,
    )
    far = lens_transform(ens, cfg)
    cut = np.abs(far.mean_fields[0][:, far.y_axis.size // 2]) ** 2
    minima = np.where((cut[1:-1] < cut[:-2]) & (cut[1:-1] < cut[2:]))[0] + 1
    dark = minima[cut[minima] < 1e-6 * cut.max()]
    dark = dark[np.abs(far.x_axis[dark]) < 5.5]  # stay above the float floor
    spacing = np.diff(far.x_axis[dark])
    # Q-plane fringe period 2 pi / sep maps to detector spacing (2 pi / sep)/C
    expected = (2.0 * np.pi / sep) / GEOM.frequency_per_length
    assert np.allclose(spacing, expected, rtol=0.02)


def test_lens_transform_edge_energy_warns():
    cfg = small_config(trajectories=16, duration=25.6)
    axis = cfg.grid_axis()
    xx, yy = axis[:, None], axis[None, :]
    mean = np.exp(-((xx - 3.6) ** 2 + yy**2))  # emitter hugging the grid edge
    ens = FieldEnsemble(
        x_axis=axis,
        y_axis=axis.copy(),
        t_axis=np.zeros(1),
        mean_fields=mean[None].astype(complex),
        fluctuations=np.zeros((1, 1) + mean.shape, dtype=complex),
        cell_area=cfg.grid_pitch**2,
    )
    with pytest.warns(UserWarning, match="alias"):
        lens_transform(ens, cfg)


def test_detect_and_combine_parity():
    cfg = small_config(trajectories=16, duration=25.6)
    ens = build_near_field(cfg, trajectory=0)
    far = lens_transform(ens, cfg)
    zero = FieldEnsemble(
        x_axis=far.x_axis,
        y_axis=far.y_axis,
        t_axis=far.t_axis,
        mean_fields=far.mean_fields,
        fluctuations=np.zeros_like(far.fluctuations),
        cell_area=far.cell_area,
    )
    assert np.all(detect_and_combine(zero, cfg.scheme, cfg.branch) == 0.0)

    # single beam, odd fluctuation pattern: the summed current vanishes
    lat1 = PixelLattice(pitch_l=10.0, side_count_N=1)
    cfg1 = small_config(
        scheme=DetectionScheme.SINGLE_BEAM, lattice=lat1, trajectories=16
    )
    axis = cfg1.detector_axis()
    odd = (axis[:, None] + 0.0 * axis[None, :]).astype(complex)
    odd_mirror_free = odd - _mirror(odd)  # exactly odd on the grid
    far1 = FieldEnsemble(
        x_axis=axis,
        y_axis=axis.copy(),
        t_axis=np.zeros(1),
        mean_fields=np.exp(-(axis[:, None] ** 2 + axis[None, :] ** 2)).astype(complex)[
            None
        ],
        fluctuations=odd_mirror_free[None, None],
        cell_area=(axis[1] - axis[0]) ** 2,
    )
    plus = detect_and_combine(far1, DetectionScheme.SINGLE_BEAM, SignBranch.PLUS)
    assert np.allclose(plus, 0.0, atol=1e-12)


def test_estimate_spectrum_white_current_level():
    cfg = small_config(trajectories=60, duration=25.6)
    rng = np.random.default_rng(9)
    g = cfg.n_cells
    var = 2.5
    currents = rng.normal(0.0, np.sqrt(var), size=(cfg.n_steps, g, g))
    det_axis = cfg.detector_axis()
    area = (det_axis[1] - det_axis[0]) ** 2
    q = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]])
    res = estimate_spectrum(
        currents, cfg, q, np.array([0.0, 1.0]), segment_steps=64, min_segments=8
    )
    # white current: two-sided PSD = area^2 * G^2 * var * dt, then 1/(2 N^2)
    expected = area**2 * g**2 * var * cfg.dt / 2.0
    pulls = np.abs(res.values - expected) / res.stderr
    assert np.max(pulls) < 4.0


def test_estimate_spectrum_insufficient_duration():
    cfg = small_config(trajectories=60, duration=25.6)
    currents = np.zeros((cfg.n_steps, cfg.n_cells, cfg.n_cells))
    with pytest.raises(ValueError, match="insufficient duration"):
        estimate_spectrum(currents, cfg, [[0.0, 0.0]], [0.0])


def test_full_pipeline_perfect_squeezing_point():
    cfg = small_config(trajectories=50, duration=25.6, seed=77)
    res = run_oracle(cfg, [[0.0, 0.0]], [0.0], workers=1)
    # SPL summed current at (q=0, Omega=0): complete noise suppression
    assert abs(res.values[0, 0]) < 1e-9
    assert res.stderr[0, 0] < 1e-9


def test_full_pipeline_matches_analytic_spl_minus():
    cfg = small_config(branch=SignBranch.MINUS, trajectories=60, seed=31)
    qx = np.array([0.0, 0.5, 1.0, 2.0])
    q = np.stack([qx, np.zeros_like(qx)], axis=1)
    omegas = np.array([0.0, 0.5, 1.5])
    res = run_oracle(cfg, q, omegas, workers=1)
    query = SpectrumQuery(
        source=cfg.source,
        mode=cfg.mode,
        geometry=cfg.geometry,
        scheme=cfg.scheme,
        branch=cfg.branch,
        q_grid=res.q_grid,
        omega_grid=res.omega_grid,
    )
    ana = analytic_spectrum(query).values
    pulls = np.abs(res.values - ana) / res.stderr
    assert np.max(pulls) < 4.5


def test_oracle_linearity_in_photon_number():
    # same seed: scaling n by 4 scales every sample by exactly 4
    base = small_config(trajectories=50, seed=13)
    bright = small_config(
        source=SourceParams(SourceKind.SPL, kappa=1.0, mean_photons_n=4.0),
        trajectories=50,
        seed=13,
    )
    q = [[0.0, 0.0], [1.0, 0.0]]
    omegas = [0.0, 1.0]
    a = run_oracle(base, q, omegas, workers=1)
    b = run_oracle(bright, q, omegas, workers=1)
    assert np.allclose(b.values, 4.0 * a.values, rtol=1e-5)
    assert np.allclose(b.shot_normalized, a.shot_normalized, rtol=1e-5)


def test_run_oracle_deterministic_across_workers():
    cfg = small_config(trajectories=16, duration=25.6, seed=99)
    q = [[0.0, 0.0], [1.5, 0.0]]
    a = run_oracle(cfg, q, [0.0, 0.7], workers=1, min_segments=16)
    b = run_oracle(cfg, q, [0.0, 0.7], workers=2, min_segments=16)
    assert np.array_equal(a.values, b.values)
    assert np.array_equal(a.stderr, b.stderr)
