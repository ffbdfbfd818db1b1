import numpy as np
import pytest

from pmnoise import (
    EnvelopeKind,
    GaussianMode,
    OpticalGeometry,
    PixelLattice,
    envelope,
    envelope_direct,
    lattice_factor,
    lattice_factor_direct,
    mode_fourier,
)

# dimensionless preset: far-field spot size w0_tilde = 1
GEOM = OpticalGeometry(wavelength=2.0 * np.pi, focal_length=1.0, waist_w0=1.0)
MODE = GaussianMode(1.0)
PITCH = 10.0  # emitter pitch in waists; hole spacing d = 10


def test_mode_normalization():
    x = np.linspace(-8.0, 8.0, 2001)
    grid = np.stack(np.meshgrid(x, x, indexing="ij"), axis=-1)
    amp = MODE.amplitude(grid)
    total = np.trapezoid(np.trapezoid(amp**2, x, axis=1), x)
    assert total == pytest.approx(1.0, rel=1e-9)


def test_mode_fourier_values():
    peak = mode_fourier(MODE, [0.0, 0.0])
    assert peak == pytest.approx(np.sqrt(1.0 / (2.0 * np.pi)), rel=1e-14)
    ratio = mode_fourier(MODE, [2.0, 0.0]) / peak
    assert ratio == pytest.approx(np.exp(-1.0), rel=1e-14)


def test_mode_fourier_against_quadrature():
    x = np.linspace(-8.0, 8.0, 4001)
    profile = np.exp(-(x**2))
    norm = 1.0 / np.sqrt(np.pi / 2.0)
    for qv in ([0.7, -1.3], [3.0, 4.2], [0.0, 5.5]):
        ints = [np.trapezoid(profile * np.exp(-1j * qc * x), x) for qc in qv]
        numeric = norm * ints[0] * ints[1] / (2.0 * np.pi)
        assert mode_fourier(MODE, qv) == pytest.approx(numeric.real, rel=1e-6)


def test_lattice_factor_peak_and_worked_values():
    lat = PixelLattice(pitch_l=PITCH, side_count_N=3)
    assert lattice_factor(lat, [0.0, 0.0]) == pytest.approx(9.0, rel=1e-12)
    # Q_x l = pi: sin(3 pi/2)/sin(pi/2) = -1 per x, times 3 from the y axis
    value = lattice_factor(lat, [np.pi / PITCH, 0.0])
    assert value == pytest.approx(-3.0, rel=1e-12)


def test_lattice_factor_grating_lobe_limits():
    for n in (3, 7):
        lat = PixelLattice(pitch_l=PITCH, side_count_N=n)
        lobe = 2.0 * np.pi / PITCH
        assert lattice_factor(lat, [lobe, 0.0]) == pytest.approx(n * n, rel=1e-9)
        assert lattice_factor(lat, [2 * lobe, -3 * lobe]) == pytest.approx(
            n * n, rel=1e-9
        )
        # on an x lobe the x factor is exactly n for any q_y
        rng = np.random.default_rng(1)
        qy = rng.uniform(0.1, 2.0)
        mixed = lattice_factor(lat, [lobe, qy])
        pure = lattice_factor(lat, [0.0, qy])
        assert mixed == pytest.approx(pure, rel=1e-9)


def test_lattice_factor_direct_agreement_and_symmetry():
    rng = np.random.default_rng(7)
    for n in (1, 3, 7):
        lat = PixelLattice(pitch_l=PITCH, side_count_N=n)
        q = rng.uniform(-2.0, 2.0, size=(300, 2))
        closed = lattice_factor(lat, q)
        direct = lattice_factor_direct(lat, q)
        assert np.max(np.abs(closed - direct) / np.maximum(np.abs(direct), 1.0)) < 1e-11
        assert np.allclose(
            lattice_factor_direct(lat, -q), direct, rtol=1e-12, atol=1e-12
        )


def test_lattice_factor_direct_guard():
    lat = PixelLattice(pitch_l=PITCH, side_count_N=203)
    with pytest.raises(ValueError, match="N <= 201"):
        lattice_factor_direct(lat, [0.1, 0.2])


def test_envelope_pointlike():
    q = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, -2.0]])
    values = envelope(EnvelopeKind.SINGLE_POINTLIKE, q, None, GEOM)
    assert values[0] == 1.0
    assert values[1] == pytest.approx(np.exp(-1.0), rel=1e-14)
    assert values[2] == pytest.approx(np.exp(-4.0), rel=1e-14)


def test_two_beam_envelope_origin_excess():
    # at pitch/waist = 5 the cross-emitter terms are resolvable in double
    # precision: 0 < env(0) - 1 < N^2 exp(-(d w0t)^2)
    lat = PixelLattice(pitch_l=5.0, side_count_N=3)
    value = envelope(EnvelopeKind.TWO_BEAM_PIXELLISED, [[0.0, 0.0]], lat, GEOM)[0]
    bound = 9.0 * np.exp(-25.0)
    assert 0.0 < value - 1.0 < bound


def test_single_beam_minus_origin_cancellation():
    lat = PixelLattice(pitch_l=PITCH, side_count_N=3)
    value = envelope(
        EnvelopeKind.SINGLE_BEAM_PIXELLISED_MINUS, [[0.0, 0.0]], lat, GEOM
    )[0]
    # diagonal pairs cancel exactly; remainder is O(exp(-(l/w0)^2/4))
    assert 0.0 <= value < 10.0 * 9.0 * np.exp(-25.0)


def test_single_beam_plus_half_frequency_half_height():
    lat = PixelLattice(pitch_l=PITCH, side_count_N=99)
    half = PITCH / 2.0  # d/2 with w0_tilde = 1
    value = envelope(EnvelopeKind.SINGLE_BEAM_PIXELLISED_PLUS, [[half, 0.0]], lat, GEOM)[0]
    assert value == pytest.approx(98.0 * 99.0 / (2.0 * 99.0**2), rel=1e-9)
    assert value == pytest.approx(0.5, abs=6e-3)


def test_envelopes_match_direct_sums():
    rng = np.random.default_rng(5)
    lat = PixelLattice(pitch_l=PITCH, side_count_N=5)
    q = rng.uniform(-60.0, 60.0, size=(50, 2))
    q[0] = 0.0
    for kind in (
        EnvelopeKind.TWO_BEAM_PIXELLISED,
        EnvelopeKind.SINGLE_BEAM_PIXELLISED_PLUS,
        EnvelopeKind.SINGLE_BEAM_PIXELLISED_MINUS,
    ):
        reduced = envelope(kind, q, lat, GEOM)
        naive = envelope_direct(kind, q, lat, GEOM)
        assert np.max(np.abs(reduced - naive) / np.maximum(np.abs(naive), 1e-250)) < 1e-10


def test_envelopes_even_in_q():
    rng = np.random.default_rng(11)
    lat = PixelLattice(pitch_l=PITCH, side_count_N=7)
    q = rng.uniform(-80.0, 80.0, size=(200, 2))
    for kind in EnvelopeKind:
        plus = envelope(kind, q, lat, GEOM)
        minus = envelope(kind, -q, lat, GEOM)
        assert np.max(np.abs(plus - minus) / np.maximum(np.abs(plus), 1e-250)) < 1e-12


def test_two_beam_envelope_positive_bounded_and_periodic():
    lat = PixelLattice(pitch_l=PITCH, side_count_N=99)
    qx = np.linspace(0.0, 1200.0, 4001)
    q = np.stack([qx, np.zeros_like(qx)], axis=1)
    values = envelope(EnvelopeKind.TWO_BEAM_PIXELLISED, q, lat, GEOM)
    assert np.all(values >= 0.0)
    assert np.all(values[qx <= 1000.0] > 0.0)  # underflows to 0 far outside
    assert np.all(values <= 1.0 + 99.0**2 * np.exp(-100.0))
    # near-periodicity: one pitch step changes the value by <= 2/N of the peak
    near = np.stack([np.linspace(-2.0, 2.0, 41), np.zeros(41)], axis=1)
    shifted = near + np.array([PITCH, 0.0])
    dev = np.abs(
        envelope(EnvelopeKind.TWO_BEAM_PIXELLISED, shifted, lat, GEOM)
        - envelope(EnvelopeKind.TWO_BEAM_PIXELLISED, near, lat, GEOM)
    )
    assert np.max(dev) <= 2.0 / 99.0 + 1e-12


def test_envelopes_decay_between_lobes_and_beyond_range():
    lat = PixelLattice(pitch_l=PITCH, side_count_N=7)
    # midway between comb lines and beyond the comb range D
    points = np.array([[65.0, 0.0], [75.0, 0.0], [100.0, 5.0]])
    bound = np.exp(-((PITCH / 2.0) ** 2))  # e^{-(d w0t / 2)^2}
    for kind in (
        EnvelopeKind.TWO_BEAM_PIXELLISED,
        EnvelopeKind.SINGLE_BEAM_PIXELLISED_PLUS,
    ):
        assert np.all(np.abs(envelope(kind, points, lat, GEOM)) < bound)
