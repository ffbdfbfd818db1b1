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
    shot_level,
)

GEOM = OpticalGeometry(wavelength=2.0 * np.pi, focal_length=1.0, waist_w0=1.0)
MODE = GaussianMode(1.0)
SPL = SourceParams(SourceKind.SPL, kappa=1.0, mean_photons_n=1.0)
DOPO = SourceParams(SourceKind.DOPO, kappa=1.0, mean_photons_n=1.0, mu_th=2.0)


def make_query(source, scheme, branch, lattice=None, q=None, omega=None):
    return SpectrumQuery(
        source=source,
        mode=MODE,
        geometry=GEOM,
        scheme=scheme,
        branch=branch,
        lattice=lattice,
        q_grid=q if q is not None else [[0.0, 0.0]],
        omega_grid=omega if omega is not None else [0.0],
    )


def test_shot_level():
    assert shot_level(SPL) == 4.0
    assert shot_level(SourceParams(SourceKind.SPL, 1.0, 0.0)) == 0.0
    assert shot_level(SourceParams(SourceKind.SPL, 2.0, 3.0)) == 24.0


@pytest.mark.parametrize(
    "source,branch,expected",
    [
        (SPL, SignBranch.PLUS, 0.0),
        (SPL, SignBranch.MINUS, 9.0),
        (DOPO, SignBranch.MINUS, 0.75),
        (DOPO, SignBranch.PLUS, 2.0),
    ],
)
def test_two_beam_pointlike_exact_points(source, branch, expected):
    res = analytic_spectrum(make_query(source, DetectionScheme.TWO_BEAM, branch))
    assert res.shot_normalized[0, 0] == pytest.approx(expected, abs=1e-12)
    assert res.values[0, 0] == pytest.approx(4.0 * expected, abs=1e-12)


def test_n1_lattice_reduces_to_pointlike():
    lat1 = PixelLattice(pitch_l=10.0, side_count_N=1)
    qx = np.linspace(-3.0, 3.0, 31)
    q = np.stack([qx, 0.3 * qx], axis=1)
    omega = np.linspace(0.0, 5.0, 11)
    for source in (SPL, DOPO):
        for branch in SignBranch:
            point = analytic_spectrum(
                make_query(source, DetectionScheme.TWO_BEAM, branch, None, q, omega)
            )
            pix = analytic_spectrum(
                make_query(source, DetectionScheme.TWO_BEAM, branch, lat1, q, omega)
            )
            assert np.allclose(
                point.shot_normalized, pix.shot_normalized, rtol=1e-13, atol=1e-13
            )


def test_single_beam_n1_reduction():
    lat1 = PixelLattice(pitch_l=10.0, side_count_N=1)
    qx = np.linspace(-2.0, 2.0, 21)
    q = np.stack([qx, np.zeros_like(qx)], axis=1)
    omega = np.array([0.0, 1.0])
    plus = analytic_spectrum(
        make_query(SPL, DetectionScheme.SINGLE_BEAM, SignBranch.PLUS, lat1, q, omega)
    )
    point = analytic_spectrum(
        make_query(SPL, DetectionScheme.TWO_BEAM, SignBranch.PLUS, None, q, omega)
    )
    assert np.allclose(plus.shot_normalized, point.shot_normalized, rtol=1e-13)
    minus = analytic_spectrum(
        make_query(SPL, DetectionScheme.SINGLE_BEAM, SignBranch.MINUS, lat1, q, omega)
    )
    assert np.all(minus.shot_normalized == 1.0)  # zero excess envelope


def test_high_frequency_shot_limit():
    lat = PixelLattice(pitch_l=10.0, side_count_N=3)
    q = np.array([[0.0, 0.0], [5.0, 0.0], [10.0, 0.0]])
    omega = np.array([100.0])
    for source in (SPL, DOPO):
        for scheme in DetectionScheme:
            for branch in SignBranch:
                res = analytic_spectrum(make_query(source, scheme, branch, lat, q, omega))
                assert np.max(np.abs(res.shot_normalized - 1.0)) < 1e-3


def test_normalized_non_negative_with_large_overlapping_lattice():
    # pitch/waist = 5 makes the envelope overshoot 1 by ~N^2 e^{-25}; the
    # squeezed point must clamp to exactly zero rather than go negative
    lat = PixelLattice(pitch_l=5.0, side_count_N=99)
    q = np.array([[0.0, 0.0], [2.5, 0.0], [5.0, 0.0]])
    res = analytic_spectrum(
        make_query(SPL, DetectionScheme.TWO_BEAM, SignBranch.PLUS, lat, q, [0.0])
    )
    assert np.all(res.shot_normalized >= 0.0)
    assert res.shot_normalized[0, 0] == 0.0


def test_query_validation():
    with pytest.raises(ValueError, match="single-beam"):
        make_query(SPL, DetectionScheme.SINGLE_BEAM, SignBranch.PLUS, None)
    with pytest.raises(ValueError, match="waist"):
        SpectrumQuery(
            source=SPL,
            mode=GaussianMode(2.0),
            geometry=GEOM,
            scheme=DetectionScheme.TWO_BEAM,
            branch=SignBranch.PLUS,
            q_grid=[[0.0, 0.0]],
            omega_grid=[0.0],
        )
    with pytest.raises(ValueError, match="pitch/waist"):
        make_query(
            SPL,
            DetectionScheme.TWO_BEAM,
            SignBranch.PLUS,
            PixelLattice(pitch_l=2.0, side_count_N=3),
        )


def test_result_carries_absolute_and_normalized():
    strong = SourceParams(SourceKind.SPL, kappa=3.0, mean_photons_n=5.0)
    res = analytic_spectrum(
        make_query(strong, DetectionScheme.TWO_BEAM, SignBranch.MINUS)
    )
    assert res.meta["shot_level"] == 60.0
    assert np.allclose(res.values, 60.0 * res.shot_normalized)
    # SPL minus at the origin: 1 + 2 kappa^2/(kappa^2/4) = 9 independent of kappa
    assert res.shot_normalized[0, 0] == pytest.approx(9.0, abs=1e-12)
