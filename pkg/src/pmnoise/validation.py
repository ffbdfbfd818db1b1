"""Acceptance-criteria suite: every shipped criterion as a callable check.

Each criterion function returns a CriterionRecord with the measured value,
its tolerance and pass/fail; `run_all` executes the full gate and assembles
a stable, schema-versioned report.  The pytest acceptance module and the
CLI `validate` subcommand both run exactly these functions.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .figures import build_figure
from .geometry import OpticalGeometry, PixelLattice, effective_waist, hole_geometry
from .oracle import SimulationConfig, run_oracle
from .sources import (
    Quadrature,
    SignBranch,
    SourceKind,
    SourceParams,
    detection_sign,
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
from .spectra import DetectionScheme, SpectrumQuery, analytic_spectrum, shot_level

DEFAULT_SEED = 20240811

#: dimensionless preset: kappa = n = 1, far-field spot size 1
_GEOM = OpticalGeometry(wavelength=2.0 * np.pi, focal_length=1.0, waist_w0=1.0)
_MODE = GaussianMode(1.0)
_PITCH = 10.0


@dataclass
class CriterionRecord:
    cid: str
    name: str
    passed: bool
    measured: str
    tolerance: str
    runtime_s: float
    details: dict = field(default_factory=dict)


def _record(cid, name, passed, measured, tolerance, t0, details=None) -> CriterionRecord:
    return CriterionRecord(
        cid=cid,
        name=name,
        passed=bool(passed),
        measured=measured,
        tolerance=tolerance,
        runtime_s=round(time.perf_counter() - t0, 3),
        details=details or {},
    )


def _spl() -> SourceParams:
    return SourceParams(SourceKind.SPL, kappa=1.0, mean_photons_n=1.0)


def _dopo(mu_th: float = 2.0) -> SourceParams:
    return SourceParams(SourceKind.DOPO, kappa=1.0, mean_photons_n=1.0, mu_th=mu_th)


def criterion_lattice_factor(seed: int = DEFAULT_SEED) -> CriterionRecord:
    """C1: closed-form lobe factor vs brute-force phasor sum.

    10^4 random Q per side count in {1,3,7,21,99}, deviation scaled by
    max(|direct|, 1); exact value N^2 on lobe centers.  Runtime < 10 s.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_lobe = 0.0
    for n in (1, 3, 7, 21, 99):
        lat = PixelLattice(pitch_l=_PITCH, side_count_N=n)
        q = rng.uniform(-20.0 * np.pi / _PITCH, 20.0 * np.pi / _PITCH, size=(10_000, 2))
        closed = lattice_factor(lat, q)
        direct = lattice_factor_direct(lat, q)
        dev = np.abs(closed - direct) / np.maximum(np.abs(direct), 1.0)
        worst = max(worst, float(dev.max()))
        # lobe centers Q = (2 pi / l) * integers, including mixed with random
        lobes = (2.0 * np.pi / _PITCH) * np.array(
            [[0.0, 0.0], [1.0, 0.0], [2.0, -1.0], [3.0, 3.0]]
        )
        vals = lattice_factor(lat, lobes)
        worst_lobe = max(worst_lobe, float(np.max(np.abs(vals - n**2)) / n**2))
    runtime = time.perf_counter() - t0
    passed = worst <= 1e-9 and worst_lobe <= 1e-9 and runtime < 10.0
    return _record(
        "C1",
        "lattice factor closed form vs brute force",
        passed,
        f"max scaled dev {worst:.3e}; lobe-center dev {worst_lobe:.3e}; {runtime:.2f}s",
        "1e-9 relative; exact N^2 on lobes; < 10 s",
        t0,
    )


def criterion_envelopes(seed: int = DEFAULT_SEED) -> CriterionRecord:
    """C2: multiset-reduced envelopes vs naive pair sums.

    Side counts {3,5,7}, 200 random q each, every pixellised envelope kind;
    deviation relative to the naive value.  Runtime < 30 s.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed + 1)
    worst = 0.0
    kinds = (
        EnvelopeKind.TWO_BEAM_PIXELLISED,
        EnvelopeKind.SINGLE_BEAM_PIXELLISED_PLUS,
        EnvelopeKind.SINGLE_BEAM_PIXELLISED_MINUS,
    )
    for n in (3, 5, 7):
        lat = PixelLattice(pitch_l=_PITCH, side_count_N=n)
        span = 1.5 * _PITCH * n
        q = rng.uniform(-span, span, size=(200, 2))
        q[0] = 0.0  # include the cancellation-critical origin
        for kind in kinds:
            reduced = envelope(kind, q, lat, _GEOM)
            naive = envelope_direct(kind, q, lat, _GEOM)
            dev = np.abs(reduced - naive) / np.maximum(np.abs(naive), 1e-250)
            worst = max(worst, float(dev.max()))
    runtime = time.perf_counter() - t0
    passed = worst <= 1e-10 and runtime < 30.0
    return _record(
        "C2",
        "reduced envelopes vs naive quadruple sums",
        passed,
        f"max relative dev {worst:.3e}; {runtime:.2f}s",
        "1e-10 relative; < 30 s",
        t0,
    )


def criterion_mode_fourier() -> CriterionRecord:
    """C3: Gaussian mode transform vs 2-D numerical quadrature, 1e-6 relative."""
    t0 = time.perf_counter()
    w0 = _MODE.waist_w0
    x = np.linspace(-8.0 * w0, 8.0 * w0, 4001)
    profile_1d = np.exp(-(x**2) / w0**2)
    norm = 1.0 / np.sqrt(np.pi * w0**2 / 2.0)
    worst = 0.0
    for scale in np.linspace(0.0, 6.0, 25):
        for angle in (0.0, 0.3, 1.1):
            qv = (scale / w0) * np.array([np.cos(angle), np.sin(angle)])
            ints = [np.trapezoid(profile_1d * np.exp(-1j * qc * x), x) for qc in qv]
            numeric = norm * ints[0] * ints[1] / (2.0 * np.pi)
            closed = mode_fourier(_MODE, qv)
            dev = abs(numeric - closed) / abs(numeric)
            worst = max(worst, float(dev))
    passed = worst <= 1e-6
    return _record(
        "C3",
        "mode transform vs numerical quadrature",
        passed,
        f"max relative dev {worst:.3e} over |Q| w0 in [0, 6]",
        "1e-6 relative",
        t0,
    )


def _query(source, scheme, branch, lattice, q_grid, omega_grid) -> SpectrumQuery:
    return SpectrumQuery(
        source=source,
        mode=_MODE,
        geometry=_GEOM,
        scheme=scheme,
        branch=branch,
        lattice=lattice,
        q_grid=q_grid,
        omega_grid=omega_grid,
    )


def _all_combinations():
    for source in (_spl(), _dopo()):
        for scheme in DetectionScheme:
            for branch in SignBranch:
                yield source, scheme, branch


def criterion_exact_points(sign_fn=detection_sign) -> CriterionRecord:
    """C4: exact analytic values at 1e-12 and the high-frequency shot limit.

    sign_fn exists so tests can corrupt the sign table and confirm the
    criterion fails loudly.
    """
    t0 = time.perf_counter()
    origin = np.array([[0.0, 0.0]])
    zero = np.array([0.0])
    cases = [
        (_spl(), SignBranch.PLUS, 0.0),
        (_spl(), SignBranch.MINUS, 9.0),
        (_dopo(), SignBranch.MINUS, 0.75),
        (_dopo(), SignBranch.PLUS, 2.0),
    ]
    worst = 0.0
    for source, branch, expected in cases:
        # evaluate through the public path, then re-derive with sign_fn so a
        # corrupted sign table is caught against the frozen expected values
        res = analytic_spectrum(
            _query(source, DetectionScheme.TWO_BEAM, branch, None, origin, zero)
        )
        sign, quad = sign_fn(source, branch)
        rederived = 1.0 + sign * temporal_lorentzian(source, quad, 0.0)
        worst = max(
            worst,
            abs(res.shot_normalized[0, 0] - expected),
            abs(rederived - expected),
        )

    lat = PixelLattice(pitch_l=_PITCH, side_count_N=3)
    tail = np.array([100.0])  # 100 kappa
    d = hole_geometry(lat, _GEOM)["d"]
    q_grid = np.array([[0.0, 0.0], [0.5 * d, 0.0], [d, 0.0]])
    worst_tail = 0.0
    for source, scheme, branch in _all_combinations():
        res = analytic_spectrum(_query(source, scheme, branch, lat, q_grid, tail))
        worst_tail = max(worst_tail, float(np.abs(res.shot_normalized - 1.0).max()))
        if scheme is DetectionScheme.TWO_BEAM:
            res = analytic_spectrum(_query(source, scheme, branch, None, q_grid, tail))
            worst_tail = max(worst_tail, float(np.abs(res.shot_normalized - 1.0).max()))
    passed = worst <= 1e-12 and worst_tail <= 1e-3
    return _record(
        "C4",
        "exact shot-normalized points and high-frequency limit",
        passed,
        f"max point dev {worst:.3e}; max tail dev {worst_tail:.3e}",
        "1e-12 at the four exact points; 1e-3 at Omega = 100 kappa",
        t0,
    )


def _local_minima(values: np.ndarray) -> np.ndarray:
    inner = (values[1:-1] < values[:-2]) & (values[1:-1] <= values[2:])
    return np.where(inner)[0] + 1


def _hole_half_width(qx: np.ndarray, s_norm: np.ndarray, center_idx: int) -> float:
    """1/e half-width of the dip around a minimum, from linear interpolation."""
    depth = 1.0 - s_norm[center_idx]
    target = 1.0 - depth / np.e
    widths = []
    for direction in (-1, 1):
        i = center_idx
        while 0 < i < len(qx) - 1 and s_norm[i] < target:
            i += direction
        lo, hi = sorted((i - direction, i))
        span = s_norm[hi] - s_norm[lo]
        frac = 0.5 if span == 0 else (target - s_norm[lo]) / span
        q_cross = qx[lo] + frac * (qx[hi] - qx[lo])
        widths.append(abs(q_cross - qx[center_idx]))
    return float(np.mean(widths))


def criterion_figures() -> CriterionRecord:
    """C5: structural reproduction of the three reference figures.

    Checks hole count, comb spacing, 1/e half-widths, the half-depth hole
    level of the even/odd comb, and the OPO half-shot floor; the side-count
    99 scans must complete within a minute.
    """
    t0 = time.perf_counter()
    details = {}
    ok = True

    lat7 = PixelLattice(pitch_l=_PITCH, side_count_N=7)
    scales7 = hole_geometry(lat7, _GEOM)
    d, delta_q = scales7["d"], scales7["delta_q"]

    fig3 = {c.label: c for c in build_figure("fig3")}
    curve = fig3["spl_plus_n7"]
    qx = curve.result.q_grid[:, 0]
    s = curve.result.shot_normalized[:, 0]
    minima = _local_minima(s)
    deep = minima[s[minima] < 0.5]
    comb_range = scales7["D"]
    principal = deep[np.abs(qx[deep]) < comb_range / 2.0 + d / 2.0]
    details["fig3_principal_holes"] = int(principal.size)
    ok &= principal.size == lat7.side_count_N

    grid_step = qx[1] - qx[0]
    spacings = np.diff(np.sort(qx[principal]))
    spacing_dev = float(np.max(np.abs(spacings - d))) if spacings.size else np.inf
    details["fig3_spacing_dev"] = spacing_dev
    ok &= spacing_dev <= grid_step

    center = principal[np.argmin(np.abs(qx[principal]))]
    width = _hole_half_width(qx, s, center)
    width_dev = abs(width - delta_q) / delta_q
    details["fig3_half_width_rel_dev"] = round(width_dev, 4)
    ok &= width_dev <= 0.05

    fig4 = {c.label: c for c in build_figure("fig4")}
    curve = fig4["spl_plus_n99"]
    qx = curve.result.q_grid[:, 0]
    s = curve.result.shot_normalized[:, 0]
    half_idx = int(np.argmin(np.abs(qx - 0.5 * d)))
    local = slice(max(0, half_idx - 20), half_idx + 21)
    half_value = float(s[local].min())
    details["fig4_half_depth_value"] = round(half_value, 4)
    ok &= abs(half_value - 0.5) <= 0.02
    full_idx = int(np.argmin(np.abs(qx - d)))
    local = slice(max(0, full_idx - 20), full_idx + 21)
    details["fig4_full_depth_value"] = round(float(s[local].min()), 4)
    ok &= float(s[local].min()) < 0.1
    minima = _local_minima(s)
    deep = minima[(s[minima] < 0.6) & (np.abs(qx[minima]) < 3.2 * d)]
    spacings = np.diff(np.sort(qx[deep]))
    half_spacing_dev = float(np.max(np.abs(spacings - 0.5 * d))) if spacings.size else np.inf
    details["fig4_half_spacing_dev"] = half_spacing_dev
    ok &= half_spacing_dev <= qx[1] - qx[0]

    fig5 = {c.label: c for c in build_figure("fig5")}
    curve = fig5["dopo_minus_n7"]
    floor = float(curve.result.shot_normalized.min())
    details["fig5_min_value"] = round(floor, 4)
    ok &= floor >= 0.5 - 0.02

    runtime = time.perf_counter() - t0
    ok &= runtime < 60.0
    return _record(
        "C5",
        "figure structure reproduction",
        ok,
        f"{details}; {runtime:.1f}s",
        "hole comb per caption geometry; side count 99 under 60 s",
        t0,
        details,
    )


def _oracle_config(source, scheme, branch, side_count, seed, squeeze=True) -> SimulationConfig:
    lattice = None
    if side_count > 1 or scheme is DetectionScheme.SINGLE_BEAM:
        lattice = PixelLattice(pitch_l=_PITCH, side_count_N=side_count)
    dt = 0.05 / (2.0 if source.kind is SourceKind.DOPO else 1.0)
    steps = 512 if source.kind is SourceKind.SPL else 1024
    extent = 8.0 if side_count == 1 else 28.0
    return SimulationConfig(
        source=source,
        mode=_MODE,
        geometry=_GEOM,
        scheme=scheme,
        branch=branch,
        lattice=lattice,
        grid_extent=extent,
        grid_pitch=0.25,
        duration=steps * dt,
        dt=dt,
        trajectories=56,
        seed=seed,
        squeezing_enabled=squeeze,
    )


def _probe_points(side_count: int) -> tuple[np.ndarray, np.ndarray]:
    if side_count == 1:
        qx = np.array([0.0, 0.4, -0.4, 0.8, -0.8, 1.2, -1.2, 1.6, -1.6, 2.0, -2.0, 2.5, -2.5, 3.0])
    else:
        qx = np.array([0.0, 2.0, -2.0, 4.0, -4.0, 5.0, -5.0, 7.0, -7.0, 10.0, -10.0, 11.0, 12.0, -12.0])
    q = np.stack([qx, np.zeros_like(qx)], axis=1)
    omegas = np.array([0.0, 0.5, 1.5])
    return q, omegas


def _compare_run(config: SimulationConfig, q_pts, omegas, workers: int) -> dict:
    mc = run_oracle(config, q_pts, omegas, workers=workers)
    query = SpectrumQuery(
        source=config.source,
        mode=config.mode,
        geometry=config.geometry,
        scheme=config.scheme,
        branch=config.branch,
        lattice=config.lattice,
        q_grid=mc.q_grid,
        omega_grid=mc.omega_grid,
    )
    ana = analytic_spectrum(query).values
    level = shot_level(config.source)
    exact_zero = (ana == 0.0) & (mc.stderr < 1e-9 * level)
    pulls = np.abs(mc.values - ana) / np.where(exact_zero, 1.0, np.maximum(mc.stderr, 1e-300))
    agree_zero = exact_zero & (np.abs(mc.values) <= 1e-9 * level)
    outside = (pulls > 3.0) & ~agree_zero
    n_points = int(ana.size)
    n_outside = int(outside.sum())
    finite_pulls = pulls[~exact_zero]
    return {
        "points": n_points,
        "outside_3sigma": n_outside,
        "allowed": int(0.05 * n_points),
        "worst_pull": round(float(finite_pulls.max()), 2) if finite_pulls.size else 0.0,
        "passed": n_outside <= int(0.05 * n_points),
    }


def criterion_oracle_equivalence(
    workers: int = 1, seed: int = DEFAULT_SEED
) -> CriterionRecord:
    """C6: Monte-Carlo estimates vs closed forms for all 8 combinations.

    Every (source x scheme x branch) at side counts {1, 3}, pump ratio 2,
    42 probe (q, Omega) points per run, pass when at most 5% of points fall
    outside 3 standard errors; plus a flat vacuum-only shot floor.
    """
    t0 = time.perf_counter()
    details = {}
    ok = True
    run_idx = 0
    for source, scheme, branch in _all_combinations():
        for side_count in (1, 3):
            config = _oracle_config(source, scheme, branch, side_count, seed + run_idx)
            q_pts, omegas = _probe_points(side_count)
            outcome = _compare_run(config, q_pts, omegas, workers)
            key = f"{source.kind.value}/{scheme.value}/{branch.value}/N{side_count}"
            details[key] = outcome
            ok &= outcome["passed"]
            run_idx += 1

    vac = _oracle_config(
        _spl(), DetectionScheme.TWO_BEAM, SignBranch.PLUS, 3, seed + 99, squeeze=False
    )
    q_pts, omegas = _probe_points(3)
    mc = run_oracle(vac, q_pts, omegas, workers=workers)
    level = shot_level(vac.source)
    pulls = np.abs(mc.values - level) / np.maximum(mc.stderr, 1e-300)
    details["vacuum_floor"] = {
        "worst_pull": round(float(pulls.max()), 2),
        "passed": bool(pulls.max() <= 3.0),
    }
    ok &= details["vacuum_floor"]["passed"]

    failed = sorted(k for k, v in details.items() if not v["passed"])
    return _record(
        "C6",
        "Monte-Carlo oracle equivalence",
        ok,
        f"failing runs: {failed if failed else 'none'}",
        "<= 5% of 42 probe points outside 3 sigma per run; vacuum floor flat",
        t0,
        details,
    )


def criterion_properties(seed: int = DEFAULT_SEED) -> CriterionRecord:
    """C7: evenness, non-negativity, shot-floor limit, lens unitarity,
    seeded determinism."""
    t0 = time.perf_counter()
    details = {}
    ok = True

    lat = PixelLattice(pitch_l=_PITCH, side_count_N=3)
    qx = np.linspace(0.0, 35.0, 141)
    q_plus = np.stack([qx, np.full_like(qx, 0.7)], axis=1)
    omegas = np.array([0.0, 0.3, 1.0, 4.0])
    worst_even = 0.0
    min_norm = np.inf
    for source, scheme, branch in _all_combinations():
        res_p = analytic_spectrum(_query(source, scheme, branch, lat, q_plus, omegas))
        res_m = analytic_spectrum(_query(source, scheme, branch, lat, -q_plus, omegas))
        scale = np.maximum(np.abs(res_p.shot_normalized), 1.0)
        worst_even = max(
            worst_even,
            float((np.abs(res_p.shot_normalized - res_m.shot_normalized) / scale).max()),
        )
        min_norm = min(min_norm, float(res_p.shot_normalized.min()))
        tail = analytic_spectrum(
            _query(source, scheme, branch, lat, q_plus[:8], np.array([100.0]))
        )
        ok &= bool(np.abs(tail.shot_normalized - 1.0).max() <= 1e-3)
    details["evenness_dev"] = f"{worst_even:.3e}"
    details["min_shot_normalized"] = f"{min_norm:.3e}"
    ok &= worst_even <= 1e-13
    ok &= min_norm >= 0.0

    # lens unitarity on a full double-precision ensemble
    from .oracle import build_near_field, lens_transform

    cfg = SimulationConfig(
        source=_spl(),
        mode=_MODE,
        geometry=_GEOM,
        scheme=DetectionScheme.TWO_BEAM,
        branch=SignBranch.PLUS,
        lattice=None,
        grid_extent=8.0,
        grid_pitch=0.25,
        duration=25.6,
        dt=0.05,
        trajectories=16,
        seed=seed,
        single_precision=False,
    )
    ens = build_near_field(cfg, trajectory=0)
    far = lens_transform(ens, cfg)
    near_flux = (np.abs(ens.fluctuations) ** 2).sum() * ens.cell_area
    far_flux = (np.abs(far.fluctuations) ** 2).sum() * far.cell_area
    parseval = abs(far_flux - near_flux) / near_flux
    details["parseval_rel_dev"] = f"{parseval:.3e}"
    ok &= parseval <= 1e-10

    q_pts, omegas = _probe_points(1)
    first = run_oracle(cfg, q_pts, omegas, workers=1, min_segments=16)
    second = run_oracle(cfg, q_pts, omegas, workers=2, min_segments=16)
    identical = np.array_equal(first.values, second.values) and np.array_equal(
        first.stderr, second.stderr
    )
    details["determinism"] = bool(identical)
    ok &= identical

    return _record(
        "C7",
        "property suite (symmetry, positivity, unitarity, determinism)",
        ok,
        str(details),
        "evenness 1e-13; normalized >= 0; Parseval 1e-10; bit-identical reruns",
        t0,
        details,
    )


def run_all(workers: int = 1, seed: int = DEFAULT_SEED, quick: bool = False) -> dict:
    """Run the acceptance gate and return the schema-versioned report."""
    records = [
        criterion_lattice_factor(seed),
        criterion_envelopes(seed),
        criterion_mode_fourier(),
        criterion_exact_points(),
        criterion_figures(),
    ]
    if quick:
        records.append(
            CriterionRecord(
                cid="C6",
                name="Monte-Carlo oracle equivalence",
                passed=False,
                measured="skipped (--quick)",
                tolerance="<= 5% of probe points outside 3 sigma per run",
                runtime_s=0.0,
                details={"skipped": True},
            )
        )
    else:
        records.append(criterion_oracle_equivalence(workers, seed))
    records.append(criterion_properties(seed))

    executed = [r for r in records if not r.details.get("skipped")]
    return {
        "schema_version": 1,
        "package_version": __version__,
        "seed": seed,
        "quick": quick,
        "passed": all(r.passed for r in executed),
        "criteria": [asdict(r) for r in records],
    }
