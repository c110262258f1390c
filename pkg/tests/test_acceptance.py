"""Acceptance criteria 1-12, one test each, at their stated tolerances.

Every test prints a ``PASS``/``FAIL`` line (shown even under output
capture).  Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import time

import numpy as np
import pytest

from horizon_lab.entropy import ETA, QUADRATIC, u_functional
from horizon_lab.geometry import BlackHole
from horizon_lab.kernels import eta_limiting_kernel, limiting_kernel
from horizon_lab.opalpha import Interval, translate_check
from horizon_lab.radial import T12Strategy, horizon_bound, integrate_f_ode, published_bound
from horizon_lab.spectral import complement_duality_check
from horizon_lab.studies import (ScalingStudyConfig, bh_entropy, full_path_difference,
                                 limiting_masked_density, limiting_pair_difference,
                                 schatten_growth_study, scaling_study_limiting,
                                 spectral_mapping_check, u0_limit_study_full, widom_prediction)

ALPHAS = (32.0, 64.0, 128.0, 256.0, 512.0)
LAM = 1.5          # k = 1/2, n = 1
FERMION_MASS = 0.1


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail
    return emit


@pytest.fixture(scope="module")
def main_study():
    return scaling_study_limiting(ScalingStudyConfig(M=1.0, rho=1.0, alpha_list=ALPHAS))


def test_criterion_01_u_functional(report):
    t = time.perf_counter()
    value = u_functional(ETA, 1.0)
    elapsed = time.perf_counter() - t
    err = abs(value - np.pi ** 2 / 3)
    report(1, err <= 1e-8 and elapsed < 1.0, f"U(1; eta) = {value!r}, error {err:.2e}, "
                                              f"{elapsed * 1e3:.1f} ms")


def test_criterion_02_main_law(report, main_study):
    total = main_study.fit.slope
    chans = [main_study.channel_fits[w].slope for w in (1, 2)]
    ok = abs(total / (1 / 3) - 1) <= 0.10 and all(abs(s / (1 / 6) - 1) <= 0.10 for s in chans)
    report(2, ok, f"total slope {total:.5f} (target 1/3), channels {chans[0]:.5f}, "
                  f"{chans[1]:.5f} (target 1/6)")


def test_criterion_03_masked_trace(report):
    worst = 0.0
    for M, alpha, rho in [(1.0, 64.0, 1.0), (2.0, 100.0, 3.0), (0.5, 17.0, 0.25)]:
        exact = rho * alpha * np.pi / (12 * M)
        by_symbol = rho * limiting_masked_density(ETA, M, alpha)
        by_kernel = rho * eta_limiting_kernel(1, M, alpha, 0.0, 0.0, method="quadrature").real
        worst = max(worst, abs(by_symbol / exact - 1), abs(by_kernel / exact - 1))
    report(3, worst <= 1e-4, f"worst relative deviation {worst:.2e}")


def test_criterion_04_complement_duality(report):
    rng = np.random.default_rng(20261018)
    worst = 0.0
    for _ in range(200):
        d = int(rng.integers(2, 13))
        q, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
        r = int(rng.integers(0, d + 1))
        proj = q[:, :r] @ q[:, :r].conj().T
        mask = rng.random(d) < 0.5
        t_in, t_out = complement_duality_check(proj, mask)
        worst = max(worst, abs(t_in - t_out))
    report(4, worst <= 1e-10, f"200 pairs, worst |difference| {worst:.2e}")


def test_criterion_05_translation(report):
    worst = 0.0
    for which in (1, 2):
        kern = lambda u, v, w=which: limiting_kernel(w, 1.0, 16.0, u, v)
        for c in (-60.0, -7.3, 0.5, 41.0):
            rep = translate_check(kern, Interval(0.0, 1.0), c, n=192, qs=(0.5, 1.0))
            worst = max(worst, rep.max_deviation)
    report(5, worst <= 1e-8, f"worst trace/Schatten deviation {worst:.2e}")


def test_criterion_06_schatten_growth(report):
    alphas = (32.0, 64.0, 128.0, 256.0, 512.0, 1024.0)
    study = schatten_growth_study(Interval(0.0, 1.0), (0.0, 1.0), 1.0, alphas)
    values = [p.value for p in study.points]
    ok = study.fit.r_squared >= 0.99
    report(6, ok, f"slope {study.fit.slope:.5f}, r^2 {study.fit.r_squared:.6f}, "
                  f"values {values[0]:.4f} .. {values[-1]:.4f}")


def _bound_tuples():
    tuples = []
    for omega in (-1.5, -0.7, 0.05, 0.3, 1.2):
        for m in (0.0, 0.1):
            for lam in (LAM, 2.5):
                tuples.append((omega, m, lam, 1.0))
    tuples += [(0.3, 0.2, 1.5, 2.0), (-0.9, 0.05, 3.5, 0.5)]
    return tuples


def _bound_violations(bound_for):
    bad, total = 0, 0
    for omega, m, lam, M in _bound_tuples():
        bh = BlackHole(M)
        grid = np.linspace(-120.0 * M, -10.0 * M, 401)
        sol = integrate_f_ode(omega, lam, m, bh, grid[0], grid[-1], (1, 0), 1e-11, grid=grid)
        b = bound_for(m, lam, bh, grid[-1])
        rp, rm = sol.remainder()
        dp, dm = sol.derivative()
        bad += int(np.sum(np.hypot(np.abs(rp), np.abs(rm)) > b(grid)))
        bad += int(np.sum(np.hypot(np.abs(dp), np.abs(dm)) > b.derivative(grid)))
        total += 2 * len(grid)
    return bad, total


def test_criterion_07_published_horizon_bound(report):
    # faithful to the stated constants (rate 1/M); expected to fail, see the
    # companion test below for the rate the coupling actually supports
    bad, total = _bound_violations(published_bound)
    report(7, bad == 0, f"{len(_bound_tuples())} tuples, {bad}/{total} node checks violate "
                        f"the bound with rate 1/M")


def test_criterion_07_corrected_horizon_bound(report):
    bad, total = _bound_violations(horizon_bound)
    report(7, bad == 0, f"corrected rate 1/(4M): {bad}/{total} node checks violate")


def test_criterion_08_widom_quadratic(report):
    cfg = ScalingStudyConfig(M=1.0, rho=1.0, alpha_list=ALPHAS)
    comp = widom_prediction(QUADRATIC, 1, cfg)
    target = 1 / (2 * np.pi ** 2)
    ok = abs(comp.measured_slope / target - 1) <= 0.10
    report(8, ok, f"measured {comp.measured_slope:.6f}, predicted {comp.predicted_slope:.6f}, "
                  f"target {target:.6f}")


def test_criterion_09_full_vs_limiting(report):
    region = Interval(-60.0, 4.0)
    gaps = {}
    for eps, per_width in ((1 / 256, 4.0), (1 / 512, 3.0)):
        full = full_path_difference(LAM, FERMION_MASS, eps, region, per_width=per_width)
        limiting = limiting_pair_difference(1.0, 1.0 / eps, region, full.nodes)
        gaps[eps] = (full.result.d_value, limiting, abs(full.result.d_value / limiting - 1))
    g256, g512 = gaps[1 / 256][2], gaps[1 / 512][2]
    ok = g256 <= 0.15 and g512 <= 0.15 and g512 <= g256
    report(9, ok, "; ".join(f"eps=1/{round(1 / e)}: full {f:.6f} limiting {l:.6f} gap {g:.2e}"
                            for e, (f, l, g) in gaps.items()))


def test_criterion_10_error_term_decay(report):
    strategies = (T12Strategy(), T12Strategy("constant", 0.4), T12Strategy("constant", 0.4j))
    study = u0_limit_study_full(LAM, FERMION_MASS, 1 / 64, [-40.0, -60.0, -80.0], 4.0,
                                strategies, per_width=4.0)
    first = [k for k in study.table if k[1] == -40.0][0][0]
    d40 = study.table[(first, -40.0)].result.d_value
    d80 = study.table[(first, -80.0)].result.d_value
    drift = abs(d40 - d80) / abs(d80)
    ok = study.spread <= 0.01 and drift <= 0.02
    report(10, ok, f"t12 spread {study.spread:.2e}, |d(-40)-d(-80)|/|d(-80)| {drift:.2e}")


def test_criterion_11_spectral_mapping(report):
    check = spectral_mapping_check(1, 1.0, 32.0, 64.0, per_width=4.0)
    dev = check.relative_deviation
    report(11, dev <= 0.005, f"tr Op(eta(a)) {check.trace_of_image:.4f}, "
                             f"tr eta(Op(a)) {check.trace_of_mapped:.4f}, deviation {dev:.3e}, "
                             f"{check.nodes} nodes")


def test_criterion_12_mode_counting(report):
    res = bh_entropy(M=1.0, eps=0.1)
    report(12, res.S_BH == 100 / 6 and res.occupied_count == 100,
           f"count {res.occupied_count}, S_BH {res.S_BH!r}")
