import numpy as np
import pytest

from horizon_lab.errors import ConstraintViolation, DomainError, RegimeBoundary, WindowTooShort
from horizon_lab.geometry import BlackHole
from horizon_lab.radial import (T12Strategy, batch_horizon_data, born_remainders,
                                born_second_order_bound, f_derivative, fit_t12_completeness,
                                fundamental_solutions, horizon_bound, horizon_data,
                                integrate_f_ode, propagate_mode, published_bound,
                                transmission_coefficients)

BH = BlackHole(1.0)
LAM = 1.5   # first positive angular eigenvalue at k = 1/2


def test_massless_zero_coupling_keeps_data_constant():
    sol = integrate_f_ode(0.7, 0.0, 0.0, BH, -40.0, 10.0, (0.3 + 0.1j, -0.2j))
    assert np.allclose(sol.f_plus, 0.3 + 0.1j, atol=1e-14)
    assert np.allclose(sol.f_minus, -0.2j, atol=1e-14)


def test_corrected_bound_holds_on_short_window():
    grid = np.linspace(-20.0, 0.0, 201)
    sol = integrate_f_ode(0.3, LAM, 0.1, BH, -120.0, 0.0, (1, 0), 1e-10,
                          grid=np.concatenate([[-120.0], grid]))
    bound = horizon_bound(0.1, LAM, BH, 0.0)
    rp, rm = sol.remainder()
    dist = np.hypot(np.abs(rp), np.abs(rm))
    assert np.all(dist <= bound(sol.grid))
    dp, dm = sol.derivative()
    assert np.all(np.hypot(np.abs(dp), np.abs(dm)) <= bound.derivative(sol.grid))


def test_forward_backward_round_trip():
    f0 = (1.0, 0.5j)
    fwd = integrate_f_ode(0.3, LAM, 0.1, BH, -30.0, 5.0, f0, 1e-11)
    back = integrate_f_ode(0.3, LAM, 0.1, BH, 5.0, -30.0,
                           (fwd.f_plus[-1], fwd.f_minus[-1]), 1e-11)
    assert abs(back.f_plus[0] - f0[0]) < 1e-8 and abs(back.f_minus[0] - f0[1]) < 1e-8


def test_ode_residual_of_reconstructed_solution():
    grid = np.linspace(-30.0, 10.0, 4001)
    sol = integrate_f_ode(0.4, LAM, 0.1, BH, -30.0, 10.0, (1, 0), 1e-10, grid=grid)
    rhs_p, rhs_m = f_derivative(grid, sol.f_plus, sol.f_minus, 0.4, LAM, 0.1, BH)
    num_p = np.gradient(sol.f_plus, grid, edge_order=2)
    num_m = np.gradient(sol.f_minus, grid, edge_order=2)
    assert np.abs(num_p - rhs_p)[2:-2].max() < 1e-4
    assert np.abs(num_m - rhs_m)[2:-2].max() < 1e-4


def test_horizon_data_returns_initialisation():
    sol = integrate_f_ode(0.3, LAM, 0.1, BH, -120.0, -10.0, (1, 0))
    f0, err = horizon_data(sol)
    assert f0 == (1, 0) or np.allclose(f0, (1, 0))
    assert err < 1e-8


def test_horizon_data_needs_a_deep_start():
    sol = integrate_f_ode(0.3, LAM, 0.1, BH, -10.0, 0.0, (1, 0))
    with pytest.raises(WindowTooShort):
        horizon_data(sol)


def test_bound_column_decreases_toward_horizon():
    b = horizon_bound(0.1, LAM, BH, -10.0)
    u = np.linspace(-120.0, -10.0, 50)
    assert np.all(np.diff(b(u)) > 0)


def test_modulus_range_contains_solution_modulus():
    u2 = -10.0
    grid = np.linspace(-120.0, u2, 401)
    sol = integrate_f_ode(0.3, LAM, 0.1, BH, -120.0, u2, (1, 0), 1e-10, grid=grid)
    mod = np.hypot(np.abs(sol.f_plus), np.abs(sol.f_minus))
    lo, hi = horizon_bound(0.1, LAM, BH, u2).modulus_range(mod[-1])
    assert np.all(mod >= lo * (1 - 1e-12)) and np.all(mod <= hi * (1 + 1e-12))


def test_scattering_fundamental_data():
    pair = fundamental_solutions(0.3, LAM, 0.1, BH)
    assert pair.regime == "scattering"
    assert np.allclose(pair.first.f0, (1, 0)) and np.allclose(pair.second.f0, (0, 1))


def test_evanescent_solution_decays_and_is_normalised():
    w, m = -0.05, 0.1
    pair = fundamental_solutions(w, LAM, m, BH)
    sol = pair.first
    assert pair.regime == "evanescent" and pair.second is None
    assert abs(np.hypot(abs(sol.f0[0]), abs(sol.f0[1])) - 1.0) < 1e-8
    kappa = np.sqrt(m * m - w * w)
    u_mid, u_max = 10.0, 40.0
    xp, xm = sol.X(np.array([u_mid, u_max]))
    norms = np.hypot(np.abs(xp), np.abs(xm))
    assert norms[1] / norms[0] <= np.exp(-kappa * (u_max - u_mid) / 2)


def test_batch_and_single_evanescent_data_agree():
    ws = np.array([-0.08, -0.05, -0.01])
    batch = batch_horizon_data(ws, LAM, 0.1, BH)
    for w, f0 in zip(ws, batch):
        single = np.array(fundamental_solutions(w, LAM, 0.1, BH).first.f0)
        phase = single[0] / f0[0]
        assert abs(abs(phase) - 1) < 1e-7
        assert np.allclose(single, phase * f0, atol=1e-7)


def test_current_conservation_in_the_band():
    f0 = batch_horizon_data(np.linspace(-0.09, -0.01, 5), LAM, 0.1, BH)
    assert np.allclose(np.abs(f0[:, 0]) ** 2, 0.5, atol=1e-8)


def test_regime_boundary_is_excluded():
    with pytest.raises(RegimeBoundary):
        fundamental_solutions(0.1, LAM, 0.1, BH)


def test_transmission_matrix_cases():
    assert np.allclose(transmission_coefficients(0.05, 0.1).as_array(), [[1, 0], [0, 0]])
    assert np.allclose(transmission_coefficients(0.2, 0.1).as_array(), [[0.5, 0], [0, 0.5]])
    T = transmission_coefficients(0.2, 0.1, T12Strategy("constant", 0.3 + 0.2j)).as_array()
    assert np.allclose(T, T.conj().T)
    with pytest.raises(ConstraintViolation):
        T12Strategy("constant", 0.6)
    with pytest.raises(DomainError):
        T12Strategy("sometimes")


def test_born_remainders_against_ode():
    grid = np.linspace(-120.0, -15.0, 6001)
    omegas = np.array([-0.4, -0.25, 0.3])
    f0 = np.array([[1.0, 0.0], [0.0, 1.0], [0.6, 0.8j]], dtype=complex)
    rp, rm = born_remainders(omegas, LAM, 0.1, BH, f0, grid)
    bound = born_second_order_bound(LAM, 0.1, BH, -15.0)
    for i, w in enumerate(omegas):
        sol = integrate_f_ode(w, LAM, 0.1, BH, -120.0, -15.0, f0[i], 1e-12, grid=grid)
        err = max(np.abs(sol.f_plus - f0[i, 0] - rp[i]).max(),
                  np.abs(sol.f_minus - f0[i, 1] - rm[i]).max())
        assert err <= bound


def _packet(grid):
    # supported deep in the horizon region, where the solutions are still
    # close to their horizon plane waves
    env = np.exp(-((grid + 50.0) / 3.0) ** 2)
    return env * np.exp(0.5j * grid), 0.5 * env


def _omega_rule(n_panel):
    from horizon_lab.kernels import _panel_rule
    pieces = [(-4.0, -0.1), (-0.1, 0.0), (0.0, 0.1), (0.1, 4.0)]
    nodes, weights = zip(*(_panel_rule(a, b, (b - a) / n_panel, 8) for a, b in pieces))
    return np.concatenate(nodes), np.concatenate(weights)


@pytest.fixture(scope="module")
def propagation_setup():
    grid = np.linspace(-70.0, -30.0, 801)
    X0 = _packet(grid)
    coarse = _omega_rule(2)
    fine = _omega_rule(8)
    return grid, X0, coarse, fine


def test_propagation_reconstructs_initial_data(propagation_setup):
    grid, X0, coarse, fine = propagation_setup
    target = np.concatenate(X0)

    def rel(rule):
        res = propagate_mode(X0, grid, 0.0, LAM, 0.1, BH, *rule)
        return np.linalg.norm(np.concatenate([res.plus, res.minus]) - target) / np.linalg.norm(target)

    e_coarse, e_fine = rel(coarse), rel(fine)
    # the floor (about 3%) is the band's single decaying solution, which
    # reflects part of the packet; it does not shrink under refinement
    assert e_fine <= 0.05
    assert e_fine < e_coarse


def test_propagation_is_linear_and_norm_bounded(propagation_setup):
    grid, X0, coarse, _ = propagation_setup
    Y0 = (np.roll(X0[1], 40), np.roll(X0[0], -30))
    a, b = 0.7 - 0.2j, 1.3
    Z0 = (a * X0[0] + b * Y0[0], a * X0[1] + b * Y0[1])
    rx = propagate_mode(X0, grid, 3.0, LAM, 0.1, BH, *coarse)
    ry = propagate_mode(Y0, grid, 3.0, LAM, 0.1, BH, *coarse)
    rz = propagate_mode(Z0, grid, 3.0, LAM, 0.1, BH, *coarse)
    assert np.allclose(rz.plus, a * rx.plus + b * ry.plus, atol=1e-12)
    assert np.allclose(rz.minus, a * rx.minus + b * ry.minus, atol=1e-12)
    n0 = np.linalg.norm(np.concatenate(X0))
    fine = propagate_mode(X0, grid, 3.0, LAM, 0.1, BH, *_omega_rule(8))
    n1 = np.linalg.norm(np.concatenate([fine.plus, fine.minus]))
    assert n1 <= n0 * 1.01


def test_completeness_fit_stays_on_the_disk(propagation_setup):
    grid, X0, coarse, _ = propagation_setup
    t12 = fit_t12_completeness(X0, grid, LAM, 0.1, BH, *coarse)
    assert abs(t12) <= 0.5


@pytest.mark.parametrize("omega,m,lam,mass", [(0.3, 0.1, LAM, 1.0), (-0.7, 0.2, 2.5, 2.0)])
def test_published_bound_fails_where_corrected_bound_holds(omega, m, lam, mass):
    """The rate 1/M is too fast for the coupling; the rate 1/(4M) is not."""
    bh = BlackHole(mass)
    grid = np.linspace(-120.0 * mass, -10.0 * mass, 401)
    sol = integrate_f_ode(omega, lam, m, bh, grid[0], grid[-1], (1, 0), 1e-11, grid=grid)
    rp, rm = sol.remainder()
    dist = np.hypot(np.abs(rp), np.abs(rm))
    assert np.any(dist > published_bound(m, lam, bh, grid[-1])(grid))
    assert np.all(dist <= horizon_bound(m, lam, bh, grid[-1])(grid))
