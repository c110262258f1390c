import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given
from hypothesis import strategies as st

from horizon_lab.entropy import eta
from horizon_lab.errors import NotHermitian, NotProjection
from horizon_lab.kernels import default_error_omega_rule, error_kernel_r
from horizon_lab.opalpha import Interval
from horizon_lab.spectral import (complement_duality_check, entropic_difference,
                                  hermitian_eigenvalues, real_symmetric_form, schatten_q_norm,
                                  sobolev_kernel_norm, trace_function)
from scipy import integrate

seeds = st.integers(0, 2 ** 31 - 1)


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (a + a.conj().T)


def random_unitary(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_projection(rng, n, rank):
    q = random_unitary(rng, n)[:, :rank]
    return q @ q.conj().T


def spectrum_in_unit_interval(rng, n):
    q = random_unitary(rng, n)
    return (q * rng.uniform(0.02, 0.98, n)) @ q.conj().T


def test_diagonal_spectrum_descending():
    spec = hermitian_eigenvalues(np.diag([0.2, 0.8]))
    assert np.allclose(spec.eigenvalues, [0.8, 0.2]) and spec.dimension == 2


def test_projection_spectrum():
    ev = hermitian_eigenvalues(random_projection(np.random.default_rng(1), 7, 3)).eigenvalues
    assert np.allclose(ev, [1, 1, 1, 0, 0, 0, 0], atol=1e-12)


@given(seeds)
def test_cubic_root_oracle(seed):
    a = random_hermitian(np.random.default_rng(seed), 3)
    t1 = np.trace(a).real
    t2 = 0.5 * (t1 ** 2 - np.trace(a @ a).real)
    t3 = np.linalg.det(a).real
    roots = np.sort(np.roots([1.0, -t1, t2, -t3]).real)[::-1]
    assert np.abs(hermitian_eigenvalues(a).eigenvalues - roots).max() <= 1e-10


def test_not_hermitian_rejected():
    with pytest.raises(NotHermitian):
        hermitian_eigenvalues(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(NotHermitian):
        hermitian_eigenvalues(np.ones((2, 3)))


def test_overwrite_path_matches():
    a = random_hermitian(np.random.default_rng(4), 6).real.copy()
    ref = hermitian_eigenvalues(a).eigenvalues
    assert np.abs(hermitian_eigenvalues(a.copy(), overwrite=True).eigenvalues - ref).max() < 1e-12


@given(seeds)
def test_real_symmetric_form_preserves_spectrum(seed):
    rng = np.random.default_rng(seed)
    X = random_hermitian(rng, 5)
    Y = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    Y = 0.5 * (Y + Y.T)
    full = np.block([[X, Y], [Y.conj().T, X.conj()]])
    ref = np.linalg.eigvalsh(full)
    got = np.linalg.eigvalsh(real_symmetric_form(X, Y))
    assert np.abs(np.sort(got) - np.sort(ref)).max() < 1e-10


def test_schatten_identity():
    assert schatten_q_norm(np.eye(2), 1.0).value == pytest.approx(2.0, abs=1e-14)
    with pytest.raises(ValueError):
        schatten_q_norm(np.eye(2), 0.0)


@given(seeds, st.sampled_from([0.3, 0.5, 1.0, 2.0, 5.0]))
def test_rank_one_norm_is_operator_norm(seed, q):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=5) + 1j * rng.normal(size=5)
    y = rng.normal(size=4)
    t = np.outer(x, y)
    assert schatten_q_norm(t, q).value == pytest.approx(np.linalg.norm(t, 2), rel=1e-10)


@given(seeds, st.sampled_from([0.5, 1.0, 2.0]))
def test_unitary_invariance(seed, q):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    u = random_unitary(rng, 8)
    ref = schatten_q_norm(a, q).value
    assert abs(schatten_q_norm(u.conj().T @ a @ u, q).value - ref) <= 1e-10 * ref


@given(seeds)
def test_zero_padding_and_trace_bound(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    padded = np.zeros((6, 6), dtype=complex)
    padded[:4, :4] = a
    ref = schatten_q_norm(a, 0.7).value
    assert schatten_q_norm(padded, 0.7).value == pytest.approx(ref, rel=1e-10)
    assert schatten_q_norm(a, 1.0).value >= abs(np.trace(a)) - 1e-12


@given(seeds, st.sampled_from([0.5, 0.8, 1.0]))
def test_q_triangle_inequality(seed, q):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    b = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    lhs = schatten_q_norm(a + b, q).value ** q
    rhs = schatten_q_norm(a, q).value ** q + schatten_q_norm(b, q).value ** q
    assert lhs <= rhs * (1 + 1e-12)


def test_trace_function_identity_and_projection():
    rng = np.random.default_rng(2)
    a = random_hermitian(rng, 5)
    assert trace_function(a, lambda x: x, clip=False) == pytest.approx(np.trace(a).real, abs=1e-12)
    assert trace_function(random_projection(rng, 6, 2), eta) == pytest.approx(0.0, abs=1e-12)


@given(seeds)
def test_trace_function_against_general_eigensolver(seed):
    a = spectrum_in_unit_interval(np.random.default_rng(seed), 6)
    oracle = float(np.sum(eta(np.linalg.eigvals(a).real)))
    assert trace_function(a, eta) == pytest.approx(oracle, abs=1e-10)


def test_entropic_difference_full_mask_is_zero():
    a = spectrum_in_unit_interval(np.random.default_rng(3), 6)
    res = entropic_difference(a, np.ones(6, bool), eta)
    assert abs(res.d_value) <= 1e-12


def test_entropic_difference_of_projection():
    rng = np.random.default_rng(5)
    pi = random_projection(rng, 8, 3)
    mask = np.array([1, 1, 0, 1, 0, 0, 1, 0], bool)
    res = entropic_difference(pi, mask, eta)
    assert abs(res.trace_masked) <= 1e-10
    assert res.d_value >= 0
    assert res.d_value == pytest.approx(trace_function(pi[np.ix_(mask, mask)], eta), abs=1e-10)


def _matrix_eta(a):
    one = np.eye(len(a))
    return -(a @ sla.logm(a) + (one - a) @ sla.logm(one - a))


@given(seeds)
def test_entropic_difference_brute_force(seed):
    rng = np.random.default_rng(seed)
    a = spectrum_in_unit_interval(rng, 8)
    mask = rng.random(8) < 0.5
    mask[0] = True
    p = np.diag(mask.astype(float))
    pap = (p @ a @ p)[np.ix_(mask, mask)]
    expected = (trace_function(pap, eta)
                - np.trace(p @ _matrix_eta(a) @ p).real)
    assert entropic_difference(a, mask, eta).d_value == pytest.approx(expected, abs=1e-9)


@given(seeds)
def test_entropic_difference_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    a = spectrum_in_unit_interval(rng, 7)
    mask = rng.random(7) < 0.5
    perm = rng.permutation(7)
    d1 = entropic_difference(a, mask, eta).d_value
    d2 = entropic_difference(a[np.ix_(perm, perm)], mask[perm], eta).d_value
    assert d1 == pytest.approx(d2, abs=1e-10)


def test_entropic_difference_empty_mask_and_supplied_trace():
    a = spectrum_in_unit_interval(np.random.default_rng(6), 4)
    assert entropic_difference(a, np.zeros(4, bool), eta).d_value == 0.0
    res = entropic_difference(a, np.ones(4, bool), eta, masked_trace=0.25)
    assert res.trace_masked == 0.25
    assert res.d_value == pytest.approx(res.trace_restricted - 0.25)


@given(seeds)
def test_complement_duality(seed):
    rng = np.random.default_rng(seed)
    pi = random_projection(rng, 8, 3)
    mask = rng.random(8) < 0.5
    t_in, t_out = complement_duality_check(pi, mask)
    assert t_in == pytest.approx(t_out, abs=1e-10)


def test_complement_duality_trivial_cases():
    assert complement_duality_check(np.eye(5), np.array([1, 0, 1, 0, 0], bool)) == (0.0, 0.0)
    pi = np.diag([1.0, 0.0, 1.0, 1.0, 0.0])
    t_in, t_out = complement_duality_check(pi, np.array([1, 1, 0, 0, 0], bool))
    assert abs(t_in) < 1e-14 and abs(t_out) < 1e-14
    with pytest.raises(NotProjection):
        complement_duality_check(np.diag([0.5, 1.0]), np.array([1, 0], bool))


def test_sobolev_zero_kernel():
    assert sobolev_kernel_norm(lambda u, v: np.zeros_like(u), Interval(1.0, 1.0)) == 0.0


def test_sobolev_rank_one_product():
    phi, dphi = (lambda u: np.sin(u) + 2.0), (lambda u: np.cos(u))
    psi = lambda u: np.exp(u)
    w1 = integrate.quad(lambda u: phi(u) ** 2 + dphi(u) ** 2, 0.0, 1.0)[0]
    l2 = integrate.quad(lambda u: psi(u) ** 2, 0.0, 1.0)[0]
    expected = np.sqrt(w1 * l2)
    kern = lambda U, V: phi(U) * psi(V)
    iv = Interval(1.0, 1.0)
    exact = sobolev_kernel_norm(kern, iv, derivative=lambda U, V: dphi(U) * psi(V))
    assert exact == pytest.approx(expected, rel=1e-12)
    assert sobolev_kernel_norm(kern, iv) == pytest.approx(expected, rel=1e-8)
    with pytest.raises(ValueError):
        sobolev_kernel_norm(kern, iv, l=2)


def test_sobolev_norm_of_remainder_decreases_deeper():
    w, wt = default_error_omega_rule(0.1, 1.0, 2.0)

    def remainder(U, V):
        u, v = U[:, 0], V[0, :]
        nodes = np.union1d(u, v)
        R = error_kernel_r(1.5, 0.1, 1.0, nodes, w, wt, v_points=1501)[0, 0]
        return R[np.ix_(np.searchsorted(nodes, u), np.searchsorted(nodes, v))]

    shallow = sobolev_kernel_norm(remainder, Interval(-40.0, 2.0), n=16)
    deep = sobolev_kernel_norm(remainder, Interval(-80.0, 2.0), n=16)
    assert 0 < deep < shallow
