import numpy as np
import pytest

from horizon_lab.angular import AngularMode, angular_eigenvalues, assemble_angular_operator
from horizon_lab.errors import DomainError

# regression constants: Richardson-extrapolated N = 4000, confirmed by a raw
# N = 16000 grid (no extrapolation) to 1e-6
FROZEN_FIRST_POSITIVE = {0.5: 1.5, 1.5: 2.5, 2.5: 3.5, -1.5: 1.5}
TESTED_K = (0.5, 1.5, 2.5, -1.5, -2.5)


def test_operator_is_real_symmetric():
    A = assemble_angular_operator(0.5, 400)
    assert np.isrealobj(A)
    assert np.abs(A - A.T).max() <= 1e-12


def test_dense_operator_spectrum_is_real():
    A = assemble_angular_operator(1.5, 300)
    ev = np.linalg.eigvals(A)
    assert np.abs(ev.imag).max() < 1e-10


@pytest.mark.parametrize("k", TESTED_K)
def test_spectrum_symmetric_about_zero(k):
    ev = np.sort(angular_eigenvalues(k, 4000, 8))
    assert np.allclose(ev, -ev[::-1], atol=1e-8)


@pytest.mark.parametrize("k", TESTED_K)
def test_no_small_eigenvalue(k):
    assert np.abs(angular_eigenvalues(k, 4000, 8)).min() > 0.5


@pytest.mark.parametrize("k", TESTED_K)
def test_grid_doubling_stability(k):
    a = angular_eigenvalues(k, 4000, 8)[:10]
    b = angular_eigenvalues(k, 8000, 8)[:10]
    assert np.abs(a - b).max() < 1e-6


@pytest.mark.parametrize("k", (0.5, 1.5))
def test_extrapolation_agrees_with_fine_raw_grid(k):
    a = angular_eigenvalues(k, 4000, 8)[:10]
    raw = angular_eigenvalues(k, 16000, 8, extrapolate=False)[:10]
    assert np.abs(a - raw).max() < 1e-6


@pytest.mark.parametrize("k", (0.5, 1.5, 2.5))
def test_reflected_label_has_the_same_spectrum(k):
    a = angular_eigenvalues(k, 4000, 6)
    b = angular_eigenvalues(-k - 1.0, 4000, 6)
    assert np.allclose(np.sort(a), np.sort(b), atol=1e-8)


@pytest.mark.parametrize("k,lam", sorted(FROZEN_FIRST_POSITIVE.items()))
def test_first_positive_eigenvalue_regression(k, lam):
    assert AngularMode.compute(k, 1).lam == pytest.approx(lam, abs=1e-6)


def test_mode_counts_from_one():
    with pytest.raises(DomainError):
        AngularMode.compute(0.5, 0)


def test_eigenvalues_increase_with_n():
    lams = [AngularMode.compute(0.5, n).lam for n in (1, 2, 3)]
    assert lams[0] < lams[1] < lams[2]


def test_label_must_be_half_integer():
    with pytest.raises(DomainError):
        angular_eigenvalues(1.0, 400)
