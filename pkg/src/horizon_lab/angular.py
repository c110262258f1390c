"""Eigenvalues of the angular operator that labels each mode (k, n).

The operator couples two components through ``+-d/dtheta + cot/2`` and the
centrifugal term ``(k + 1/2) / sin``.  Writing each component as
``sin(theta)**(-1/2)`` times an unknown removes the ``cot/2`` terms and the
weight of the measure ``sin(theta) dtheta`` at once, leaving

    [[0, D + W], [-D + W, 0]],   W = |k + 1/2| / sin(theta)

on ``L2((0, pi), dtheta)``.  A negative ``k + 1/2`` is reduced to the
positive case by swapping the components and flipping the overall sign,
which leaves the (symmetric) spectrum unchanged.

The two components live on interleaved staggered grids, so the matrix is
real symmetric tridiagonal with zero diagonal.  Its error is second order
in the grid step and :func:`angular_eigenvalues` removes the leading term
by Richardson extrapolation.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import DomainError

DEFAULT_GRID = 4000


def _kappa(k: float) -> float:
    twice = 2.0 * k
    if not np.isfinite(twice) or abs(twice - round(twice)) > 1e-12 or round(twice) % 2 == 0:
        raise DomainError(f"k must be a half-integer, got {k!r}")
    return abs(k + 0.5)


def _bands(k: float, N: int):
    kappa = _kappa(k)
    if N < 64:
        raise DomainError("the angular grid needs N >= 64")
    h = np.pi / (2 * N)
    bond = np.arange(2 * N - 1)
    sign = np.where(bond % 2 == 0, 1.0, -1.0)
    mid = (bond + 1) * h
    off = sign / (2 * h) + 0.5 * kappa / np.sin(mid)
    return np.zeros(2 * N), off


def assemble_angular_operator(k: float, N: int) -> np.ndarray:
    """Dense ``2N x 2N`` symmetric matrix on the staggered grid ``(l + 1/2) pi / 2N``."""
    diag, off = _bands(k, N)
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)


def _raw_eigenvalues(k: float, N: int, window: float | None) -> np.ndarray:
    diag, off = _bands(k, N)
    if window is None:
        return eigh_tridiagonal(diag, off, eigvals_only=True)
    return eigh_tridiagonal(diag, off, eigvals_only=True, select="v",
                            select_range=(-window, window))


def _order(values: np.ndarray) -> np.ndarray:
    return values[np.lexsort((values, np.abs(values)))]


@lru_cache(maxsize=64)
def _extrapolated(k: float, N: int, count: int) -> tuple:
    window = _kappa(k) + count + 2.0
    fine = _order(_raw_eigenvalues(k, N, window))
    coarse = _order(_raw_eigenvalues(k, N // 2, window))
    size = min(len(fine), len(coarse), 2 * count)
    return tuple((4.0 * fine[:size] - coarse[:size]) / 3.0)


def angular_eigenvalues(k: float, N: int = DEFAULT_GRID, count: int = 8,
                        extrapolate: bool = True) -> np.ndarray:
    """The ``2 * count`` eigenvalues of smallest modulus, ordered by ``|lambda|`` then sign.

    With ``extrapolate`` the grids ``N`` and ``N / 2`` are combined to
    cancel the second-order discretisation error.
    """
    if extrapolate:
        return np.array(_extrapolated(float(k), int(N), int(count)))
    window = _kappa(k) + count + 2.0
    return _order(_raw_eigenvalues(k, N, window))[:2 * count]


@dataclass(frozen=True)
class AngularMode:
    """Mode label; ``lam`` is the n-th positive eigenvalue unless overridden."""

    k: float
    n: int
    lam: float

    @classmethod
    def compute(cls, k: float, n: int = 1, N: int = DEFAULT_GRID) -> "AngularMode":
        if n < 1:
            raise DomainError("n counts positive eigenvalues from 1")
        ev = angular_eigenvalues(k, N, count=max(8, n + 2))
        positive = np.sort(ev[ev > 0])
        return cls(float(k), int(n), float(positive[n - 1]))
