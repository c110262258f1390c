"""Eigenvalues, Schatten norms, trace functionals and the entropic difference."""

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .errors import NotHermitian, NotProjection


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray  # descending
    dimension: int


@dataclass(frozen=True)
class SchattenReport:
    q: float
    value: float
    singular_values: np.ndarray


@dataclass(frozen=True)
class EntropicDifferenceResult:
    alpha: float | None
    region: object
    trace_restricted: float
    trace_masked: float
    d_value: float
    kernel_id: str = ""


def hermitian_deviation(matrix) -> float:
    a = np.asarray(matrix)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def hermitian_eigenvalues(matrix, tol: float = 1e-8, overwrite: bool = False) -> Spectrum:
    """Full spectrum of a Hermitian matrix, in descending order.

    The input is symmetrised before the dense solve.  With ``overwrite`` a
    real symmetric input is handed to LAPACK in place, which keeps the
    memory footprint of the largest studies at a single matrix.

    Raises
    ------
    NotHermitian
        If ``max |A - A^H|`` exceeds ``tol`` times ``max(1, max |A|)``.
    """
    a = np.asarray(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotHermitian("expected a square matrix")
    n = a.shape[0]
    if n == 0:
        return Spectrum(np.zeros(0), 0)
    scale = max(1.0, float(np.max(np.abs(a))))
    if hermitian_deviation(a) > tol * scale:
        raise NotHermitian(f"matrix deviates from Hermitian by {hermitian_deviation(a):.3e}")
    if overwrite and np.isrealobj(a) and a.flags.c_contiguous:
        # a.T is Fortran ordered and, for a symmetric matrix, equal to a
        ev = sla.eigh(a.T, eigvals_only=True, overwrite_a=True, check_finite=False,
                      driver="evd")
    else:
        ev = np.linalg.eigvalsh(0.5 * (a + a.conj().T))
    return Spectrum(ev[::-1].copy(), n)


def real_symmetric_form(top_left, top_right, out=None):
    """Real symmetric matrix unitarily equivalent to ``[[X, Y], [Y^H, conj(X)]]``.

    Requires ``X`` Hermitian and ``Y`` complex symmetric.  Such a matrix
    commutes with the antiunitary ``(x, y) -> (conj y, conj x)``, whose
    fixed vectors ``((p + i q), (p - i q)) / sqrt 2`` give the real basis
    used here.  The result has the same eigenvalues at a fraction of the
    cost of a complex solve.
    """
    X = np.asarray(top_left)
    Y = np.asarray(top_right)
    n = X.shape[0]
    if out is None:
        out = np.empty((2 * n, 2 * n))
    fill_real_symmetric_rows(out, slice(0, n), X, Y)
    return out


def fill_real_symmetric_rows(out, rows: slice, X_rows, Y_rows):
    """Write the rows ``rows`` (and their mirror rows) of :func:`real_symmetric_form`.

    ``X_rows``/``Y_rows`` are the corresponding row blocks of ``X`` and ``Y``;
    used to assemble very large matrices chunk by chunk.
    """
    n = out.shape[0] // 2
    lo, hi = rows.start, rows.stop
    s = X_rows + Y_rows
    t = X_rows - Y_rows
    out[lo:hi, :n] = s.real
    out[lo:hi, n:] = -t.imag
    out[n + lo:n + hi, :n] = s.imag
    out[n + lo:n + hi, n:] = t.real
    return out


def schatten_q_norm(matrix, q: float) -> SchattenReport:
    """``(sum s_k**q)**(1/q)`` over the numerically nonzero singular values.

    Singular values come from a direct SVD; those below
    ``max(shape) * eps * s_max`` are rank noise and are set to zero, which
    matters for ``q < 1``.
    """
    if not q > 0:
        raise ValueError("q must be positive")
    t = np.atleast_2d(np.asarray(matrix))
    s = sla.svdvals(t, check_finite=False) if t.size else np.zeros(0)
    if s.size:
        s = np.where(s > max(t.shape) * np.finfo(float).eps * s[0], s, 0.0)
    value = float(np.sum(s ** q) ** (1.0 / q))
    return SchattenReport(q, value, s)


def _values(spectrum_or_matrix):
    if isinstance(spectrum_or_matrix, Spectrum):
        return spectrum_or_matrix.eigenvalues
    return hermitian_eigenvalues(spectrum_or_matrix).eigenvalues


def trace_function(matrix, f: Callable, clip: bool = True) -> float:
    """``sum f(lambda_i)`` over the spectrum; eigenvalues clipped to [0, 1] if asked."""
    ev = _values(matrix)
    if clip:
        ev = np.clip(ev, 0.0, 1.0)
    return float(np.sum(f(ev)))


def _masked_generic(a, mask, f):
    ev, vec = np.linalg.eigh(0.5 * (a + a.conj().T))
    fv = f(ev)
    rows = vec[mask]
    return float(np.real(np.sum((np.abs(rows) ** 2) * fv[None, :])))


def entropic_difference(A, mask, f: Callable, masked_trace: float | None = None,
                        alpha=None, region=None, kernel_id: str = "",
                        clip: bool = True) -> EntropicDifferenceResult:
    """``tr f(P A P) - tr P f(A) P`` for a node mask ``P``.

    ``A`` is a matrix or any object with a ``matrix`` attribute.  When
    ``masked_trace`` is supplied (the exact value from the kernel
    diagonal) it is used as is; otherwise the masked term is computed from
    a full eigendecomposition of ``A``.  An empty mask gives 0.
    """
    a = np.asarray(getattr(A, "matrix", A))
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return EntropicDifferenceResult(alpha, region, 0.0, 0.0, 0.0, kernel_id)
    sub = a[np.ix_(mask, mask)]
    restricted = trace_function(sub, f, clip=clip)
    if masked_trace is None:
        g = (lambda x: f(np.clip(x, 0.0, 1.0))) if clip else f
        masked_trace = _masked_generic(a, mask, g)
    return EntropicDifferenceResult(alpha, region, restricted, float(masked_trace),
                                    restricted - float(masked_trace), kernel_id)


def complement_duality_check(projection, mask, f: Callable | None = None, tol: float = 1e-10):
    """Return ``(tr f(P Pi P), tr f(Pc Pi Pc))`` for a Hermitian projection ``Pi``.

    ``f`` defaults to the binary entropy.  Both traces coincide because the
    nonzero eigenvalues ``mu`` of ``P Pi P`` and ``1 - mu`` of
    ``Pc Pi Pc`` pair up and ``f`` is symmetric about 1/2.
    """
    from .entropy import eta
    f = f or eta
    pi = np.asarray(projection)
    if hermitian_deviation(pi) > tol or np.max(np.abs(pi @ pi - pi)) > tol:
        raise NotProjection("input is not a Hermitian projection")
    mask = np.asarray(mask, dtype=bool)
    inside = pi[np.ix_(mask, mask)]
    outside = pi[np.ix_(~mask, ~mask)]
    t_in = trace_function(inside, f) if inside.size else 0.0
    t_out = trace_function(outside, f) if outside.size else 0.0
    return t_in, t_out


def sobolev_kernel_norm(kernel: Callable, interval, l: int = 1, n: int = 64,
                        derivative: Callable | None = None, h: float | None = None) -> float:
    """``theta_2`` of a kernel: ``theta_2**2 = int ||t(., u')||^2_{W^1_2} du'``.

    The u-derivative uses ``derivative`` when given and a central
    difference with step ``h`` otherwise.  Only ``l = 1`` is supported.
    """
    if l != 1:
        raise ValueError("only first-order Sobolev norms are implemented")
    from .opalpha import quadrature_nodes
    u, w = quadrature_nodes(interval, n)
    U, V = np.meshgrid(u, u, indexing="ij")
    k = np.asarray(kernel(U, V))
    if derivative is not None:
        dk = np.asarray(derivative(U, V))
    else:
        h = h or 1e-5 * max(1.0, interval.rho)
        dk = (np.asarray(kernel(U + h, V)) - np.asarray(kernel(U - h, V))) / (2 * h)
    inner = (w[:, None] * (np.abs(k) ** 2 + np.abs(dk) ** 2)).sum(axis=0)
    return float(np.sqrt(np.dot(w, inner)))
