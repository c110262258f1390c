"""Discretisation of Op_alpha on intervals, spectral windows and symbol checks."""

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DomainError

PANEL_ORDER = 16
DEFAULT_PER_WIDTH = 12.0


@dataclass(frozen=True)
class Interval:
    """The region ``(u0 - rho, u0)``."""

    u0: float
    rho: float

    def __post_init__(self):
        if not self.rho > 0:
            raise DomainError("interval length rho must be positive")

    @property
    def lo(self) -> float:
        return self.u0 - self.rho

    @property
    def hi(self) -> float:
        return self.u0

    def shifted(self, c: float) -> "Interval":
        return Interval(self.u0 + c, self.rho)

    def padded(self, pad: float) -> "Interval":
        """Enclosing interval with ``pad`` added on both sides."""
        return Interval(self.u0 + pad, self.rho + 2.0 * pad)

    def contains(self, u):
        u = np.asarray(u)
        return (u > self.lo) & (u < self.hi)


def default_node_count(alpha: float, rho: float, M: float = 1.0,
                       per_width: float = DEFAULT_PER_WIDTH) -> int:
    """``per_width`` nodes per kernel width ``M / alpha`` over a length ``rho``."""
    return max(16, int(np.ceil(per_width * alpha * rho / M)))


def quadrature_nodes(interval: Interval, n: int, rule: str = "gauss-legendre",
                     order: int = PANEL_ORDER):
    """Nodes and weights on ``interval``.

    ``gauss-legendre`` uses equal composite panels of ``order`` points, so
    the node count is ``n`` rounded up to a multiple of ``order``;
    ``trapezoid`` uses ``n`` equispaced nodes with halved end weights.
    """
    if n < 2:
        raise DomainError("need at least two nodes")
    a, b = interval.lo, interval.hi
    if rule == "gauss-legendre":
        panels = max(1, int(np.ceil(n / order)))
        x, w = leggauss(order)
        edges = np.linspace(a, b, panels + 1)
        half = 0.5 * np.diff(edges)
        mids = 0.5 * (edges[:-1] + edges[1:])
        nodes = (mids[:, None] + half[:, None] * x[None, :]).ravel()
        weights = (half[:, None] * w[None, :]).ravel()
        return nodes, weights
    if rule == "trapezoid":
        nodes = np.linspace(a, b, n)
        weights = np.full(n, (b - a) / (n - 1))
        weights[[0, -1]] *= 0.5
        return nodes, weights
    raise DomainError(f"unknown quadrature rule {rule!r}")


@dataclass(frozen=True)
class DiscretizedOperator:
    """Symmetrised Nystrom matrix ``sqrt(w_i) K(u_i, u_j) sqrt(w_j)``.

    For two-channel kernels the matrix is channel-major: the first
    ``len(nodes)`` rows belong to channel 1.
    """

    nodes: np.ndarray
    weights: np.ndarray
    matrix: np.ndarray
    channels: int = 1
    symmetrized: bool = True

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def mask(self, region: Interval) -> np.ndarray:
        """Row mask of the nodes inside ``region`` (repeated per channel)."""
        inside = region.contains(self.nodes)
        return np.tile(inside, self.channels)


def kernel_matrix(kernel: Callable, nodes, weights, channels: int | None = None):
    """Evaluate ``kernel`` on all node pairs and apply the weight similarity.

    A scalar kernel returns an ``(n, n)`` array; a two-channel kernel
    returns ``(2, 2, n, n)``.
    """
    s = np.sqrt(weights)
    U, V = np.meshgrid(nodes, nodes, indexing="ij")
    k = np.asarray(kernel(U, V))
    if k.ndim == 2:
        return s[:, None] * k * s[None, :], 1
    if k.ndim == 4 and k.shape[:2] == (2, 2):
        n = len(nodes)
        out = np.empty((2 * n, 2 * n), dtype=np.result_type(k, float))
        for a in range(2):
            for b in range(2):
                out[a * n:(a + 1) * n, b * n:(b + 1) * n] = s[:, None] * k[a, b] * s[None, :]
        return out, 2
    raise DomainError(f"kernel returned an array of shape {k.shape}")


def nystrom_discretize(kernel: Callable, region: Interval, n: int | None = None,
                       rule: str = "gauss-legendre", alpha: float | None = None,
                       M: float = 1.0, per_width: float = DEFAULT_PER_WIDTH) -> DiscretizedOperator:
    """Nystrom discretisation of an integral operator restricted to ``region``.

    ``n`` defaults to :func:`default_node_count` and then needs ``alpha``.
    """
    if n is None:
        if alpha is None:
            raise DomainError("either n or alpha is required")
        n = default_node_count(alpha, region.rho, M, per_width)
    if n < 16:
        raise DomainError("at least 16 nodes are required")
    nodes, weights = quadrature_nodes(region, n, rule)
    matrix, channels = kernel_matrix(kernel, nodes, weights)
    return DiscretizedOperator(nodes, weights, matrix, channels)


def projection_window_kernel(j1: float, j2: float, alpha: float, u, v):
    """Kernel of ``Op_alpha`` of the indicator of ``(j1, j2)``.

    Written as a phase times ``sinc`` so the diagonal needs no special case.
    """
    if not j1 < j2:
        raise DomainError("window needs j1 < j2")
    delta = np.asarray(u) - np.asarray(v)
    centre = 0.5 * (j1 + j2)
    width = j2 - j1
    return (alpha / (2 * np.pi)) * width * np.exp(-1j * alpha * centre * delta) \
        * np.sinc(alpha * width * delta / (2 * np.pi))


@dataclass(frozen=True)
class TranslationReport:
    shift: float
    trace: tuple
    schatten: dict  # q -> (original, shifted)

    @property
    def max_deviation(self) -> float:
        devs = [abs(self.trace[0] - self.trace[1])]
        devs += [abs(a - b) for a, b in self.schatten.values()]
        return max(devs)


def translate_check(kernel: Callable, region: Interval, c: float, n: int = 256,
                    qs: Sequence[float] = (0.5, 1.0), rule: str = "gauss-legendre",
                    shifted_kernel: Callable | None = None) -> TranslationReport:
    """Compare ``chi Op(a) chi`` on ``region`` with its translate by ``c``.

    The translated operator uses ``shifted_kernel`` when given and
    ``kernel(u - c, v - c)`` otherwise, i.e. the symbol translated back.
    """
    from .spectral import schatten_q_norm

    if shifted_kernel is None:
        def shifted_kernel(U, V):
            return kernel(U - c, V - c)
    a = nystrom_discretize(kernel, region, n, rule)
    b = nystrom_discretize(shifted_kernel, region.shifted(c), n, rule)
    trace = (complex(np.trace(a.matrix)), complex(np.trace(b.matrix)))
    schatten = {}
    for q in qs:
        schatten[q] = (schatten_q_norm(a.matrix, q).value, schatten_q_norm(b.matrix, q).value)
    return TranslationReport(c, trace, schatten)


def fourier_multiplier(symbol: Callable, alpha: float, n: int, length: float):
    """Dense matrix of ``Op_alpha(symbol)`` for a u-independent symbol on a periodic box.

    The box has ``n`` equispaced nodes over ``length``; the symbol is
    sampled at the box frequencies ``xi_k = 2 pi k / (alpha length)``.
    """
    k = np.fft.fftfreq(n, d=1.0 / n)
    xi = 2 * np.pi * k / (alpha * length)
    F = np.fft.fft(np.eye(n), norm="ortho")
    return F.conj().T @ (np.asarray(symbol(xi), dtype=complex)[:, None] * F)


def symbol_product_check(symbol: Callable, window: tuple, alpha: float, n: int,
                         length: float | None = None) -> float:
    """Relative Frobenius residual of ``Op(a) Op(chi_J) - Op(a chi_J)``.

    ``window`` is ``(j1, j2)``; infinite ends are allowed.  All three
    operators are realised on the same periodic box.
    """
    j1, j2 = window
    length = length if length is not None else n / (4.0 * alpha)

    def indicator(xi):
        return ((xi > j1) & (xi < j2)).astype(float)

    a = fourier_multiplier(symbol, alpha, n, length)
    p = fourier_multiplier(indicator, alpha, n, length)
    ap = fourier_multiplier(lambda xi: symbol(xi) * indicator(xi), alpha, n, length)
    scale = np.linalg.norm(ap)
    if scale == 0.0:
        return float(np.linalg.norm(a @ p))
    return float(np.linalg.norm(a @ p - ap) / scale)


@dataclass(frozen=True)
class SymbolNormSpec:
    orders: tuple
    scales: tuple
    value: float


def _fd(values, spacing, axis, count):
    for _ in range(count):
        values = np.gradient(values, spacing, axis=axis, edge_order=2)
    return values


def symbol_norm(symbol: Callable, orders: tuple, scales: tuple, xi,
                u=None) -> SymbolNormSpec:
    """Sampled ``N^{(n,m,k)}(b; l, r)``.

    The maximum over ``n' <= n, m' <= m, k' <= k`` of
    ``l**(n'+m') r**k' sup |d_u^n' d_v^m' d_xi^k' b|`` with derivatives by
    repeated second-order finite differences on uniform grids.  Without a
    ``u`` grid the symbol is called as ``symbol(xi)`` and all position
    derivatives vanish; otherwise as ``symbol(u, v, xi)``.
    """
    n_ord, m_ord, k_ord = orders
    l, r = scales
    xi = np.asarray(xi, dtype=float)
    dxi = xi[1] - xi[0]
    if u is None:
        base = np.asarray(symbol(xi))
        best = 0.0
        for kk in range(k_ord + 1):
            best = max(best, r ** kk * float(np.max(np.abs(_fd(base, dxi, 0, kk)))))
        return SymbolNormSpec(tuple(orders), tuple(scales), best)
    u = np.asarray(u, dtype=float)
    du = u[1] - u[0]
    U, V, X = np.meshgrid(u, u, xi, indexing="ij")
    base = np.asarray(symbol(U, V, X))
    best = 0.0
    for nn in range(n_ord + 1):
        for mm in range(m_ord + 1):
            for kk in range(k_ord + 1):
                d = _fd(_fd(_fd(base, du, 0, nn), du, 1, mm), dxi, 2, kk)
                best = max(best, l ** (nn + mm) * r ** kk * float(np.max(np.abs(d))))
    return SymbolNormSpec(tuple(orders), tuple(scales), best)
