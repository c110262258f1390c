"""Binary entropy function, Widom's U-functional and regularity diagnostics."""

import heapq
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DomainError, NonIntegrable


def eta(x):
    """Binary entropy in nats, ``-x ln x - (1-x) ln(1-x)`` on (0, 1) and 0 elsewhere.

    Accepts scalars or arrays; scalars come back as Python floats.
    """
    arr = np.asarray(x, dtype=float)
    out = np.zeros_like(arr)
    inside = (arr > 0.0) & (arr < 1.0)
    y = arr[inside]
    out[inside] = -y * np.log(y) - (1.0 - y) * np.log1p(-y)
    if out.ndim == 0:
        return float(out)
    return out


def eta_derivative(x, k: int = 1):
    """k-th derivative of :func:`eta` on (0, 1); k in {0, 1, 2}."""
    if k == 0:
        return eta(x)
    arr = np.asarray(x, dtype=float)
    if np.any((arr <= 0.0) | (arr >= 1.0)):
        raise DomainError("eta derivatives are only defined on (0, 1)")
    if k == 1:
        out = -np.log(arr) + np.log1p(-arr)
    elif k == 2:
        out = -1.0 / arr - 1.0 / (1.0 - arr)
    else:
        raise DomainError(f"derivative order {k} not supported")
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SpectralFunction:
    """A real function applied to operator spectra.

    ``singular_points`` and ``holder_exponent`` are descriptive; they are
    used by the regularity diagnostics and reported in study summaries.
    """

    evaluator: Callable
    name: str = "f"
    singular_points: Sequence[float] = field(default_factory=tuple)
    holder_exponent: float | None = None
    support_radius: float = 1.0

    def __call__(self, x):
        return self.evaluator(x)


def _quadratic(x):
    return x * (1.0 - x)


ETA = SpectralFunction(eta, "eta", (0.0, 1.0), 0.99, 1.0)
QUADRATIC = SpectralFunction(_quadratic, "x(1-x)", (), None, 1.0)
IDENTITY = SpectralFunction(lambda x: x, "x", (), None, 1.0)


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-10
    max_refinements: int = 30


_GL_LO = leggauss(10)
_GL_HI = leggauss(20)


def _gl(g, a, b, rule):
    x, w = rule
    half = 0.5 * (b - a)
    return half * np.dot(w, g(0.5 * (a + b) + half * x))


def adaptive_gauss_legendre(g, a: float, b: float, quad: QuadratureConfig = QuadratureConfig()):
    """Integrate ``g`` over [a, b] by global adaptive bisection.

    Every panel carries the difference of its 10- and 20-point
    Gauss-Legendre sums as error estimate; the panel with the largest
    estimate is bisected until the summed estimate drops below
    ``quad.abs_tol``.  Raises :class:`NonIntegrable` when a panel that
    needs splitting is already ``quad.max_refinements`` levels deep.
    """
    def panel(lo, hi, depth):
        fine = _gl(g, lo, hi, _GL_HI)
        err = abs(fine - _gl(g, lo, hi, _GL_LO))
        return (-err, lo, hi, depth, fine)

    heap = [panel(a, b, 0)]
    while -sum(p[0] for p in heap) > quad.abs_tol:
        neg_err, lo, hi, depth, _ = heapq.heappop(heap)
        if depth >= quad.max_refinements:
            raise NonIntegrable(
                f"no convergence on [{lo:.3g}, {hi:.3g}] after {depth} bisections "
                f"(error estimate {-neg_err:.2e})")
        mid = 0.5 * (lo + hi)
        heapq.heappush(heap, panel(lo, mid, depth + 1))
        heapq.heappush(heap, panel(mid, hi, depth + 1))
    return float(sum(p[4] for p in heap))


def u_functional(f, a: float = 1.0, quad: QuadratureConfig | None = None) -> float:
    """Widom's coefficient ``U(a; f) = int_0^1 (f(t a) - t f(a)) / (t (1 - t)) dt``.

    Both endpoint singularities are removed by substitution: ``t = s**2``
    on the lower half and ``t = 1 - s**2`` on the upper half, so the
    integrand only keeps the (integrable) roughness of ``f`` itself.

    Parameters
    ----------
    f : callable
        Vectorised real function with ``f(0) = 0``.
    a : float
        Symbol value at the jump.
    quad : QuadratureConfig, optional

    Returns
    -------
    float
    """
    quad = quad or QuadratureConfig()
    fa = float(np.asarray(f(np.asarray(a, dtype=float))))

    def lower(s):
        t = s * s
        return 2.0 * (f(t * a) - t * fa) / (s * (1.0 - t))

    def upper(s):
        t = 1.0 - s * s
        return 2.0 * (f(t * a) - t * fa) / (t * s)

    edge = np.sqrt(0.5)
    return (adaptive_gauss_legendre(lower, 0.0, edge, quad)
            + adaptive_gauss_legendre(upper, 0.0, edge, quad))


@dataclass(frozen=True)
class RegularityReport:
    sup_ratio: float
    finite: bool


def verify_eta_regularity(gamma: float, z: int, k: int, sample_count: int = 10_000,
                          samples=None) -> RegularityReport:
    """Sampled check of ``|eta^(k)(x)| <= C |x - z|**(gamma - k)`` near ``z``.

    By default ``sample_count`` distances are log-spaced in (1e-12, 1e-1).
    The bound is reported as finite when the sampled supremum is finite and
    is not attained at the sample closest to ``z`` (a ratio that still
    grows at the innermost sample signals an unbounded constant).
    """
    if not 0.0 < gamma < 1.0:
        raise DomainError("gamma must lie in (0, 1)")
    if z not in (0, 1):
        raise DomainError("z must be 0 or 1")
    if samples is None:
        dist = np.logspace(-12, -1, sample_count)
        samples = dist if z == 0 else 1.0 - dist
    x = np.atleast_1d(np.asarray(samples, dtype=float))
    dist = np.abs(x - z)
    ratio = np.zeros_like(x)
    nz = dist > 0
    if k == 0:
        vals = np.abs(np.atleast_1d(eta(x[nz])))
    else:
        vals = np.abs(np.atleast_1d(eta_derivative(x[nz], k)))
    ratio[nz] = vals * dist[nz] ** (k - gamma)
    sup = float(ratio.max())
    closest = int(np.argmin(np.where(nz, dist, np.inf))) if nz.any() else 0
    growing = nz.sum() > 1 and ratio[closest] >= sup
    return RegularityReport(sup, bool(np.isfinite(sup) and not growing))
