"""Scaling studies of the entropic difference and derived entropies.

The limiting path discretises the two diagonal channels separately.  Both
are translation invariant, so on a grid that is symmetric about its
centre the restricted matrix ``A`` satisfies ``R A R = conj(A)`` for the
reversal ``R``; splitting the nodes into mirrored halves turns ``A`` into
the real symmetric form of :func:`spectral.real_symmetric_form` of the
same size, which is diagonalised instead of the complex matrix.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .entropy import ETA, QuadratureConfig, SpectralFunction, adaptive_gauss_legendre, u_functional
from .errors import ConstraintViolation, DomainError
from .geometry import BlackHole
from .kernels import (FullKernel, _panel_rule, assemble_full_kernel, error_kernel_bound,
                      eta_limiting_kernel, full_masked_trace, kernel_span, limiting_kernel)
from .opalpha import (DEFAULT_PER_WIDTH, Interval, default_node_count, projection_window_kernel,
                      quadrature_nodes)
from .radial import U_MAX, U_START, T12Strategy, fundamental_solutions
from .spectral import (EntropicDifferenceResult, Spectrum, fill_real_symmetric_rows,
                       hermitian_eigenvalues, real_symmetric_form, schatten_q_norm, trace_function)


@dataclass(frozen=True)
class ScalingStudyConfig:
    M: float = 1.0
    m: float = 0.1
    lam: float | None = None          # None selects the limiting path
    rho: float = 1.0
    alpha_list: tuple = (32.0, 64.0, 128.0, 256.0, 512.0)
    rule: str = "gauss-legendre"
    per_width: float = DEFAULT_PER_WIDTH
    t12: T12Strategy = field(default_factory=T12Strategy)
    u0: float = 0.0

    def __post_init__(self):
        alphas = np.asarray(self.alpha_list, dtype=float)
        if alphas.size == 0 or np.any(alphas < 2) or np.any(np.diff(alphas) <= 0):
            raise DomainError("alpha_list must be strictly increasing with alpha >= 2")
        if not self.rho > 0:
            raise DomainError("rho must be positive")
        if not self.M > 0:
            raise DomainError("M must be positive")

    @property
    def limiting(self) -> bool:
        return self.lam is None

    @property
    def region(self) -> Interval:
        return Interval(self.u0, self.rho)


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    r_squared: float
    residuals: np.ndarray
    slope_err: float = 0.0


def fit_log_alpha(alphas, values) -> RegressionResult:
    """Least squares of ``values`` against ``ln alpha``."""
    x = np.log(np.asarray(alphas, dtype=float))
    y = np.asarray(values, dtype=float)
    if len(x) < 2:
        raise DomainError("need at least two points for a fit")
    A = np.stack([x, np.ones_like(x)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    if len(x) > 2:
        sigma2 = float(np.sum(resid ** 2)) / (len(x) - 2)
        err = float(np.sqrt(sigma2 / np.sum((x - x.mean()) ** 2)))
    else:
        err = 0.0
    return RegressionResult(float(slope), float(intercept), r2, resid, err)


# -- masked traces ------------------------------------------------------------

def symbol_weight_integral(f, quad: QuadratureConfig | None = None) -> float:
    """``int_0^1 f(s) / s ds``; with ``s = sigma**2`` the integrand stays bounded."""
    quad = quad or QuadratureConfig(abs_tol=1e-13)
    g = lambda sig: 2.0 * f(sig * sig) / np.where(sig == 0, 1.0, sig)
    return adaptive_gauss_legendre(g, 0.0, 1.0, quad)


def limiting_masked_density(f, M: float, alpha: float) -> float:
    """Diagonal of ``f(Op_alpha(a))`` for either limiting channel.

    ``(alpha / 2 pi) int f(exp(M xi)) dxi = (alpha / (2 pi M)) int_0^1 f(s)/s ds``.
    """
    return alpha / (2 * np.pi * M) * symbol_weight_integral(f)


# -- limiting spectra ------------------------------------------------------------

def mirrored_real_form(kernel_of_delta, nodes, weights):
    """Real symmetric matrix with the spectrum of ``sqrt(w) k(u - v) sqrt(w)``.

    Needs a node set symmetric about its centre, symmetric weights and
    ``k(-x) = conj(k(x))``.
    """
    nodes = np.asarray(nodes, dtype=float)
    n = len(nodes)
    if n % 2:
        raise DomainError("mirrored reduction needs an even node count")
    centre = 0.5 * (nodes[0] + nodes[-1])
    half = n // 2
    first = nodes[:half]
    mirror = nodes[half:][::-1]
    if np.max(np.abs(first + mirror - 2 * centre)) > 1e-9 * max(1.0, abs(centre)):
        raise DomainError("node set is not symmetric about its centre")
    s = np.sqrt(np.asarray(weights, dtype=float)[:half])
    rel = first - centre
    X = s[:, None] * kernel_of_delta(rel[:, None] - rel[None, :]) * s[None, :]
    Y = s[:, None] * kernel_of_delta(rel[:, None] + rel[None, :]) * s[None, :]
    return real_symmetric_form(X, Y)


@lru_cache(maxsize=32)
def limiting_spectrum(which: int, M: float, alpha: float, rho: float,
                      per_width: float = DEFAULT_PER_WIDTH, rule: str = "gauss-legendre",
                      n: int | None = None, u0: float = 0.0) -> np.ndarray:
    """Eigenvalues of the restricted limiting operator of one channel (cached).

    Translation invariance makes ``u0`` irrelevant; it only moves the nodes.
    """
    region = Interval(u0, rho)
    n = n or default_node_count(alpha, rho, M, per_width)
    nodes, weights = quadrature_nodes(region, n, rule)
    kernel = lambda d: limiting_kernel(which, M, alpha, d, 0.0)
    if len(nodes) % 2 == 0:
        R = mirrored_real_form(kernel, nodes, weights)
        ev = hermitian_eigenvalues(R, overwrite=True).eigenvalues
    else:
        s = np.sqrt(weights)
        A = s[:, None] * kernel(nodes[:, None] - nodes[None, :]) * s[None, :]
        ev = hermitian_eigenvalues(A).eigenvalues
    ev.setflags(write=False)
    return ev


def limiting_difference(which: int, f: SpectralFunction, cfg: ScalingStudyConfig,
                        alpha: float) -> EntropicDifferenceResult:
    """``tr f(chi A chi) - tr chi f(A) chi`` for one limiting channel."""
    ev = limiting_spectrum(which, cfg.M, float(alpha), cfg.rho, cfg.per_width, cfg.rule,
                           None, cfg.u0)
    restricted = trace_function(_spectrum(ev), f)
    masked = cfg.rho * limiting_masked_density(f, cfg.M, alpha)
    return EntropicDifferenceResult(float(alpha), cfg.region, restricted, masked,
                                    restricted - masked, f"limiting-{which}")


def _spectrum(ev):
    return Spectrum(np.asarray(ev), len(ev))


@dataclass(frozen=True)
class SpectralMappingCheck:
    trace_of_image: float      # sum of eigenvalues of the discretised Op_alpha(f(a))
    trace_of_mapped: float     # sum of f over eigenvalues of the discretised Op_alpha(a)
    nodes: int

    @property
    def relative_deviation(self) -> float:
        return abs(self.trace_of_mapped / self.trace_of_image - 1.0)


def spectral_mapping_check(which: int, M: float, alpha: float, rho: float,
                           per_width: float = 4.0) -> SpectralMappingCheck:
    """Compare ``Op_alpha(eta(a))`` with ``eta(Op_alpha(a))`` restricted to a length ``rho``.

    Both matrices live on the same node set; eigenvalues of the
    discretised ``Op_alpha(a)`` are clipped to ``[0, 1]`` before ``eta``
    is applied.  The
    gap is the entropic difference, which grows like ``ln alpha`` while
    both traces grow like ``alpha rho``.
    """
    n = default_node_count(alpha, rho, M, per_width)
    n += n % 2
    mapped = trace_function(_spectrum(limiting_spectrum(which, M, float(alpha), rho,
                                                        per_width, "gauss-legendre", n)), ETA)
    nodes, weights = quadrature_nodes(Interval(0.0, rho), n)
    R = mirrored_real_form(lambda d: eta_limiting_kernel(which, M, alpha, d, 0.0), nodes, weights)
    image = float(np.sum(hermitian_eigenvalues(R, overwrite=True).eigenvalues))
    return SpectralMappingCheck(image, mapped, n)


@dataclass(frozen=True)
class ScalingStudy:
    config: ScalingStudyConfig
    function: str
    per_channel: dict          # which -> list of EntropicDifferenceResult
    totals: list               # d_1 + d_2 per alpha
    fit: RegressionResult
    channel_fits: dict


def scaling_study_limiting(cfg: ScalingStudyConfig, f: SpectralFunction = ETA,
                           channels: Sequence[int] = (1, 2)) -> ScalingStudy:
    """Entropic difference of the limiting channels against ``ln alpha``."""
    per = {w: [limiting_difference(w, f, cfg, a) for a in cfg.alpha_list] for w in channels}
    totals = [sum(per[w][i].d_value for w in channels) for i in range(len(cfg.alpha_list))]
    fits = {w: fit_log_alpha(cfg.alpha_list, [r.d_value for r in per[w]]) for w in channels}
    return ScalingStudy(cfg, getattr(f, "name", "f"), per, totals,
                        fit_log_alpha(cfg.alpha_list, totals), fits)


@dataclass(frozen=True)
class WidomComparison:
    predicted_slope: float
    measured_slope: float
    fit: RegressionResult

    @property
    def relative_error(self) -> float:
        if self.predicted_slope == 0:
            return abs(self.measured_slope)
        return abs(self.measured_slope / self.predicted_slope - 1.0)


def widom_prediction(f: SpectralFunction, which: int, cfg: ScalingStudyConfig) -> WidomComparison:
    """Predicted ``U(1; f) / (2 pi**2)`` against the measured slope of one channel.

    One symbol jump (at ``xi = 0``) times two interval endpoints gives
    ``2 U(1; f) / (4 pi**2)``.
    """
    predicted = u_functional(f, 1.0) / (2 * np.pi ** 2)
    study = scaling_study_limiting(cfg, f, channels=(which,))
    fit = study.channel_fits[which]
    return WidomComparison(predicted, fit.slope, fit)


# -- full path ----------------------------------------------------------------

def full_spectrum(kernel: FullKernel, region: Interval, n: int, rule: str = "gauss-legendre",
                  tol: float = 1e-10, chunk: int = 512) -> np.ndarray:
    """Eigenvalues of the restricted two-channel plane-wave kernel.

    The real symmetric form is assembled ``chunk`` rows at a time, which
    requires ``K22 = conj(K11)`` to ``tol`` (relative); if a chunk violates
    it the complex Hermitian solver is used instead.
    """
    nodes, weights = quadrature_nodes(region, n, rule)
    s = np.sqrt(weights)
    R = np.empty((2 * n, 2 * n))
    for lo in range(0, n, chunk):
        rows = slice(lo, min(n, lo + chunk))
        k11, k12, k22 = kernel.blocks(nodes, rows)
        scale = max(1.0, float(np.max(np.abs(k11))))
        if np.max(np.abs(k22 - np.conj(k11))) > tol * scale:
            del R
            return _full_spectrum_complex(kernel, nodes, s)
        sr = s[rows, None]
        fill_real_symmetric_rows(R, rows, sr * k11 * s[None, :], sr * k12 * s[None, :])
    return hermitian_eigenvalues(R, overwrite=True).eigenvalues


def _full_spectrum_complex(kernel, nodes, s):
    k11, k12, k22 = kernel.blocks(nodes)
    S = s[:, None] * s[None, :]
    H = np.block([[k11 * S, k12 * S], [(k12 * S).conj().T, k22 * S]])
    return hermitian_eigenvalues(H).eigenvalues


@dataclass(frozen=True)
class FullDifference:
    result: EntropicDifferenceResult
    eps: float
    u0: float
    t12: complex
    remainder_bound: float
    nodes: int


def cached_band_kernel(mode, m: float, eps: float, region: Interval, bh: BlackHole,
                       t12: complex = 0j, label: tuple = (0.5, 1), directory=None,
                       tol: float = 1e-10) -> FullKernel:
    """Plane-wave kernel whose evanescent-band data come from the solution cache.

    Each band node is solved on its own (inward from ``U_MAX M``) and
    stored under ``(M, m, k, n, w, tol, u_start, u_end)``; ``label`` is
    the mode's ``(k, n)``.  Cold and warm runs share this code path, so a
    replayed cache reproduces the cold kernel exactly.
    """
    from .store import CacheKey, cached_solution

    lam = float(getattr(mode, "lam", mode))
    M = bh.mass
    u_start, u_end = U_START * M, U_MAX * M
    width = np.pi / (2.0 * kernel_span(region))
    nodes, weights = _panel_rule(-m, 0.0, min(width, m))
    data = np.empty((len(nodes), 2), dtype=complex)
    for i, w in enumerate(nodes):
        key = CacheKey(M, m, float(label[0]), int(label[1]), float(w), tol, u_start, u_end)
        sol = cached_solution(key, lambda: fundamental_solutions(
            w, lam, m, bh, u_start, u_end, tol, grid=np.array([u_start, u_end])).first, directory)
        data[i] = sol.f0
    return FullKernel(lam, m, eps, bh, kernel_span(region), complex(t12), "projection",
                      nodes, weights, data)


def full_path_difference(mode, m: float, eps: float, region: Interval, bh=None,
                         t12: T12Strategy | None = None, per_width: float = 4.0,
                         rule: str = "gauss-legendre", n: int | None = None,
                         cache=None, label: tuple = (0.5, 1)) -> FullDifference:
    """Entropic difference of the mode kernel on ``region`` with exact masked term.

    With ``cache`` (a directory) the band data go through
    :func:`cached_band_kernel`.
    """
    bh = BlackHole() if bh is None else (bh if isinstance(bh, BlackHole) else BlackHole(float(bh)))
    t12 = t12 or T12Strategy()
    M = bh.mass
    alpha = M / eps
    n = n or default_node_count(alpha, region.rho, M, per_width)
    if cache is not None:
        kernel = cached_band_kernel(mode, m, eps, region, bh, t12.t12, label, cache)
    else:
        kernel = assemble_full_kernel(mode, m, eps, region, bh, t12)
    ev = full_spectrum(kernel, region, n, rule)
    restricted = trace_function(_spectrum(ev), ETA)
    masked = full_masked_trace(eps, region.rho)
    res = EntropicDifferenceResult(alpha, region, restricted, masked, restricted - masked,
                                   f"full(eps={eps!r},t12={t12.t12!r})")
    return FullDifference(res, eps, region.u0, t12.t12,
                          error_kernel_bound(mode, m, eps, region, bh), len(ev) // 2)


def limiting_pair_difference(M: float, alpha: float, region: Interval, n: int,
                             rule: str = "gauss-legendre") -> float:
    """``d_1 + d_2`` of the limiting channels on exactly ``n`` nodes."""
    total = 0.0
    for which in (1, 2):
        ev = limiting_spectrum(which, M, alpha, region.rho, DEFAULT_PER_WIDTH, rule, n, region.u0)
        total += trace_function(_spectrum(ev), ETA) - region.rho * limiting_masked_density(ETA, M, alpha)
    return total


@dataclass(frozen=True)
class U0Study:
    table: dict               # (strategy label, u0) -> FullDifference
    stabilization: float      # |d(last) - d(previous)| / |d(last)| for the first strategy
    spread: float             # max - min across strategies at the last u0, relative


def _label(strategy: T12Strategy) -> str:
    return f"{strategy.kind}:{complex(strategy.value)!r}"


def u0_limit_study_full(mode, m: float, eps: float, u0_list: Sequence[float], rho: float,
                        strategies: Sequence[T12Strategy] = (T12Strategy(),), bh=None,
                        per_width: float = 6.0) -> U0Study:
    """Full-path ``d`` as the region moves toward the horizon, per ``t12`` strategy.

    Strategies other than the first are only evaluated at the last ``u0``.
    """
    u0_list = [float(u) for u in u0_list]
    if any(b >= a for a, b in zip(u0_list, u0_list[1:])):
        raise DomainError("u0_list must be decreasing")
    M = bh.mass if isinstance(bh, BlackHole) else (1.0 if bh is None else float(bh))
    if u0_list[0] > -10 * M:
        raise DomainError("u0 values must lie at or below -10 M")
    table = {}
    first = strategies[0]
    for u0 in u0_list:
        table[(_label(first), u0)] = full_path_difference(mode, m, eps, Interval(u0, rho), bh,
                                                          first, per_width)
    for s in strategies[1:]:
        table[(_label(s), u0_list[-1])] = full_path_difference(mode, m, eps,
                                                               Interval(u0_list[-1], rho), bh, s,
                                                               per_width)
    last = table[(_label(first), u0_list[-1])].result.d_value
    stab = 0.0
    if len(u0_list) > 1:
        prev = table[(_label(first), u0_list[-2])].result.d_value
        stab = abs(last - prev) / abs(last)
    finals = [table[(_label(s), u0_list[-1])].result.d_value for s in strategies]
    spread = (max(finals) - min(finals)) / abs(last)
    return U0Study(table, stab, spread)


# -- Schatten growth -----------------------------------------------------------

@dataclass(frozen=True)
class SchattenPoint:
    alpha: float
    value: float          # ||chi_K P (1 - chi_K)||_q^q on the padded complement
    exact: float          # same from the spectrum of chi_K P chi_K
    padded_twice: float   # value with the padding doubled


@dataclass(frozen=True)
class SchattenStudy:
    q: float
    points: list
    fit: RegressionResult


def _window_block(window, alpha, rows, row_w, cols, col_w):
    s_r, s_c = np.sqrt(row_w), np.sqrt(col_w)
    k = projection_window_kernel(window[0], window[1], alpha, rows[:, None], cols[None, :])
    return s_r[:, None] * k * s_c[None, :]


def _complement_nodes(K: Interval, pad: float, per_unit: float):
    left = Interval(K.lo, pad)
    right = Interval(K.hi + pad, pad)
    nl, wl = quadrature_nodes(left, max(16, int(np.ceil(per_unit * pad))))
    nr, wr = quadrature_nodes(right, max(16, int(np.ceil(per_unit * pad))))
    return np.concatenate([nl, nr]), np.concatenate([wl, wr])


def schatten_cross_norm(K: Interval, window, alpha: float, q: float, pad_factor: float = 5.0,
                        nodes_per_alpha: float = 1.0) -> tuple:
    """``||chi_K P (chi_{K+} - chi_K)||_q^q`` and the exact ``sum (mu (1 - mu))**(q/2)``.

    The padded complement is ``K+`` minus ``K`` with ``K+`` extending
    ``pad_factor |K|`` on both sides; the q-norm uses the
    singular values of the ``K x complement`` block.  The exact value uses the
    eigenvalues ``mu`` of ``chi_K P chi_K``: for a projection the squared
    singular values of ``chi_K P (1 - chi_K)`` are ``mu - mu**2``.
    """
    per_unit = nodes_per_alpha * alpha
    nk, wk = quadrature_nodes(K, max(16, int(np.ceil(per_unit * K.rho))))
    nc, wc = _complement_nodes(K, pad_factor * K.rho, per_unit)
    B = _window_block(window, alpha, nk, wk, nc, wc)
    value = schatten_q_norm(B, q).value ** q
    T = _window_block(window, alpha, nk, wk, nk, wk)
    mu = np.clip(hermitian_eigenvalues(T).eigenvalues, 0.0, 1.0)
    exact = float(np.sum((mu * (1.0 - mu)) ** (q / 2.0)))
    return value, exact


def schatten_growth_study(K: Interval, window, q: float, alpha_list: Sequence[float],
                          pad_factor: float = 5.0, nodes_per_alpha: float = 1.0) -> SchattenStudy:
    """Fit of ``||chi_K P_{J,alpha} (1 - chi_K)||_q^q`` against ``ln alpha``."""
    if pad_factor < 5:
        raise DomainError("the padding must be at least 5 |K|")
    points = []
    for alpha in alpha_list:
        value, exact = schatten_cross_norm(K, window, alpha, q, pad_factor, nodes_per_alpha)
        twice, _ = schatten_cross_norm(K, window, alpha, q, 2 * pad_factor, nodes_per_alpha)
        points.append(SchattenPoint(float(alpha), value, exact, twice))
    fit = fit_log_alpha(alpha_list, [p.value for p in points])
    return SchattenStudy(q, points, fit)


# -- entropies ------------------------------------------------------------------

def mode_entropy(cfg: ScalingStudyConfig, per_width_full: float = 6.0) -> float:
    """``S_kn``: half the ``ln alpha`` slope of the mode's entropic difference.

    The limiting path sums both channels; the full path (``cfg.lam`` set)
    uses ``eps = M / alpha`` for each alpha on the region ``cfg.region``.
    """
    if cfg.limiting:
        return scaling_study_limiting(cfg).fit.slope / 2.0
    values = [full_path_difference(cfg.lam, cfg.m, cfg.M / a, cfg.region, BlackHole(cfg.M),
                                   cfg.t12, per_width_full).result.d_value
              for a in cfg.alpha_list]
    return fit_log_alpha(cfg.alpha_list, values).slope / 2.0


@dataclass(frozen=True)
class BHEntropyResult:
    occupied_count: int
    S_BH: float
    heuristic: bool


def bh_entropy(count: int | None = None, M: float | None = None,
               eps: float | None = None) -> BHEntropyResult:
    """``count / 6``; with ``M`` and ``eps`` the count is ``round(M**2 / eps**2)``."""
    if count is None:
        if M is None or eps is None or not eps > 0:
            raise DomainError("give a count or both M and eps > 0")
        count = int(round(M * M / (eps * eps)))
        heuristic = True
    else:
        heuristic = False
    if count < 0:
        raise ConstraintViolation("the occupied count cannot be negative")
    return BHEntropyResult(int(count), count / 6, heuristic)
