"""Kernel families: limiting kernels, their entropy transforms and the full kernel.

Frequencies follow one convention throughout: every contribution of the
regularised negative-energy projection is written as an integral over
``w < 0`` with damping ``exp(eps w)``.  Entries that are naturally
supported on positive frequencies are mapped there by ``w -> -w``.

For a two-channel kernel the blocks are ``K11(u, v)``, ``K12(u, v)``,
``K21 = K12(v, u)^*`` and ``K22``.  In the deep-horizon region

* ``K11`` depends on ``u - v`` and carries ``exp(-i w (u - v))``,
* ``K22`` carries ``exp(+i w (u - v))``,
* ``K12`` depends on ``u + v`` and carries ``exp(-i w (u + v))``.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate, special

from .entropy import QuadratureConfig, adaptive_gauss_legendre, eta
from .errors import DomainError, MissingSolution, QuadratureBudgetExceeded
from .geometry import BlackHole, _mass
from .radial import (T12Strategy, U_START, batch_horizon_data, born_remainders,
                     horizon_bound, transmission_coefficients)

ZETA2 = np.pi ** 2 / 6.0
DAMPING_CUTOFF = 1e-12
BAND_ORDER = 16


# -- limiting kernels ---------------------------------------------------------

def limiting_kernel(which: int, M: float, alpha: float, u, v):
    """Fourier transform of ``exp(M xi)`` on ``xi < 0`` (channel 1) or its mirror (channel 2).

    ``(alpha/2pi) / (M -+ i alpha (u - v))``.
    """
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    delta = np.asarray(u) - np.asarray(v)
    if which == 1:
        return (alpha / (2 * np.pi)) / (M - 1j * alpha * delta)
    if which == 2:
        return (alpha / (2 * np.pi)) / (M + 1j * alpha * delta)
    raise DomainError("which must be 1 or 2")


def _eta_transform_series(w):
    # small |w|: 1/(1-w)^2 + sum_n w^n sum_{i=2}^{n+2} (zeta(i) - 1)
    out = 1.0 / (1.0 - w) ** 2
    partial = 0.0
    power = np.ones_like(w)
    # partial sums are below 1, so truncation error is |w|**40
    for n in range(40):
        partial = partial + (special.zeta(n + 2) - 1.0)
        out = out + power * partial
        power = power * w
    return out


def eta_exponential_transform(z):
    """``int_0^inf eta(exp(-t)) exp(i z t) dt`` in closed form.

    With ``w = i z`` this is
    ``1/(1-w)**2 - (psi(1-w) + gamma)/w - (psi(2-w) + gamma)/(1-w)``;
    a power series is used for ``|w| < 0.1``, where the closed form loses
    digits to cancellation.  The value at ``z = 0`` is
    ``pi**2 / 6``.
    """
    z = np.asarray(z, dtype=float)
    w = 1j * z
    small = np.abs(w) < 0.1
    safe = np.where(small, 0.5, w)
    g = np.euler_gamma
    out = (1.0 / (1.0 - safe) ** 2 - (special.psi(1.0 - safe) + g) / safe
           - (special.psi(2.0 - safe) + g) / (1.0 - safe))
    if small.any():
        out = np.where(small, _eta_transform_series(np.where(small, w, 0.0)), out)
    return out


def _eta_limiting_quad(M, alpha, delta, quad: QuadratureConfig):
    # (alpha/2pi) int_0^L eta(exp(-M s)) exp(i alpha s delta) ds; the tail beyond
    # L = 60/M is below 1e-24
    g = lambda s: eta(np.exp(-M * s))
    k = alpha * delta
    length = 60.0 / M
    limit = max(200, 10 * quad.max_refinements)
    if k == 0.0:
        val, err = integrate.quad(g, 0.0, length, epsabs=quad.abs_tol, limit=limit)
    else:
        re, e1 = integrate.quad(g, 0.0, length, weight="cos", wvar=k, epsabs=quad.abs_tol,
                                limit=limit)
        im, e2 = integrate.quad(g, 0.0, length, weight="sin", wvar=k, epsabs=quad.abs_tol,
                                limit=limit)
        val, err = complex(re, im), e1 + e2
    if not err < 1e3 * quad.abs_tol:
        raise QuadratureBudgetExceeded(f"eta kernel quadrature error {err:.2e}")
    return (alpha / (2 * np.pi)) * val


def eta_limiting_kernel(which: int, M: float, alpha: float, u, v,
                        quad: QuadratureConfig | None = None, method: str = "closed-form"):
    """Kernel of ``Op_alpha(eta(a))`` for the limiting symbols.

    ``method='quadrature'`` integrates the transformed symbol over the
    half-line with an oscillatory (Fourier-weighted) rule, one call per
    entry.  ``method='closed-form'`` uses :func:`eta_exponential_transform`.
    Channel 2 is the complex conjugate of channel 1.
    """
    if which not in (1, 2):
        raise DomainError("which must be 1 or 2")
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    delta = np.asarray(u, dtype=float) - np.asarray(v, dtype=float)
    if method == "closed-form":
        val = (alpha / (2 * np.pi * M)) * eta_exponential_transform(alpha * delta / M)
    elif method == "quadrature":
        quad = quad or QuadratureConfig()
        flat = [_eta_limiting_quad(M, alpha, float(d), quad) for d in delta.ravel()]
        val = np.array(flat, dtype=complex).reshape(delta.shape)
    else:
        raise DomainError(f"unknown method {method!r}")
    val = val if which == 1 else np.conj(val)
    return complex(val) if np.ndim(val) == 0 else val


def eta_limiting_diagonal(M: float, alpha: float) -> float:
    """``(alpha / 2 pi M) pi**2 / 6``: the density of ``tr eta(Op_alpha(a))`` per unit length."""
    return alpha * ZETA2 / (2 * np.pi * M)


def limiting_masked_trace(M: float, alpha: float, rho: float, channels: int = 1) -> float:
    """``tr chi eta(Op_alpha(a)) chi`` over a length ``rho``: ``rho alpha pi / (12 M)`` per channel."""
    return channels * rho * eta_limiting_diagonal(M, alpha)


def eta_weight_integral(eps: float, quad: QuadratureConfig | None = None) -> float:
    """``int_{-inf}^0 eta(exp(eps w)) dw``, computed as ``(1/eps) int_0^1 eta(s)/s ds``.

    The substitution ``s = sigma**2`` keeps the integrand bounded.
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    quad = quad or QuadratureConfig(abs_tol=1e-13)
    g = lambda sig: 2.0 * eta(sig * sig) / np.where(sig == 0, 1.0, sig)
    return adaptive_gauss_legendre(g, 0.0, 1.0, quad) / eps


# -- symbol descriptors -------------------------------------------------------

@dataclass(frozen=True)
class SymbolDescriptor:
    """A kernel family together with the parameters it was built from."""

    kind: str
    evaluate: Callable
    params: dict = field(default_factory=dict)
    channels: int = 1

    def __call__(self, u, v):
        return self.evaluate(u, v)

    @property
    def kernel_id(self) -> str:
        inner = ",".join(f"{k}={self.params[k]!r}" for k in sorted(self.params))
        return f"{self.kind}({inner})"


def limiting_descriptor(which: int, M: float, alpha: float) -> SymbolDescriptor:
    return SymbolDescriptor(f"limiting-{which}",
                            lambda u, v: limiting_kernel(which, M, alpha, u, v),
                            {"M": M, "alpha": alpha})


def limiting_matrix_descriptor(M: float, alpha: float) -> SymbolDescriptor:
    def evaluate(u, v):
        k1 = limiting_kernel(1, M, alpha, u, v)
        zero = np.zeros_like(k1)
        return np.array([[k1, zero], [zero, np.conj(k1)]])
    return SymbolDescriptor("limiting-matrix", evaluate, {"M": M, "alpha": alpha}, 2)


def eta_limiting_descriptor(which: int, M: float, alpha: float) -> SymbolDescriptor:
    return SymbolDescriptor(f"eta-limiting-{which}",
                            lambda u, v: eta_limiting_kernel(which, M, alpha, u, v),
                            {"M": M, "alpha": alpha})


def window_descriptor(j1: float, j2: float, alpha: float) -> SymbolDescriptor:
    from .opalpha import projection_window_kernel
    return SymbolDescriptor("projection-window",
                            lambda u, v: projection_window_kernel(j1, j2, alpha, u, v),
                            {"j1": j1, "j2": j2, "alpha": alpha})


# -- full kernel ---------------------------------------------------------------

def atilde_entries(omega: float, horizon: Callable | None, m: float, eps: float,
                   u: float = 0.0, t12: complex = 0j) -> np.ndarray:
    """The four plane-wave symbol entries at frequency ``omega``.

    ``horizon(w)`` returns the normalised horizon data ``(f0+, f0-)`` of
    the decaying solution for ``-m < w < 0``.  Entries (1,2) and (2,2)
    live on ``omega > 0`` and read the data at ``-omega``.  Raises
    :class:`MissingSolution` when data are needed but ``horizon`` is None.
    """
    def data(w):
        if horizon is None:
            raise MissingSolution(f"no horizon data for omega={w}")
        fp, fm = horizon(w)
        return complex(fp), complex(fm)

    out = np.zeros((2, 2), dtype=complex)
    if omega < 0:
        damp = np.exp(eps * omega)
        phase = np.exp(2j * omega * u)
        if omega < -m:
            out[0, 0] = 0.5 * damp
            out[1, 0] = damp * phase * np.conj(t12)
        else:
            fp, fm = data(omega)
            out[0, 0] = damp * abs(fp) ** 2
            out[1, 0] = damp * phase * fm * np.conj(fp)
    elif omega > 0:
        damp = np.exp(-eps * omega)
        phase = np.exp(2j * omega * u)
        if omega > m:
            out[1, 1] = 0.5 * damp
            out[0, 1] = damp * phase * t12
        else:
            fp, fm = data(-omega)
            out[1, 1] = damp * abs(fm) ** 2
            out[0, 1] = damp * phase * np.conj(fm) * fp
    return out


def _panel_rule(a: float, b: float, width: float, order: int = BAND_ORDER):
    panels = max(1, int(np.ceil((b - a) / width)))
    x, w = leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    return (mids[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def kernel_span(region) -> float:
    """Largest ``|u - v|`` or ``|u + v|`` over the region."""
    return max(region.rho, 2.0 * max(abs(region.lo), abs(region.hi)))


@dataclass
class FullKernel:
    """Plane-wave part of the regularised projection kernel of one mode.

    The scattering band ``w < -m`` is integrated in closed form (the data
    there are the constants 1/2 and ``t12``); the evanescent band
    ``-m < w < 0`` uses Gauss-Legendre panels of width ``pi / (2 span)``
    on horizon data from the radial solver.  ``weight='eta'`` replaces the
    damping ``exp(eps w)`` by ``eta(exp(eps w))`` (kernel of ``eta(Pi)``),
    in which case the scattering band is integrated numerically as well.
    """

    lam: float
    m: float
    eps: float
    bh: BlackHole
    span: float
    t12: complex = 0j
    weight: str = "projection"
    band_nodes: np.ndarray = None
    band_weights: np.ndarray = None
    band_data: np.ndarray = None

    def __post_init__(self):
        if not self.eps > 0:
            raise DomainError("eps must be positive")
        if self.weight not in ("projection", "eta"):
            raise DomainError(f"unknown weight {self.weight!r}")
        if self.band_nodes is None and self.m > 0:
            width = np.pi / (2.0 * max(self.span, 1e-300))
            nodes, weights = _panel_rule(-self.m, 0.0, min(width, self.m))
            self.band_nodes, self.band_weights = nodes, weights
            self.band_data = batch_horizon_data(nodes, self.lam, self.m, self.bh)
        elif self.band_nodes is None:
            self.band_nodes = np.zeros(0)
            self.band_weights = np.zeros(0)
            self.band_data = np.zeros((0, 2), dtype=complex)

    # weights ------------------------------------------------------------
    def _damping(self, w):
        x = np.exp(self.eps * np.asarray(w))
        return x if self.weight == "projection" else eta(x)

    @property
    def band_coefficients(self):
        """Per-node weights ``(|f+|^2, |f-|^2, f+ conj f-)`` times damping and quadrature weight."""
        d = self._damping(self.band_nodes) * self.band_weights / np.pi
        fp, fm = self.band_data[:, 0], self.band_data[:, 1]
        return d * np.abs(fp) ** 2, d * np.abs(fm) ** 2, d * fp * np.conj(fm)

    # scattering band ----------------------------------------------------
    def _scattering(self, x, sign):
        """``(1/pi) int_{-inf}^{-m} damping(w) exp(-i sign w x) dw``."""
        x = np.asarray(x, dtype=float)
        if self.weight == "projection":
            z = self.eps - 1j * sign * x
            return np.exp(-z * self.m) / z / np.pi
        return self._scattering_eta(x, sign)

    def _scattering_eta(self, x, sign):
        flat = x.ravel()
        out = np.empty(flat.shape, dtype=complex)
        g = lambda s: eta(np.exp(-self.eps * (s + self.m)))
        for i, xi in enumerate(flat):
            k = sign * xi
            if k == 0.0:
                val = integrate.quad(g, 0.0, np.inf, limit=200)[0]
            else:
                re = integrate.quad(g, 0.0, np.inf, weight="cos", wvar=k, limlst=200)[0]
                im = integrate.quad(g, 0.0, np.inf, weight="sin", wvar=k, limlst=200)[0]
                val = complex(re, im)
            # w = -(s + m): exp(-i sign w x) = exp(i k (s + m))
            out[i] = np.exp(1j * k * self.m) * val / np.pi
        return out.reshape(x.shape)

    # evaluation ---------------------------------------------------------
    def __call__(self, u, v):
        """All four blocks, shape ``(2, 2) + broadcast(u, v).shape``."""
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        delta, total = u - v, u + v
        c11, c22, c12 = self.band_coefficients
        k11 = 0.5 * self._scattering(delta, +1)
        k22 = 0.5 * self._scattering(delta, -1)
        k12 = self.t12 * self._scattering(total, +1)
        k21 = np.conj(self.t12) * self._scattering(total, -1)
        for w, a, b, c in zip(self.band_nodes, c11, c22, c12):
            k11 = k11 + a * np.exp(-1j * w * delta)
            k22 = k22 + b * np.exp(1j * w * delta)
            k12 = k12 + c * np.exp(-1j * w * total)
            k21 = k21 + np.conj(c) * np.exp(1j * w * total)
        return np.array([[k11, k12], [k21, k22]])

    def blocks(self, nodes, rows: slice | None = None):
        """``K11``, ``K12`` and ``K22`` on a node set, band sums as low-rank products.

        ``rows`` restricts the output to a row block.
        """
        nodes = np.asarray(nodes, dtype=float)
        left = nodes if rows is None else nodes[rows]
        delta = left[:, None] - nodes[None, :]
        total = left[:, None] + nodes[None, :]
        c11, c22, c12 = self.band_coefficients
        E = np.exp(-1j * np.outer(nodes, self.band_nodes))
        El = E if rows is None else E[rows]
        k11 = 0.5 * self._scattering(delta, +1) + (El * c11) @ E.conj().T
        k22 = 0.5 * self._scattering(delta, -1) + (El.conj() * c22) @ E.T
        k12 = self.t12 * self._scattering(total, +1) + (El * c12) @ E.T
        return k11, k12, k22

    def diagonal_trace_density(self) -> float:
        """``K11(u, u) + K22(u, u)``, independent of ``u``."""
        c11, c22, _ = self.band_coefficients
        return float(np.real(0.5 * self._scattering(np.zeros(()), 1)
                             + 0.5 * self._scattering(np.zeros(()), -1)
                             + c11.sum() + c22.sum()))


def assemble_full_kernel(mode, m: float, eps: float, region, bh=None,
                         t12: T12Strategy | complex | None = None,
                         weight: str = "projection") -> FullKernel:
    """Plane-wave part of the mode kernel with band panels sized for ``region``."""
    bh = BlackHole() if bh is None else (bh if isinstance(bh, BlackHole) else BlackHole(float(bh)))
    if isinstance(t12, T12Strategy) or t12 is None:
        t12 = (t12 or T12Strategy()).t12
    lam = float(getattr(mode, "lam", mode))
    return FullKernel(lam, m, eps, bh, kernel_span(region), complex(t12), weight)


def eta_full_kernel(mode, m: float, eps: float, region, bh=None, t12=None) -> FullKernel:
    """Kernel of ``eta(Pi)``: the same integrand with damping ``eta(exp(eps w))``."""
    return assemble_full_kernel(mode, m, eps, region, bh, t12, weight="eta")


def full_masked_trace(eps: float, rho: float) -> float:
    """``tr chi eta(Pi) chi`` over a length ``rho`` for plane-wave horizon data.

    Per frequency the diagonal of ``sum t_ab X_a X_b^*`` has trace 1, so
    the density is ``(1/pi) int eta(exp(eps w)) dw = pi / (6 eps)``.
    """
    return rho * np.pi / (6.0 * eps)


# -- error kernel ----------------------------------------------------------------

def _amplitudes(omegas, lam, m, bh, f0, nodes, source, v_points):
    """``f(u, w) = f0 + R(u, w)`` at ``nodes`` for solutions with data ``f0``."""
    nodes = np.asarray(nodes, dtype=float)
    if source == "born":
        lo = min(U_START * _mass(bh), nodes.min())
        grid = np.union1d(np.linspace(lo, nodes.max(), v_points), nodes)
        idx = np.searchsorted(grid, nodes)
        rp = np.empty((len(omegas), len(nodes)), dtype=complex)
        rm = np.empty_like(rp)
        step = max(1, 2 ** 22 // len(grid))   # bounds the temporaries
        for lo_i in range(0, len(omegas), step):
            part = slice(lo_i, lo_i + step)
            p, q = born_remainders(omegas[part], lam, m, bh, f0[part], grid)
            rp[part], rm[part] = p[:, idx], q[:, idx]
        return rp, rm
    if source == "ode":
        from .radial import integrate_f_ode
        grid = np.unique(np.concatenate([[min(U_START * _mass(bh), nodes.min() - 1.0)], nodes]))
        pos = np.searchsorted(grid, nodes)
        rp = np.zeros((len(omegas), len(nodes)), dtype=complex)
        rm = np.zeros_like(rp)
        for i, (w, f) in enumerate(zip(omegas, f0)):
            sol = integrate_f_ode(w, lam, m, bh, grid[0], grid[-1], f, 1e-11, grid=grid)
            rp[i] = sol.f_plus[pos] - f[0]
            rm[i] = sol.f_minus[pos] - f[1]
        return rp, rm
    raise DomainError(f"unknown amplitude source {source!r}")


def error_kernel_r(mode, m: float, eps: float, nodes, omega_nodes, omega_weights,
                   bh=None, t12: complex = 0j, source: str = "born",
                   band_data=None, v_points: int = 4001) -> np.ndarray:
    """Remainder part of the mode kernel on ``nodes x nodes``.

    Frequencies follow the signed convention of the symbol entries:
    nodes with ``w < 0`` feed the (1,1) and (2,1) entries, nodes with
    ``w > 0`` feed (1,2) and (2,2) through data at ``-w``.  Each entry is
    ``(1/pi) sum_q weight_q exp(-i w (u - v)) r_ij(u, v, w)`` with ``r_ij``
    the difference between the full products ``t_ab X_a X_b^*`` and their
    plane-wave parts.  ``band_data`` maps ``-m < w < 0`` to horizon data;
    it defaults to the radial solver.  Returns shape ``(2, 2, n, n)``.
    """
    bh = BlackHole() if bh is None else (bh if isinstance(bh, BlackHole) else BlackHole(float(bh)))
    lam = float(getattr(mode, "lam", mode))
    nodes = np.asarray(nodes, dtype=float)
    omega_nodes = np.asarray(omega_nodes, dtype=float)
    omega_weights = np.asarray(omega_weights, dtype=float)
    n = len(nodes)
    out = np.zeros((2, 2, n, n), dtype=complex)
    freqs = -np.abs(omega_nodes)          # data frequency, always negative
    lower = omega_nodes < 0
    scale = np.exp(eps * freqs) * omega_weights / np.pi
    entries = {(0, 0): lower, (1, 0): lower, (0, 1): ~lower, (1, 1): ~lower}

    def add(idx, t, fa, fb, f0a, f0b):
        # fa, fb: (f+, f-) amplitude arrays (len(idx), n); f0a, f0b: (len(idx), 2)
        w = freqs[idx][:, None]
        phase = (np.exp(-1j * w * nodes), np.exp(1j * w * nodes))
        for (c, d), sel in entries.items():
            keep = sel[idx]
            if not keep.any():
                continue
            coef = (scale[idx] * t)[keep]
            xa = phase[c][keep] * fa[c][keep]
            xb = phase[d][keep] * fb[d][keep]
            pa = phase[c][keep] * f0a[keep, c:c + 1]
            pb = phase[d][keep] * f0b[keep, d:d + 1]
            out[c, d] += (xa.T * coef) @ xb.conj() - (pa.T * coef) @ pb.conj()

    band = np.abs(freqs) < m
    if band.any():
        idx = np.flatnonzero(band)
        if band_data is None:
            f0 = batch_horizon_data(freqs[idx], lam, m, bh)
        else:
            f0 = np.array([band_data(w) for w in freqs[idx]], dtype=complex)
        rp, rm = _amplitudes(freqs[idx], lam, m, bh, f0, nodes, source, v_points)
        amp = (f0[:, 0:1] + rp, f0[:, 1:2] + rm)
        add(idx, np.ones(len(idx)), amp, amp, f0, f0)
    if (~band).any():
        idx = np.flatnonzero(~band)
        k = len(idx)
        basis = (np.tile([1.0 + 0j, 0j], (k, 1)), np.tile([0j, 1.0 + 0j], (k, 1)))
        amps = []
        for f0 in basis:
            rp, rm = _amplitudes(freqs[idx], lam, m, bh, f0, nodes, source, v_points)
            amps.append((f0[:, 0:1] + rp, f0[:, 1:2] + rm))
        T = transmission_coefficients(-np.inf, m, T12Strategy("constant", t12) if t12
                                      else None).as_array()
        for a in range(2):
            for b in range(2):
                if T[a, b] != 0:
                    add(idx, np.full(k, T[a, b]), amps[a], amps[b], basis[a], basis[b])
    return out


def default_error_omega_rule(m: float, eps: float, span: float, cutoff: float = DAMPING_CUTOFF,
                             order: int = BAND_ORDER):
    """Symmetric signed frequency rule for :func:`error_kernel_r`.

    Panels of width ``pi / (2 span)`` on ``(w_min, 0)`` with a break at
    ``-m``, mirrored to positive frequencies; ``w_min`` is where the
    damping drops below ``cutoff``.
    """
    w_min = np.log(cutoff) / eps
    width = np.pi / (2.0 * span)
    a_nodes, a_w = _panel_rule(w_min, -m, width, order)
    b_nodes, b_w = _panel_rule(-m, 0.0, min(width, m), order) if m > 0 else (np.zeros(0), np.zeros(0))
    neg = np.concatenate([a_nodes, b_nodes])
    wts = np.concatenate([a_w, b_w])
    return np.concatenate([neg, -neg]), np.concatenate([wts, wts])


def error_kernel_bound(mode, m: float, eps: float, region, bh=None) -> float:
    """Sup bound on the remainder kernel entries over ``region``.

    Uses ``|R| <= c exp(d u)`` with the horizon-window constants at the
    region's upper edge and ``sum |t_ab| <= 2``:
    ``(2/(pi eps)) (2 c e + (c e)**2)`` with ``e = exp(d u_max)``.
    """
    bh = BlackHole() if bh is None else (bh if isinstance(bh, BlackHole) else BlackHole(float(bh)))
    lam = float(getattr(mode, "lam", mode))
    B = horizon_bound(m, lam, bh, region.hi)
    ce = float(B(region.hi))
    return 2.0 / (np.pi * eps) * (2.0 * ce + ce * ce)
