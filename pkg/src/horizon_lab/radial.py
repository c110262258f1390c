"""Radial Dirac solutions near the horizon, their bounds and transmission data.

Solutions are written as ``X = (exp(-i w u) f+, exp(i w u) f-)`` and the
amplitudes ``f`` are integrated in the tortoise coordinate.  Several
frequencies can be integrated as one stacked system, which is how the
kernel assembly obtains horizon data for a whole quadrature grid.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from .errors import (ConstraintViolation, DomainError,
                     QuadratureBudgetExceeded, RegimeBoundary, StepFailure,
                     WindowTooShort)
from .geometry import BlackHole, _mass, radial_coupling

U_START = -120.0   # in units of M
U_MAX = 40.0       # in units of M
HORIZON_TOL = 1e-8


# -- bounds -------------------------------------------------------------------

@dataclass(frozen=True)
class AsymptoticBound:
    """``|f(u) - f0| <= c exp(d u)`` and ``|f'(u)| <= d c exp(d u)`` for ``u < u2``."""

    c: float
    d: float
    u2: float
    c1: float = 0.0

    def __call__(self, u):
        return self.c * np.exp(self.d * np.asarray(u))

    def derivative(self, u):
        return self.d * self.c * np.exp(self.d * np.asarray(u))

    def modulus_range(self, f_u2: float):
        """Lower and upper bounds on ``|f(u)|`` for ``u < u2`` given ``|f(u2)|``."""
        spread = np.exp(4.0 * self.c1 / self.d * np.exp(self.d * self.u2))
        return f_u2 / spread, f_u2 * spread


def _growth_constant(m: float, lam: float, M: float) -> float:
    return (m + abs(lam) / (2.0 * M)) / np.sqrt(2.0 * M * np.e)


def _bound(m, lam, M, u2, f0_norm, d):
    c1 = _growth_constant(m, lam, M)
    c = c1 / d * f0_norm * np.exp(8.0 * c1 / d * np.exp(d * u2))
    return AsymptoticBound(c, d, u2, c1)


def published_bound(m: float, lam: float, bh, u2: float, f0_norm: float = 1.0) -> AsymptoticBound:
    """Horizon bound constants with the decay rate ``d = 1/M``.

    The coupling ``sqrt(Delta)/r**2`` only decays like ``exp(u / 4M)``, so
    this rate is too fast and the bound fails for moderately negative u.
    Kept for comparison; use :func:`horizon_bound` for error control.
    """
    M = _mass(bh)
    return _bound(m, lam, M, u2, f0_norm, 1.0 / M)


def horizon_bound(m: float, lam: float, bh, u2: float, f0_norm: float = 1.0) -> AsymptoticBound:
    """Same construction with the rate ``d = 1/(4M)`` that the coupling supports."""
    M = _mass(bh)
    return _bound(m, lam, M, u2, f0_norm, 1.0 / (4.0 * M))


# -- ODE --------------------------------------------------------------------

def f_derivative(u, f_plus, f_minus, omega, lam, m, bh):
    """Right-hand side of the amplitude ODE at ``u`` (broadcasts over samples)."""
    b, r = radial_coupling(u, bh)
    u = np.asarray(u)
    dplus = b * np.exp(2j * omega * u) * (1j * m * r - lam) * f_minus
    dminus = b * np.exp(-2j * omega * u) * (-1j * m * r - lam) * f_plus
    return dplus, dminus


@dataclass(frozen=True)
class RadialSolution:
    """Amplitudes ``f+-`` on an increasing grid with cubic Hermite dense output."""

    omega: float
    lam: float
    m: float
    bh: BlackHole
    grid: np.ndarray
    f_plus: np.ndarray
    f_minus: np.ndarray
    f0: tuple
    horizon_error: float = 0.0

    def derivative(self, u=None):
        u = self.grid if u is None else np.asarray(u)
        if u is self.grid:
            return f_derivative(u, self.f_plus, self.f_minus, self.omega, self.lam, self.m, self.bh)
        fp, fm = self(u)
        return f_derivative(u, fp, fm, self.omega, self.lam, self.m, self.bh)

    def __call__(self, u):
        """Amplitudes at ``u`` inside the grid."""
        u = np.asarray(u, dtype=float)
        if np.any(u < self.grid[0] - 1e-12) or np.any(u > self.grid[-1] + 1e-12):
            raise DomainError("evaluation point outside the solution grid")
        dp, dm = f_derivative(self.grid, self.f_plus, self.f_minus, self.omega,
                              self.lam, self.m, self.bh)
        sp = CubicHermiteSpline(self.grid, self.f_plus, dp)
        sm = CubicHermiteSpline(self.grid, self.f_minus, dm)
        return sp(u), sm(u)

    def X(self, u=None):
        """Reconstructed two-component solution."""
        if u is None:
            u, (fp, fm) = self.grid, (self.f_plus, self.f_minus)
        else:
            u = np.asarray(u, dtype=float)
            fp, fm = self(u)
        return np.exp(-1j * self.omega * u) * fp, np.exp(1j * self.omega * u) * fm

    def remainder(self):
        """``f(u) - f0`` on the grid."""
        return self.f_plus - self.f0[0], self.f_minus - self.f0[1]


def _integrate(omegas, lam, m, bh, u_from, u_to, y0, tol, grid, method):
    rhs = _rhs(omegas, lam, m, bh)
    sol = solve_ivp(rhs, (u_from, u_to), y0, method=method, rtol=tol,
                    atol=tol * 1e-3, t_eval=grid)
    if sol.status != 0:
        raise StepFailure(f"integration failed: {sol.message}")
    return sol


def _rhs(omegas, lam, m, bh):
    omegas = np.asarray(omegas, dtype=float)
    k = len(omegas)

    def rhs(u, y):
        b, r = radial_coupling(u, bh)
        phase = np.exp(2j * omegas * u)
        out = np.empty_like(y)
        out[:k] = b * phase * (1j * m * r - lam) * y[k:]
        out[k:] = b * np.conj(phase) * (-1j * m * r - lam) * y[:k]
        return out
    return rhs


def integrate_f_ode(omega, lam, m, bh, u_start, u_end, f_init, tol: float = 1e-10,
                    grid=None, method: str = "RK45") -> RadialSolution:
    """Integrate the amplitude ODE from ``u_start`` to ``u_end`` (either direction).

    ``f_init`` is given at ``u_start``.  The stored grid is always
    increasing; ``grid`` defaults to 401 equispaced samples.  The
    solution's ``f0`` is set to the value at the lower end of the grid.
    """
    bh = bh if isinstance(bh, BlackHole) else BlackHole(float(bh))
    if not tol > 0:
        raise DomainError("tol must be positive")
    if u_start == u_end:
        raise DomainError("empty integration range")
    lo, hi = min(u_start, u_end), max(u_start, u_end)
    grid = np.linspace(lo, hi, 401) if grid is None else np.asarray(grid, dtype=float)
    t_eval = grid if u_end > u_start else grid[::-1]
    y0 = np.asarray(f_init, dtype=complex)
    sol = _integrate([omega], lam, m, bh, u_start, u_end, y0, tol, t_eval, method)
    y = sol.y if u_end > u_start else sol.y[:, ::-1]
    fp, fm = y[0], y[1]
    return RadialSolution(float(omega), float(lam), float(m), bh, grid, fp, fm,
                          (complex(fp[0]), complex(fm[0])))


def horizon_data(sol: RadialSolution, tol: float = HORIZON_TOL):
    """``f0`` from the deepest grid point and the bound on its truncation error.

    Raises
    ------
    WindowTooShort
        If the remainder bound at the lowest grid point exceeds ``tol``.
    """
    u_low = sol.grid[0]
    f0_norm = float(np.hypot(abs(sol.f_plus[0]), abs(sol.f_minus[0])))
    bound = horizon_bound(sol.m, sol.lam, sol.bh, u_low, f0_norm)
    err = float(bound(u_low))
    if err > tol:
        raise WindowTooShort(f"horizon remainder bound {err:.2e} at u={u_low} exceeds {tol:.1e}")
    return (complex(sol.f_plus[0]), complex(sol.f_minus[0])), err


# -- fundamental solutions --------------------------------------------------

def _lam_of(mode) -> float:
    return float(getattr(mode, "lam", mode))


def evanescent_seed(omega: float, m: float):
    """Decaying eigenvector ``(1, (w + i kappa)/m)/sqrt 2`` of the large-r system."""
    return np.array([1.0, (omega + 1j * np.sqrt(m * m - omega * omega)) / m]) / np.sqrt(2.0)


def batch_horizon_data(omegas, mode, m, bh, u_start: float | None = None,
                       u_max: float | None = None, tol: float = 1e-10,
                       method: str = "RK45"):
    """Normalised horizon data ``f0`` of the decaying solution for ``|w| < m``.

    All frequencies are integrated backward together from ``u_max`` to
    ``u_start``.  Returns an array of shape ``(len(omegas), 2)``.
    """
    bh = bh if isinstance(bh, BlackHole) else BlackHole(float(bh))
    M = bh.mass
    u_start = U_START * M if u_start is None else u_start
    u_max = U_MAX * M if u_max is None else u_max
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    if np.any(np.abs(omegas) >= m):
        raise DomainError("batch_horizon_data only covers the evanescent band")
    lam = _lam_of(mode)
    seeds = np.array([evanescent_seed(w, m) for w in omegas])
    # X-components to f-amplitudes at u_max
    y0 = np.concatenate([np.exp(1j * omegas * u_max) * seeds[:, 0],
                         np.exp(-1j * omegas * u_max) * seeds[:, 1]])
    sol = _integrate(omegas, lam, m, bh, u_max, u_start, y0, tol, [u_start], method)
    k = len(omegas)
    f0 = np.stack([sol.y[:k, -1], sol.y[k:, -1]], axis=1)
    f0 /= np.linalg.norm(f0, axis=1)[:, None]
    return f0


@dataclass(frozen=True)
class FundamentalPair:
    first: RadialSolution
    second: RadialSolution | None
    regime: str  # "scattering" or "evanescent"


def fundamental_solutions(omega: float, mode, m: float, bh, u_start: float | None = None,
                          u_end: float | None = None, tol: float = 1e-10,
                          grid=None) -> FundamentalPair:
    """Fundamental solutions fixed by their behaviour at the horizon or at infinity.

    ``|w| > m``: plane-wave horizon data ``(1, 0)`` and ``(0, 1)``,
    integrated outward from ``u_start``.  ``|w| < m``: the solution
    decaying at large r, integrated inward from ``u_end`` (default
    ``U_MAX M``) and normalised to unit length at the horizon; no second
    solution is needed in this band.
    """
    bh = bh if isinstance(bh, BlackHole) else BlackHole(float(bh))
    M = bh.mass
    lam = _lam_of(mode)
    if abs(abs(omega) - m) <= 1e-12:
        raise RegimeBoundary(f"|omega| = m = {m} is excluded")
    u_start = U_START * M if u_start is None else u_start
    u_end = U_MAX * M if u_end is None else u_end
    grid = np.linspace(u_start, u_end, 801) if grid is None else np.asarray(grid, dtype=float)
    if abs(omega) > m:
        x1 = integrate_f_ode(omega, lam, m, bh, u_start, u_end, (1, 0), tol, grid)
        x2 = integrate_f_ode(omega, lam, m, bh, u_start, u_end, (0, 1), tol, grid)
        return FundamentalPair(x1, x2, "scattering")
    seed = evanescent_seed(omega, m)
    f_init = (np.exp(1j * omega * u_end) * seed[0], np.exp(-1j * omega * u_end) * seed[1])
    raw = integrate_f_ode(omega, lam, m, bh, u_end, u_start, f_init, tol, grid)
    scale = np.hypot(abs(raw.f_plus[0]), abs(raw.f_minus[0]))
    fp, fm = raw.f_plus / scale, raw.f_minus / scale
    x1 = RadialSolution(raw.omega, raw.lam, raw.m, bh, raw.grid, fp, fm,
                        (complex(fp[0]), complex(fm[0])))
    return FundamentalPair(x1, None, "evanescent")


# -- transmission coefficients ----------------------------------------------

@dataclass(frozen=True)
class T12Strategy:
    """How the off-diagonal scattering coefficient is chosen.

    ``kind`` is ``zero``, ``constant`` (uses ``value``) or
    ``completeness-fit`` (``value`` holds the fitted number once known).
    """

    kind: str = "zero"
    value: complex = 0.0

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "completeness-fit"):
            raise DomainError(f"unknown t12 strategy {self.kind!r}")
        if abs(self.value) > 0.5 + 1e-15:
            raise ConstraintViolation(f"|t12| = {abs(self.value):.6g} exceeds 1/2")

    @property
    def t12(self) -> complex:
        return 0j if self.kind == "zero" else complex(self.value)


@dataclass(frozen=True)
class TransmissionMatrix:
    omega: float
    t11: complex
    t12: complex
    t21: complex
    t22: complex

    def as_array(self) -> np.ndarray:
        return np.array([[self.t11, self.t12], [self.t21, self.t22]])


def transmission_coefficients(omega: float, m: float, strategy: T12Strategy | None = None) -> TransmissionMatrix:
    """Weights of the fundamental solutions in the spectral representation.

    Rank one ``[[1, 0], [0, 0]]`` for ``|w| <= m``; otherwise diagonal 1/2
    with the off-diagonal entry taken from ``strategy``.
    """
    strategy = strategy or T12Strategy()
    if abs(omega) <= m:
        return TransmissionMatrix(omega, 1.0, 0j, 0j, 0.0)
    t12 = strategy.t12
    if abs(t12) > 0.5 + 1e-15:
        raise ConstraintViolation(f"|t12| = {abs(t12):.6g} exceeds 1/2")
    return TransmissionMatrix(omega, 0.5, t12, np.conj(t12), 0.5)


# -- first-order remainders -------------------------------------------------

def _filon_weights(theta):
    """``int_0^1 exp(i theta s) ds`` and ``int_0^1 s exp(i theta s) ds``."""
    theta = np.asarray(theta, dtype=float)
    small = np.abs(theta) < 1e-2
    safe = np.where(small, 1.0, theta)
    e = np.exp(1j * safe)
    phi0 = (e - 1.0) / (1j * safe)
    phi1 = e / (1j * safe) - (e - 1.0) / (1j * safe) ** 2
    if small.any():
        z = 1j * theta[small]
        s0 = np.zeros_like(z)
        s1 = np.zeros_like(z)
        term = np.ones_like(z)
        for n in range(8):
            s0 += term / (n + 1)
            s1 += term / (n + 2)
            term = term * z / (n + 1)
        phi0 = np.where(small, 0, phi0)
        phi1 = np.where(small, 0, phi1)
        phi0[small] = s0
        phi1[small] = s1
    return phi0, phi1


def filon_cumulative(amplitude, grid, k):
    """``int_{grid[0]}^{grid[j]} A(v) exp(i k v) dv`` for every ``j`` and every ``k``.

    The amplitude is piecewise linear on ``grid``; the exponential is
    integrated exactly.  Returns an array of shape ``(len(k), len(grid))``.
    """
    grid = np.asarray(grid, dtype=float)
    A = np.asarray(amplitude)
    k = np.atleast_1d(np.asarray(k, dtype=float))
    h = np.diff(grid)
    theta = k[:, None] * h[None, :]
    phi0, phi1 = _filon_weights(theta)
    start = np.exp(1j * k[:, None] * grid[None, :-1])
    pieces = start * h[None, :] * (A[None, :-1] * (phi0 - phi1) + A[None, 1:] * phi1)
    out = np.zeros((len(k), len(grid)), dtype=complex)
    out[:, 1:] = np.cumsum(pieces, axis=1)
    return out


def born_remainders(omegas, lam, m, bh, f0, grid):
    """First-order approximations of ``f+-(u) - f0+-`` on ``grid``.

    ``f0`` has shape ``(len(omegas), 2)``.  The integrals start at
    ``grid[0]``, which should lie deep enough that the coupling is
    negligible there.
    """
    grid = np.asarray(grid, dtype=float)
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    f0 = np.atleast_2d(np.asarray(f0, dtype=complex))
    b, r = radial_coupling(grid, bh)
    plus = filon_cumulative(b * (1j * m * r - lam), grid, 2.0 * omegas)
    minus = filon_cumulative(b * (-1j * m * r - lam), grid, -2.0 * omegas)
    return plus * f0[:, 1:2], minus * f0[:, 0:1]


def born_second_order_bound(lam, m, bh, u):
    """``I**2 exp(I)`` with ``I = int_{-inf}^u |coupling|``, bounding the Born error."""
    bh = bh if isinstance(bh, BlackHole) else BlackHole(float(bh))
    v = np.linspace(U_START * bh.mass, u, 4001)
    b, r = radial_coupling(v, bh)
    I = float(np.trapezoid(b * np.hypot(m * r, lam), v))
    return I * I * np.exp(I)


# -- propagation ------------------------------------------------------------

@dataclass(frozen=True)
class PropagationResult:
    grid: np.ndarray
    plus: np.ndarray
    minus: np.ndarray
    tail_estimate: float


def _mode_table(omegas, mode, m, bh, grid, tol):
    """X_a(u, w) on ``grid`` for every frequency; shape ``(n_w, 2 solutions, 2 comps, n_u)``.

    All scattering frequencies (both horizon data) are integrated as one
    stacked system from the horizon window up to the end of ``grid``; the
    evanescent ones are integrated together inward from ``U_MAX M``.
    """
    bh = bh if isinstance(bh, BlackHole) else BlackHole(float(bh))
    M = bh.mass
    lam = _lam_of(mode)
    omegas = np.asarray(omegas, dtype=float)
    table = np.zeros((len(omegas), 2, 2, len(grid)), dtype=complex)
    u_start = min(U_START * M, grid[0] - 1.0)
    phase_p = np.exp(-1j * np.outer(omegas, grid))
    scat = np.flatnonzero(np.abs(omegas) > m)
    if scat.size:
        k = scat.size
        ws = np.concatenate([omegas[scat], omegas[scat]])
        y0 = np.concatenate([np.ones(k), np.zeros(k), np.zeros(k), np.ones(k)]).astype(complex)
        sol = _integrate(ws, lam, m, bh, u_start, grid[-1], y0, tol, grid, "RK45")
        fp, fm = sol.y[:2 * k], sol.y[2 * k:]
        for a in range(2):
            rows = slice(a * k, (a + 1) * k)
            table[scat, a, 0] = phase_p[scat] * fp[rows]
            table[scat, a, 1] = np.conj(phase_p[scat]) * fm[rows]
    band = np.flatnonzero(np.abs(omegas) < m)
    if band.size:
        k = band.size
        u_max = max(U_MAX * M, grid[-1])
        ws = omegas[band]
        seeds = np.array([evanescent_seed(w, m) for w in ws])
        y0 = np.concatenate([np.exp(1j * ws * u_max) * seeds[:, 0],
                             np.exp(-1j * ws * u_max) * seeds[:, 1]])
        t_eval = np.concatenate([grid[::-1], [u_start]])
        t_eval = t_eval[t_eval <= u_max]
        sol = _integrate(ws, lam, m, bh, u_max, u_start, y0, tol, t_eval, "RK45")
        fp, fm = sol.y[:k, ::-1], sol.y[k:, ::-1]          # increasing u, first column u_start
        scale = np.hypot(np.abs(fp[:, 0]), np.abs(fm[:, 0]))[:, None]
        table[band, 0, 0] = phase_p[band] * fp[:, 1:] / scale
        table[band, 0, 1] = np.conj(phase_p[band]) * fm[:, 1:] / scale
    return table


def propagate_mode(X0, grid, t: float, mode, m: float, bh, omega_nodes, omega_weights,
                   strategy: T12Strategy | None = None, tol: float = 1e-9,
                   table=None) -> PropagationResult:
    """Apply the spectral representation of the mode propagator to ``X0``.

    ``X0 = (plus, minus)`` is sampled on the uniform ``grid`` and must
    vanish near its ends.  The frequency integral uses the supplied nodes
    and weights; ``tail_estimate`` is the largest integrand norm at the
    outermost nodes relative to the largest overall.
    """
    grid = np.asarray(grid, dtype=float)
    plus0, minus0 = (np.asarray(c, dtype=complex) for c in X0)
    if abs(plus0[0]) + abs(plus0[-1]) + abs(minus0[0]) + abs(minus0[-1]) > 1e-8:
        raise DomainError("initial data must vanish at the ends of the grid")
    omega_nodes = np.asarray(omega_nodes, dtype=float)
    if np.any(np.abs(np.abs(omega_nodes) - m) <= 1e-12):
        raise RegimeBoundary("frequency nodes must avoid |omega| = m")
    if table is None:
        table = _mode_table(omega_nodes, mode, m, bh, grid, tol)
    du = grid[1] - grid[0]
    # <X_b | X0> by the trapezoid rule (data vanish at the ends)
    overlaps = du * (np.einsum("wbu,u->wb", table[:, :, 0].conj(), plus0)
                     + np.einsum("wbu,u->wb", table[:, :, 1].conj(), minus0))
    T = np.array([transmission_coefficients(w, m, strategy).as_array() for w in omega_nodes])
    coef = np.einsum("wab,wb->wa", T, overlaps)
    integrand = np.einsum("wa,wacu->wcu", coef, table) * np.exp(-1j * omega_nodes * t)[:, None, None]
    out = np.einsum("w,wcu->cu", omega_weights, integrand) / np.pi
    norms = np.linalg.norm(integrand.reshape(len(omega_nodes), -1), axis=1)
    tail = float(max(norms[0], norms[-1]) / max(norms.max(), 1e-300))
    if not np.all(np.isfinite(out)):
        raise QuadratureBudgetExceeded("non-finite propagation result")
    return PropagationResult(grid, out[0], out[1], tail)


def fit_t12_completeness(X0, grid, mode, m, bh, omega_nodes, omega_weights, table=None,
                         tol: float = 1e-9) -> complex:
    """Least-squares ``t12`` (constant over the scattering band) from the ``t = 0`` reconstruction.

    The reconstruction is affine in ``(Re t12, Im t12)``; the minimiser is
    projected onto the disk ``|t12| <= 1/2``.
    """
    grid = np.asarray(grid, dtype=float)
    if table is None:
        table = _mode_table(np.asarray(omega_nodes, dtype=float), mode, m, bh, grid, tol)

    def recon(strategy):
        res = propagate_mode(X0, grid, 0.0, mode, m, bh, omega_nodes, omega_weights,
                             strategy, table=table)
        return np.concatenate([res.plus, res.minus])

    target = np.concatenate([np.asarray(c, dtype=complex) for c in X0])
    base = recon(T12Strategy("zero"))
    d_re = recon(T12Strategy("constant", 0.5)) - base
    d_im = recon(T12Strategy("constant", 0.5j)) - base
    A = np.stack([d_re, d_im], axis=1)
    A = np.concatenate([A.real, A.imag])
    rhs = target - base
    rhs = np.concatenate([rhs.real, rhs.imag])
    coef, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    t12 = 0.5 * complex(coef[0], coef[1])
    if abs(t12) > 0.5:
        t12 *= 0.5 / abs(t12)
    return t12
