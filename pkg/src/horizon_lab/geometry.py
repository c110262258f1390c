"""Schwarzschild radial geometry in Regge-Wheeler form."""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError


@dataclass(frozen=True)
class BlackHole:
    mass: float = 1.0

    def __post_init__(self):
        if not self.mass > 0:
            raise DomainError("black hole mass must be positive")

    @property
    def horizon(self) -> float:
        return 2.0 * self.mass


def _mass(bh) -> float:
    return bh.mass if isinstance(bh, BlackHole) else float(bh)


def delta(r, bh):
    """``r**2 - 2 M r``; vanishes at the origin and on the horizon."""
    M = _mass(bh)
    r = np.asarray(r, dtype=float)
    out = r * (r - 2.0 * M)
    return float(out) if out.ndim == 0 else out


def regge_wheeler_u(r, bh):
    """Tortoise coordinate ``u = r + 2 M ln(r - 2M)``.

    Raises
    ------
    DomainError
        If any ``r <= 2M``.
    """
    M = _mass(bh)
    r = np.asarray(r, dtype=float)
    if np.any(r <= 2.0 * M):
        raise DomainError("the tortoise coordinate needs r > 2M")
    out = r + 2.0 * M * np.log(r - 2.0 * M)
    return float(out) if out.ndim == 0 else out


_SMALL_X = 1e-8


def _halley(x: float, w: float) -> float:
    for _ in range(100):
        ew = np.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= step
        if abs(step) <= 4e-16 * (1.0 + abs(w)):
            return w
    raise ConvergenceError(f"Lambert W iteration stalled at x={x!r}")


def _lambert_w_scalar(x: float) -> float:
    if x < 0 or not np.isfinite(x):
        raise DomainError("lambert_w is implemented for finite x >= 0")
    if x == 0.0:
        return 0.0
    if x < _SMALL_X:
        return x * (1.0 - x * (1.0 - 1.5 * x))
    if x < 1.0:
        w0 = x
    elif x < 3.0:
        w0 = 0.5 * np.log1p(x) + 0.3
    else:
        lx = np.log(x)
        w0 = lx - np.log(lx)
    return _halley(x, w0)


def lambert_w(x):
    """Principal branch of ``w exp(w) = x`` for ``x >= 0``.

    Halley iteration seeded with ``x`` below 1 and ``ln x - ln ln x`` for
    large arguments; a three-term series is used below 1e-8 so that tiny
    arguments never pass through ``exp``.
    """
    arr = np.asarray(x, dtype=float)
    out = np.vectorize(_lambert_w_scalar, otypes=[float])(arr)
    return float(out) if out.ndim == 0 else out


def _w_from_log(L: float) -> float:
    """Solve ``w + ln w = L`` for huge ``L`` where ``exp(L)`` overflows."""
    w = L - np.log(L)
    for _ in range(100):
        step = (w + np.log(w) - L) / (1.0 + 1.0 / w)
        w -= step
        if abs(step) <= 4e-16 * w:
            return w
    raise ConvergenceError(f"log-form Lambert W stalled at L={L!r}")


def horizon_distance(u, bh):
    """``r - 2M`` as a function of the tortoise coordinate, without cancellation."""
    M = _mass(bh)
    u = np.asarray(u, dtype=float)
    L = u / (2.0 * M) - 1.0 - np.log(2.0 * M)   # log of the Lambert argument
    flat = L.ravel()
    out = np.empty_like(flat)
    for i, Li in enumerate(flat):
        if Li > 700.0:
            out[i] = _w_from_log(Li)
        else:
            out[i] = _lambert_w_scalar(float(np.exp(Li)))
    out = 2.0 * M * out.reshape(L.shape)
    return float(out) if out.ndim == 0 else out


def inverse_regge_wheeler(u, bh):
    """Radius ``r`` with ``regge_wheeler_u(r) == u``; tends to 2M as u -> -inf."""
    M = _mass(bh)
    out = 2.0 * M + np.asarray(horizon_distance(u, bh))
    return float(out) if out.ndim == 0 else out


def radial_coupling(u, bh):
    """``sqrt(Delta) / r**2`` together with ``r`` on tortoise samples.

    Near the horizon this is evaluated from ``r - 2M`` directly so that the
    exponentially small values keep full relative precision.
    """
    M = _mass(bh)
    s = np.asarray(horizon_distance(u, bh))
    r = 2.0 * M + s
    return np.sqrt(r * s) / r ** 2, r
