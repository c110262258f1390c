"""Distance of a radial solution from its horizon value against two bounds.

The bound with decay rate 1/M is violated away from the horizon; the rate
1/(4M), which is what the radial coupling supports, holds everywhere.
"""

import numpy as np

from horizon_lab.geometry import BlackHole
from horizon_lab.radial import horizon_bound, integrate_f_ode, published_bound

bh = BlackHole(1.0)
omega, lam, m = 0.3, 1.5, 0.1
grid = np.linspace(-120.0, -10.0, 12)
sol = integrate_f_ode(omega, lam, m, bh, grid[0], grid[-1], (1, 0), 1e-11, grid=grid)
rp, rm = sol.remainder()
dist = np.hypot(np.abs(rp), np.abs(rm))
fast = published_bound(m, lam, bh, grid[-1])
slow = horizon_bound(m, lam, bh, grid[-1])

print(f"{'u':>8} {'|f - f0|':>12} {'rate 1/M':>12} {'rate 1/4M':>12}")
for u, d, a, b in zip(grid, dist, fast(grid), slow(grid)):
    print(f"{u:8.1f} {d:12.3e} {a:12.3e}{'*' if d > a else ' '} {b:12.3e}")
print("* marks a violated bound")
