"""Trace norm of the off-diagonal block of a spectral projection.

The block chi_K P (1 - chi_K) of the window projection P for J = (0, 1)
grows like ln alpha; its trace norm is computed on a padded complement and
compared with the exact value from the spectrum of chi_K P chi_K.
"""

from horizon_lab.opalpha import Interval
from horizon_lab.studies import schatten_growth_study

study = schatten_growth_study(Interval(0.0, 1.0), (0.0, 1.0), 1.0, (16.0, 32.0, 64.0, 128.0))
print(f"{'alpha':>7} {'padded':>9} {'padding x2':>11} {'exact':>9}")
for p in study.points:
    print(f"{p.alpha:7.0f} {p.value:9.5f} {p.padded_twice:11.5f} {p.exact:9.5f}")
print(f"slope {study.fit.slope:.5f} per unit ln alpha, r^2 {study.fit.r_squared:.6f}")
