"""Full mode kernel near the horizon against the limiting kernels.

For a region deep in the horizon region the full-path entropic difference
approaches the limiting one, and different choices of the undetermined
transmission coefficient t12 barely matter.
"""

from horizon_lab.opalpha import Interval
from horizon_lab.radial import T12Strategy
from horizon_lab.studies import full_path_difference, limiting_pair_difference

lam, m = 1.5, 0.1
for eps in (1 / 16, 1 / 32):
    region = Interval(-60.0, 4.0)
    full = full_path_difference(lam, m, eps, region)
    lim = limiting_pair_difference(1.0, 1.0 / eps, region, full.nodes)
    print(f"eps = 1/{round(1 / eps)}: full {full.result.d_value:.6f}  limiting {lim:.6f}  "
          f"relative gap {abs(full.result.d_value / lim - 1):.2e}  "
          f"remainder bound {full.remainder_bound:.1e}")

region = Interval(-60.0, 4.0)
for t12 in (0j, 0.4 + 0j, 0.4j):
    strategy = T12Strategy("constant", t12) if t12 else T12Strategy()
    d = full_path_difference(lam, m, 1 / 16, region, t12=strategy).result.d_value
    print(f"t12 = {t12}: d = {d:.8f}")
