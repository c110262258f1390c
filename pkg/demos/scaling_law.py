"""Logarithmic growth of the entropic difference on the limiting path.

Prints d(alpha) for both channels and the fitted slope against ln alpha,
which approaches 1/6 per channel and 1/3 in total.
"""

import numpy as np

from horizon_lab.studies import ScalingStudyConfig, scaling_study_limiting

cfg = ScalingStudyConfig(M=1.0, rho=1.0, alpha_list=(16.0, 32.0, 64.0, 128.0))
study = scaling_study_limiting(cfg)

print(f"{'alpha':>8} {'ln alpha':>9} {'d channel 1':>12} {'d channel 2':>12} {'total':>10}")
for i, alpha in enumerate(cfg.alpha_list):
    d1 = study.per_channel[1][i].d_value
    d2 = study.per_channel[2][i].d_value
    print(f"{alpha:8.0f} {np.log(alpha):9.4f} {d1:12.6f} {d2:12.6f} {study.totals[i]:10.6f}")
print(f"slope of total: {study.fit.slope:.5f} +- {study.fit.slope_err:.5f}  (1/3 = {1 / 3:.5f})")
print(f"mode entropy S_kn = slope / 2 = {study.fit.slope / 2:.5f}")
