"""The Heine process and its waiting times.

Run with ``python3 demos/heine_waiting_times.py``.
"""
import numpy as np

from qorderstats import heine as H
from qorderstats.qcore import QParam, q_factorial

hp = H.HeineParams(1.0, 1.0, QParam(0.5))

# The count over all geometric intervals is Poisson-binomial; its law is the
# Heine distribution.
dp = H.pmf_oracle_dp(hp, 6)
closed = [H.heine_pmf(k, hp).value for k in range(7)]
stats = H.simulate_batch(hp, 10**6, seed=1, nus=(1, 2, 3))
for k in range(7):
    print(f"k={k}: closed {closed[k]:.6f}  dp {dp[k]:.6f}  simulated {stats.count_hist[k] / stats.trials:.6f}")

# Given nu arrivals, the chance that they sit one per interval in the top nu
# intervals does not depend on the intensity or the horizon.
for nu in (1, 2, 3):
    vals = [H.conditional_config_probability(nu, H.HeineParams(lam, t, hp.qp)) for lam, t in ((0.2, 1), (1, 1), (4, 3))]
    acc, hits = stats.config_hits[nu]
    print(f"nu={nu}: exact {np.round(vals, 12)}  [nu]_q!(1-q)^nu = {q_factorial(nu, hp.qp) * 0.5**nu}"
          f"  simulated {hits / acc:.4f} from {acc} records")

# That probability is the ordered joint density times the volume of the box.
for nu in (1, 2, 3):
    print(f"nu={nu}: density {H.conditional_density_value(nu, hp)} x box {H.config_box_measure(nu, hp)}"
          f" = {H.conditional_density_value(nu, hp) * H.config_box_measure(nu, hp)}")
