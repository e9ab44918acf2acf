"""Cross-check the exact moments against a Lindley-recursion simulation.

Ten independent replications give a 99% confidence interval per moment;
the contour-integral values should sit inside them.
"""
from htqueue import (Gamma, QueueInstance, SimConfig, TwoPoint,
                     exact_scaled_moments, simulate_waiting)

q = QueueInstance(Gamma(2.0, 0.5), TwoPoint(0.5, 1.5), 0.8)
ex = exact_scaled_moments(q, 3)
sim = simulate_waiting(SimConfig(q, customers=200_000, replications=10, seed=7, K=3),
                       threads=4)
for k in (1, 2, 3):
    inside = "inside" if sim.contains(k, ex[k]) else "OUTSIDE"
    print(f"m{k}: exact={ex[k]:.4f}  sim={sim.moments[k - 1]:.4f}"
          f"  CI=[{sim.ci_low[k - 1]:.4f}, {sim.ci_high[k - 1]:.4f}]  {inside}")
