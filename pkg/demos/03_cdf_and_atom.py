"""Waiting-time distribution by numerical transform inversion.

Shows the probability of not waiting, computed two ways (directly from the
contour integral and from the inverted CDF near zero), then a few CDF
values of the exact law next to its exponential limit.
"""
import numpy as np

from htqueue import (Gamma, QueueInstance, TwoPoint, atom_at_zero,
                     exact_scaled_moments, invert_cdf, make_approx_lst,
                     make_exact_lst, prob_wait_zero)

q = QueueInstance(Gamma(2.0, 0.5), TwoPoint(0.5, 1.5), 0.9)
m1 = exact_scaled_moments(q, 1)[1]
exact = make_exact_lst(q)
limit = make_approx_lst(q)

print(f"rho=0.9  E[alpha W]={m1:.5f}")
print(f"P(W=0) contour={prob_wait_zero(q):.6f}  inversion={atom_at_zero(exact, m1):.6f}")

t = m1 * np.array([0.25, 0.5, 1.0, 2.0, 4.0])
fe, fa = invert_cdf(exact, t).values, invert_cdf(limit, t).values
print("\n   t      exact    limit")
for ti, a, b in zip(t, fe, fa):
    print(f"{ti:7.3f}  {a:.5f}  {b:.5f}")
