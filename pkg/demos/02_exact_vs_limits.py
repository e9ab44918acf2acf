"""Exact scaled moments against their heavy-traffic limits, via the library.

Gamma service with TwoPoint interarrivals is followed through all three
regimes. In each one the relative error of the first moment shrinks as the
load approaches one. The skew-corrected Gaussian-walk value gains roughly a
further factor of ``sqrt(n)`` over the plain walk limit.
"""
from htqueue import (Gamma, QueueInstance, TwoPoint, classical_kingman,
                     exact_scaled_moments, nd_gaussian_refined,
                     nd_gaussian_standard, nd_kingman)
from htqueue.transform import ThinnedQueueInstance

V = Gamma(2.0, 0.5)
U = TwoPoint(0.5, 1.5)


def rel(a, b):
    return abs(a - b) / abs(b)


print("classical: alpha * W, first moment")
for alpha in (0.1, 0.01, 0.001):
    q = QueueInstance(V, U, 1 - alpha)
    ex, ap = exact_scaled_moments(q, 3), classical_kingman(q, 3)
    print(f"  alpha={alpha:<6} exact={ex[1]:.6f} limit={ap[1]:.6f} rel.err={rel(ap[1], ex[1]):.2e}")

print("\nnearly deterministic, rho = 1 - 1/n")
for n in (10, 100, 1000):
    tq = ThinnedQueueInstance(V, U, n, 1.0, "nd_kingman")
    ex, ap = exact_scaled_moments(tq, 3), nd_kingman(tq, 3)
    print(f"  n={n:<5} exact={ex[1]:.6f} limit={ap[1]:.6f} rel.err={rel(ap[1], ex[1]):.2e}")

print("\nnearly deterministic, rho = 1 - 1/sqrt(n)")
for n in (10, 100, 1000):
    tq = ThinnedQueueInstance(V, U, n, 1.0, "nd_gaussian")
    ex = exact_scaled_moments(tq, 3)
    a1, a2 = nd_gaussian_standard(tq, 3), nd_gaussian_refined(tq, 3)
    print(f"  n={n:<5} exact={ex[1]:.6f} walk={a1[1]:.6f} ({rel(a1[1], ex[1]):.1e})"
          f" corrected={a2[1]:.6f} ({rel(a2[1], ex[1]):.1e})")
