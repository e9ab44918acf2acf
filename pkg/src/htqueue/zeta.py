"""Riemann zeta function on the real line.

For ``s >= 1/2`` the alternating (Dirichlet eta) series is summed with
Borwein's acceleration; smaller arguments go through the functional
equation. The trivial zeros and ``zeta(0) = -1/2`` are returned exactly.
"""
from __future__ import annotations

from math import exp, factorial, lgamma, log, pi, sin, sqrt

_BORWEIN_N = 30


def _borwein_d(n):
    d, acc = [], 0.0
    for i in range(n + 1):
        acc += n * factorial(n + i - 1) * 4 ** i / (factorial(n - i) * factorial(2 * i))
        d.append(acc)
    return d


_D = _borwein_d(_BORWEIN_N)


def _zeta_right(s: float) -> float:
    if s > 40:
        return 1.0 + 2.0 ** -s + 3.0 ** -s
    n, d = _BORWEIN_N, _D
    acc = 0.0
    for k in range(n):
        acc += (-1) ** k * (d[k] - d[n]) / (k + 1) ** s
    return -acc / (d[n] * (1.0 - 2.0 ** (1.0 - s)))


def log_abs_zeta(s: float):
    """``(log|zeta(s)|, sign)``; usable far left where ``zeta`` overflows.

    Returns ``(-inf, 0)`` at the trivial zeros.
    """
    s = float(s)
    if s == 1.0:
        raise ValueError("zeta has a pole at s = 1")
    if s == 0.0:
        return log(0.5), -1
    if s >= 0.5:
        z = _zeta_right(s)
        return log(abs(z)), (1 if z > 0 else -1)
    if s < 0 and s == int(s) and int(s) % 2 == 0:
        return float("-inf"), 0
    # functional equation zeta(s) = 2^s pi^(s-1) sin(pi s/2) Gamma(1-s) zeta(1-s)
    t = 1.0 - s
    zr = _zeta_right(t)
    # reduce before multiplying by pi so sin keeps full accuracy near the trivial zeros
    m = round(s / 2)
    sn = (-1) ** (m % 2) * sin(pi * (s / 2 - m))
    mag = s * log(2.0) + (s - 1) * log(pi) + lgamma(t) + log(abs(sn)) + log(abs(zr))
    sign = (1 if sn > 0 else -1) * (1 if zr > 0 else -1)
    return mag, sign


def riemann_zeta(s: float) -> float:
    """``zeta(s)`` for real ``s != 1``."""
    mag, sign = log_abs_zeta(s)
    return 0.0 if sign == 0 else sign * exp(mag)


def gamma_half(k2: int) -> float:
    """``Gamma(k2 / 2)`` for positive integer ``k2``, via the recurrence from 1 or 1/2."""
    if k2 <= 0:
        raise ValueError("argument must be positive")
    if k2 % 2 == 0:
        return float(factorial(k2 // 2 - 1))
    g = sqrt(pi)
    x = 0.5
    while 2 * x < k2:
        g *= x
        x += 1.0
    return g


__all__ = ["riemann_zeta", "log_abs_zeta", "gamma_half"]
