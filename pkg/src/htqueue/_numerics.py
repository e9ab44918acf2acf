"""Cancellation-free elementary functions for complex arguments.

numpy's complex ``log1p`` and ``expm1`` lose relative accuracy near the
origin, which is exactly where heavy-traffic transforms live. The helpers
here switch to short Taylor series for small arguments and work for any
floating dtype (including ``longdouble``).
"""
from __future__ import annotations

from math import factorial

import numpy as np
from scipy.special import bernoulli

_LOG_TERMS = 34
_EXP_TERMS = 24
_SINHC_TERMS = 22

# log(1+x) - x = sum_{j>=2} (-1)^{j+1} x^j / j
_LOG1P_MX = [(-1.0) ** (j + 1) / j for j in range(2, _LOG_TERMS + 2)]
# e^x - 1 - x = sum_{j>=2} x^j / j!
_EXPM1_MX = [1.0 / factorial(j) for j in range(2, _EXP_TERMS + 2)]
# log(sinh u / u) = sum_{k>=1} a_k u^{2k},  a_k = 4^k B_{2k} / (2k (2k)!)
_B = bernoulli(2 * _SINHC_TERMS)
_SINHC = np.array([4.0 ** k * _B[2 * k] / (2 * k * factorial(2 * k))
                   for k in range(1, _SINHC_TERMS + 1)])


def _horner(coeffs, x):
    acc = np.zeros_like(x)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _as_complex(x):
    x = np.asarray(x)
    if np.iscomplexobj(x):
        return x
    if x.dtype == np.longdouble:
        return x.astype(np.clongdouble)
    return x.astype(complex)


def _blend(x, small, series, direct):
    """Evaluate ``series`` where ``small`` holds and ``direct`` elsewhere."""
    out = np.empty_like(x)
    if np.any(small):
        out[small] = series(x[small])
    big = ~small
    if np.any(big):
        out[big] = direct(x[big])
    return out


def cexpm1(w):
    """``exp(w) - 1`` for complex ``w`` without cancellation."""
    w = _as_complex(w)
    x, y = w.real, w.imag
    s = np.sin(0.5 * y)
    out = np.empty_like(w)
    out.real = np.expm1(x) * np.cos(y) - 2.0 * s * s
    out.imag = np.exp(x) * np.sin(y)
    return out


def log1p_minus_x(x):
    """``log(1 + x) - x``, accurate for small ``|x|``."""
    x = _as_complex(x)
    return _blend(x, np.abs(x) < 0.25,
                  lambda v: v * v * _horner(_LOG1P_MX, v),
                  lambda v: np.log(1.0 + v) - v)


def clog1p(x):
    """``log(1 + x)`` for complex ``x``."""
    x = _as_complex(x)
    return x + log1p_minus_x(x)


def expm1_minus_x(x):
    """``exp(x) - 1 - x``, accurate for small ``|x|``."""
    x = _as_complex(x)
    return _blend(x, np.abs(x) < 0.5,
                  lambda v: v * v * _horner(_EXPM1_MX, v),
                  lambda v: cexpm1(v) - v)


def log_sinhc(u):
    """``log(sinh(u) / u)`` with the even Bernoulli series near 0."""
    u = _as_complex(u)
    return _blend(u, np.abs(u) < 0.5,
                  lambda v: _horner(np.concatenate(([0.0], _SINHC)), v * v),
                  lambda v: np.log(np.sinh(v) / v))


def log_sinhc_derivs(u):
    """First three derivatives of ``log(sinh(u)/u)``."""
    u = _as_complex(u)
    small = np.abs(u) < 0.5
    k = np.arange(1, _SINHC_TERMS + 1)
    d1c = 2 * k * _SINHC                      # u^{2k-1}
    d2c = 2 * k * (2 * k - 1) * _SINHC        # u^{2k-2}
    d3c = 2 * k * (2 * k - 1) * (2 * k - 2) * _SINHC  # u^{2k-3}, k>=2

    def ser(v):
        v2 = v * v
        return (v * _horner(d1c, v2), _horner(d2c, v2), v * _horner(d3c[1:], v2))

    def direct(v):
        sh, ch = np.sinh(v), np.cosh(v)
        return (ch / sh - 1.0 / v,
                1.0 / (v * v) - 1.0 / (sh * sh),
                -2.0 / v ** 3 + 2.0 * ch / sh ** 3)

    outs = [np.empty_like(u) for _ in range(3)]
    for mask, fn in ((small, ser), (~small, direct)):
        if np.any(mask):
            for o, val in zip(outs, fn(u[mask])):
                o[mask] = val
    return tuple(outs)


def log_one_minus_exp(w):
    """``log(1 - exp(w))`` for complex ``w`` with ``Re w < 0``.

    Near ``w = 0`` the difference is formed with :func:`cexpm1`. Once
    ``|exp(w)| < 1/2`` the result is small and :func:`clog1p` keeps its
    relative accuracy.
    """
    w = _as_complex(w)
    far = w.real < -np.log(2.0)
    return _blend(w, far, lambda v: clog1p(-np.exp(v)),
                  lambda v: np.log(-cexpm1(v)))
