"""Cumulants and moments of the all-time maximum ``M_beta`` of a Gaussian walk.

The walk has i.i.d. ``N(-beta, 1)`` increments. Two independent routes are
provided:

* ``integral``: the contour formula with ``g(z) = exp(beta z + z^2/2)`` on
  ``Re z = -beta``, where ``g`` is real and the integrand is smooth.
* ``zeta``: a closed series in Riemann zeta values, convergent for
  ``0 < beta < 2 sqrt(pi)``.

Agreement of the two is the package's standing self-check.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb, exp, factorial, lgamma, log, pi, sqrt

import numpy as np

from . import zeta as _zeta
from .errors import BetaOutOfRange
from .quadrature import ContourIntegrand, QuadratureConfig, contour_cumulants

BETA_MAX_SERIES = 2 * sqrt(pi)
METHODS = ("integral", "zeta")


@dataclass(frozen=True)
class GaussianWalkQuery:
    beta: float
    K: int = 5
    method: str = "integral"

    def __post_init__(self):
        if not self.beta > 0:
            raise BetaOutOfRange(f"beta must be positive, got {self.beta}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.method == "zeta" and not self.beta < BETA_MAX_SERIES:
            raise BetaOutOfRange(f"zeta series needs beta < 2 sqrt(pi), got {self.beta}")


def walk_contour(beta: float) -> ContourIntegrand:
    """Contour integrand of ``M_beta`` (abscissa ``-beta``)."""
    return ContourIntegrand(lambda z: beta * z + 0.5 * z * z, -beta,
                            scale=1.0, label=f"gaussian walk beta={beta:g}")


def mgw_cumulants_integral(beta: float, K: int, cfg: QuadratureConfig = QuadratureConfig(),
                           with_errors: bool = False):
    """``c_1 .. c_K`` of ``M_beta`` by contour quadrature."""
    GaussianWalkQuery(beta, K, "integral")
    res = contour_cumulants(walk_contour(beta), np.arange(1, K + 1), cfg)
    return (res.values, res.errors) if with_errors else res.values


def _series_tail(l: int, beta: float, rmax: int = 4000) -> float:
    """``sum_r zeta(1/2-l-r) (-1/2)^r beta^(2r+l+1) / (r! (2r+1)...(2r+l+1))``."""
    lb = log(beta)
    acc = 0.0
    small = 0
    for r in range(rmax):
        lz, sz = _zeta.log_abs_zeta(0.5 - l - r)
        den = lgamma(r + 1) + sum(log(2 * r + k) for k in range(1, l + 2))
        lt = lz - r * log(2.0) + (2 * r + l + 1) * lb - den
        term = sz * (-1) ** r * exp(lt)
        acc += term
        if abs(term) <= 1e-18 * max(abs(acc), 1e-300):
            small += 1
            if small >= 4:
                return acc
        else:
            small = 0
    raise ArithmeticError(f"zeta series did not converge for beta={beta}, l={l}")


def mgw_cumulants_zeta(beta: float, K: int):
    """``c_1 .. c_K`` of ``M_beta`` from the Riemann zeta series."""
    GaussianWalkQuery(beta, K, "zeta")
    rt = sqrt(2 * pi)
    out = np.empty(K)
    for l in range(1, K + 1):
        c = factorial(l - 1) / (2 * beta) ** l
        mid = 0.0
        for j in range(l + 1):
            mid += (comb(l, j) * _zeta.gamma_half(l - j + 1)
                    * _zeta.riemann_zeta(1.0 - (l + j) / 2)
                    * 2.0 ** ((l - j - 1) / 2) * (-beta) ** j)
        c += mid / rt
        c += (-1) ** (l + 1) * factorial(l) / rt * _series_tail(l, beta)
        out[l - 1] = c
    return out


def mgw_cumulants(beta: float, K: int, method: str = "integral",
                  cfg: QuadratureConfig = QuadratureConfig()):
    if method == "zeta":
        return mgw_cumulants_zeta(beta, K)
    return mgw_cumulants_integral(beta, K, cfg)


def mgw_moments(beta: float, K: int, method: str = "integral",
                cfg: QuadratureConfig = QuadratureConfig()):
    """Moments ``m_0 .. m_K`` of ``M_beta`` as a :class:`MomentVector`."""
    from .moments import CumulantVector, moments_from_cumulants
    c = mgw_cumulants(beta, K, method, cfg)
    return moments_from_cumulants(CumulantVector(c, source=f"gaussian_walk[{method}]"))
