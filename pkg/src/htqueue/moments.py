"""Exact scaled waiting-time moments from the contour cumulant formula.

Scalings per regime:

===========  =================  ====================  ==========================
regime       quantity           contour abscissa      transform ``g``
===========  =================  ====================  ==========================
classical    ``alpha W``        ``-1/sigma_alpha^2``  ``psi(-alpha z)``
nd_kingman   ``W_n``            ``-1/(2 gamma_n)``    ``psi(-z/n)^n``
nd_gaussian  ``sqrt(n) W_n/s``  ``zeta_sp``           ``psi(-zeta)^n`` (scaled)
===========  =================  ====================  ==========================

Cumulants convert to moments with ``m_k = sum_l C(k-1, l-1) c_l m_{k-l}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import comb, sqrt

import numpy as np

from .errors import LogBranchFailure, UnsupportedOrder
from .quadrature import ContourIntegrand, QuadratureConfig, contour_cumulants
from .transform import (NewtonConfig, QueueInstance, ThinnedQueueInstance,
                        find_saddle_point, gamma_n, gaussian_regime_params,
                        lattice_hint, log_psi, sigma_alpha_sq)

K_MAX = 20


@dataclass(frozen=True)
class CumulantVector:
    """Cumulants ``c_1 .. c_K``."""

    values: np.ndarray
    errors: np.ndarray | None = None
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.errors is None:
            object.__setattr__(self, "errors", np.zeros_like(self.values))

    @property
    def K(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class MomentVector:
    """Raw moments ``m_0 = 1, m_1 .. m_K``; index with ``mv[k]``."""

    values: np.ndarray
    errors: np.ndarray | None = None
    source: str = ""
    cumulants: CumulantVector | None = None
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.errors is None:
            object.__setattr__(self, "errors", np.zeros_like(self.values))

    def __getitem__(self, k):
        return self.values[k]

    @property
    def K(self) -> int:
        return len(self.values) - 1


def moments_from_cumulants(cv: CumulantVector) -> MomentVector:
    """Raw moments via the binomial cumulant recursion, with first-order error propagation."""
    c, dc = cv.values, cv.errors
    K = len(c)
    m = np.zeros(K + 1)
    dm = np.zeros(K + 1)
    m[0] = 1.0
    for k in range(1, K + 1):
        for l in range(1, k + 1):
            w = comb(k - 1, l - 1)
            m[k] += w * c[l - 1] * m[k - l]
            dm[k] += w * (abs(dc[l - 1] * m[k - l]) + abs(c[l - 1] * dm[k - l]))
    return MomentVector(m, dm, cv.source, cv)


def _with_lattice(ci: ContourIntegrand, q: QueueInstance, factor: float, n: int):
    """Attach lattice peaks of ``psi`` mapped to contour units (``z = factor * zeta``)."""
    hint = lattice_hint(q)
    if hint is None:
        return ci
    return replace(ci, period=None if hint.period is None else factor * hint.period,
                   marks=tuple(factor * d for d in hint.marks),
                   mark_width=factor / sqrt(n * q.sigma2))


def contour_for(instance, x0_factor: float = 1.0, newton: NewtonConfig = NewtonConfig()):
    """Contour integrand and per-order scale factor for an instance.

    Returns
    -------
    ci : ContourIntegrand
    unit : float
        Cumulant ``l`` of the scaled waiting time is ``unit**l`` times the
        contour cumulant.
    info : dict
        Regime constants used (``sigma_alpha_sq``, ``gamma_n`` or saddle data).
    """
    if isinstance(instance, QueueInstance):
        q = instance
        a = q.gap
        s2 = sigma_alpha_sq(q)
        ci = ContourIntegrand(lambda z: log_psi(q, a * z), -x0_factor / s2, 1.0 / a,
                              f"classical alpha={a:g}")
        info = {"regime": "classical", "alpha": a, "sigma_alpha_sq": s2}
        if ci.g_at_x0() >= 1.0:
            # the Kingman abscissa can miss the admissible interval for very skewed laws
            zsp, _ = find_saddle_point(q, newton)
            ci = ContourIntegrand(ci.log_g, x0_factor * zsp / a, ci.scale, ci.label)
            info["abscissa"] = "saddle"
        return _with_lattice(ci, q, 1.0 / a, 1), 1.0, info
    if not isinstance(instance, ThinnedQueueInstance):
        raise TypeError(f"unsupported instance {type(instance).__name__}")
    tq = instance
    q, n = tq.base, tq.n
    if tq.regime == "nd_kingman":
        gn = gamma_n(tq)
        ci = ContourIntegrand(lambda z: n * log_psi(q, z / n), -x0_factor / (2 * gn), float(n),
                              f"nd_kingman n={n}")
        info = {"regime": "nd_kingman", "n": n, "gamma_n": gn}
        if ci.g_at_x0() >= 1.0:
            zsp, _ = find_saddle_point(q, newton)
            ci = ContourIntegrand(ci.log_g, x0_factor * zsp * n, ci.scale, ci.label)
            info["abscissa"] = "saddle"
        return _with_lattice(ci, q, float(n), n), 1.0, info
    sp = gaussian_regime_params(tq, newton)
    ci = ContourIntegrand(lambda z: n * log_psi(q, z), x0_factor * sp.zeta_sp, 1.0,
                          f"nd_gaussian n={n}")
    info = {"regime": "nd_gaussian", "n": n, "saddle": sp}
    ci = _with_lattice(ci, q, 1.0, n)
    return ci, 1.0 / (sp.sigma_n * sqrt(n)), info


def exact_cumulants(instance, K: int, cfg: QuadratureConfig = QuadratureConfig(),
                    x0_factor: float = 1.0):
    """Cumulants of the regime-scaled waiting time; see :func:`exact_scaled_moments`."""
    if not 1 <= K <= K_MAX:
        raise UnsupportedOrder(f"K must lie in 1..{K_MAX}, got {K}")
    ci, unit, info = contour_for(instance, x0_factor)
    res = contour_cumulants(ci, np.arange(1, K + 1), cfg)
    f = unit ** np.arange(1, K + 1)
    info.update(x0=ci.x0, truncation=res.truncation, evaluations=res.evaluations)
    return CumulantVector(res.values * f, res.errors * f, f"exact[{info['regime']}]"), info


def exact_scaled_moments(instance, K: int = 5, cfg: QuadratureConfig = QuadratureConfig(),
                         x0_factor: float = 1.0) -> MomentVector:
    """Exact moments of the scaled waiting time.

    Parameters
    ----------
    instance : QueueInstance or ThinnedQueueInstance
        A plain instance means the classical regime with ``alpha = 1 - rho``.
    K : int
        Highest moment order.
    x0_factor : float
        Multiplies the default abscissa; the result must not depend on it.

    Returns
    -------
    MomentVector
        ``info`` records the regime constants, abscissa and truncation point.
    """
    cv, info = exact_cumulants(instance, K, cfg, x0_factor)
    mv = moments_from_cumulants(cv)
    return MomentVector(mv.values, mv.errors, mv.source, cv, info)


def prob_wait_zero(instance, cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """``P(W = 0)`` from ``log P(W=0) = -(1/pi) int_0^inf Re[log(1-g)/z] dy``."""
    ci, _, _ = contour_for(instance)
    if ci.g_at_x0() >= 1:
        raise LogBranchFailure("no admissible contour")
    res = contour_cumulants(ci, [0], cfg)
    return float(np.exp(-res.values[0]))
