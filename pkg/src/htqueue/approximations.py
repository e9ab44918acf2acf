"""Heavy-traffic approximations of the scaled waiting-time moments.

* classical: ``alpha W`` is approximately exponential with mean ``sigma_alpha^2 / 2``.
* nd_kingman: ``W_n`` is approximately exponential with mean ``gamma_n``.
* nd_gaussian: ``sqrt(n) W_n / sigma_n`` is approximately ``M_{beta_n}``
  (Asymp1); the refined version (Asymp2) adds the first skewness
  correction through ``phi_n`` and the shifted drift ``B_n``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import RefinementDegenerate
from .gaussian_walk import mgw_moments
from .moments import MomentVector
from .quadrature import QuadratureConfig
from .transform import (NewtonConfig, QueueInstance, SaddleInfo,
                        ThinnedQueueInstance, gamma_n, gaussian_regime_params,
                        sigma_alpha_sq)


@dataclass(frozen=True)
class RegimeParams:
    """Regime constants of an instance."""

    regime: str
    alpha: float | None = None
    n: int | None = None
    beta: float | None = None
    sigma_alpha_sq: float | None = None
    gamma_n: float | None = None
    saddle: SaddleInfo | None = None


def regime_params(instance, newton: NewtonConfig = NewtonConfig()) -> RegimeParams:
    if isinstance(instance, QueueInstance):
        return RegimeParams("classical", alpha=instance.gap,
                            sigma_alpha_sq=sigma_alpha_sq(instance))
    if instance.regime == "nd_kingman":
        return RegimeParams("nd_kingman", n=instance.n, beta=instance.beta,
                            gamma_n=gamma_n(instance))
    return RegimeParams("nd_gaussian", n=instance.n, beta=instance.beta,
                        saddle=gaussian_regime_params(instance, newton))


def exponential_moments(mean: float, K: int, source: str = "") -> MomentVector:
    """``m_k = k! mean^k``."""
    return MomentVector([factorial(k) * mean ** k for k in range(K + 1)], source=source)


def classical_kingman(q: QueueInstance, K: int = 5) -> MomentVector:
    """Moments of the exponential limit of ``alpha W``."""
    return exponential_moments(sigma_alpha_sq(q) / 2, K, "asymp[classical]")


def nd_kingman(tq: ThinnedQueueInstance, K: int = 5) -> MomentVector:
    """Moments of the exponential limit of ``W_n`` with mean ``gamma_n``."""
    return exponential_moments(gamma_n(tq), K, "asymp[nd_kingman]")


def nd_gaussian_standard(tq: ThinnedQueueInstance, K: int = 5, method: str = "integral",
                         cfg: QuadratureConfig = QuadratureConfig(),
                         saddle: SaddleInfo | None = None) -> MomentVector:
    """Moments of ``M_{beta_n}`` (Asymp1)."""
    sp = saddle or gaussian_regime_params(tq)
    mv = mgw_moments(sp.beta_n, K, method, cfg)
    return MomentVector(mv.values, mv.errors, "asymp1[nd_gaussian]", mv.cumulants,
                        {"beta_n": sp.beta_n})


def refined_from_walk(walk: MomentVector, beta_n: float, phi_n: float) -> np.ndarray:
    """``m_k(B)/c^(2k) + k(k-1) m_{k-1}(B) phi / c^(2k-1)`` with ``c = 1 + beta_n phi_n``.

    ``walk`` holds the moments of ``M_B`` with ``B = beta_n / c``.
    """
    c = 1.0 + beta_n * phi_n
    K = walk.K
    out = np.empty(K + 1)
    out[0] = 1.0
    for k in range(1, K + 1):
        out[k] = walk[k] / c ** (2 * k) + k * (k - 1) * walk[k - 1] * phi_n / c ** (2 * k - 1)
    return out


def nd_gaussian_refined(tq: ThinnedQueueInstance, K: int = 5, method: str = "integral",
                        cfg: QuadratureConfig = QuadratureConfig(),
                        saddle: SaddleInfo | None = None) -> MomentVector:
    """Skewness-corrected Gaussian approximation (Asymp2).

    Raises
    ------
    RefinementDegenerate
        When ``1 + beta_n phi_n <= 0`` so that ``B_n`` is undefined.
    """
    sp = saddle or gaussian_regime_params(tq)
    c = 1.0 + sp.beta_n * sp.phi_n
    if not c > 0:
        raise RefinementDegenerate(f"1 + beta_n phi_n = {c} is not positive")
    walk = mgw_moments(sp.B_n, K, method, cfg)
    vals = refined_from_walk(walk, sp.beta_n, sp.phi_n)
    return MomentVector(vals, source="asymp2[nd_gaussian]",
                        info={"B_n": sp.B_n, "phi_n": sp.phi_n})
