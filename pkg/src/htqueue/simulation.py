"""Monte-Carlo waiting times from the Lindley recursion ``W <- (W + V - U/rho)^+``.

The recursion is vectorised: with partial sums ``S_k`` of the increments
``V - U/rho`` and start value ``W_0``,

    W_k = S_k - min(-W_0, min_{j <= k} S_j),

so each chunk costs a cumulative sum and a cumulative minimum.
Replications use independent streams spawned from one ``SeedSequence``
and are aggregated in a fixed order, which makes results reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt

import numpy as np
from scipy import stats

from .distributions import DistributionSpec
from .errors import UnstableLoad
from .transform import QueueInstance, ThinnedQueueInstance, gaussian_regime_params

CHUNK = 1 << 18


def sample_variate(spec: DistributionSpec, rng: np.random.Generator) -> float:
    """One draw from ``spec``."""
    return float(spec.sample(rng, 1)[0])


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    ``warmup=None`` picks ``1e4`` customers, scaled by ``(0.1/(1-rho))^2``
    above ``rho = 0.9``.
    """

    instance: object
    customers: int = 1_000_000
    replications: int = 10
    seed: int = 0
    warmup: int | None = None
    K: int = 5

    def __post_init__(self):
        if not isinstance(self.instance, (QueueInstance, ThinnedQueueInstance)):
            raise TypeError("instance must be a QueueInstance or ThinnedQueueInstance")
        if self.replications < 2:
            raise ValueError("need at least two replications for a confidence interval")
        if self.customers < 1:
            raise ValueError("customers must be positive")

    @classmethod
    def for_load(cls, service, arrival, rho: float, **kw) -> "SimConfig":
        if not rho < 1.0:
            raise UnstableLoad(f"simulation needs rho < 1, got {rho}")
        return cls(QueueInstance(service, arrival, rho), **kw)

    @property
    def rho(self) -> float:
        return self.instance.rho

    @property
    def burn_in(self) -> int:
        if self.warmup is not None:
            return int(self.warmup)
        return int(10_000 * max(1.0, (0.1 / (1.0 - self.rho)) ** 2))


@dataclass
class SimResult:
    """Moment estimates ``m_1 .. m_K`` of the scaled waiting time with 99% CIs."""

    moments: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    p_zero: float
    p_zero_ci: tuple
    scale: float
    per_replication: np.ndarray = field(repr=False)

    def contains(self, k: int, value: float) -> bool:
        return bool(self.ci_low[k - 1] <= value <= self.ci_high[k - 1])


def _scale_and_draws(inst):
    if isinstance(inst, QueueInstance):
        V, U, rho = inst.service, inst.arrival, inst.rho
        return inst.gap, (lambda rng, size: V.sample(rng, size) - U.sample(rng, size) / rho)
    V, U, n, rho = inst.service, inst.arrival, inst.n, inst.rho
    if inst.regime == "nd_kingman":
        scale = 1.0
    else:
        scale = sqrt(n) / gaussian_regime_params(inst).sigma_n
    return scale, (lambda rng, size: V.sample_mean(rng, n, size)
                   - U.sample_mean(rng, n, size) / rho)


def lindley_path(increments: np.ndarray, w0: float = 0.0) -> np.ndarray:
    """Waiting times ``W_1 .. W_N`` driven by ``increments`` from ``W_0 = w0``."""
    S = np.cumsum(increments)
    return S - np.minimum(np.minimum.accumulate(S), -w0)


def _replication(draw, scale, K, burn, count, seed_seq):
    rng = np.random.default_rng(seed_seq)
    w = 0.0
    left = burn
    while left > 0:
        size = min(CHUNK, left)
        w = lindley_path(draw(rng, size), w)[-1]
        left -= size
    sums = np.zeros(K + 1)  # index 0 counts empty waits
    left = count
    while left > 0:
        size = min(CHUNK, left)
        W = lindley_path(draw(rng, size), w)
        w = W[-1]
        X = scale * W
        sums[0] += np.count_nonzero(W == 0.0)
        p = np.ones_like(X)
        for k in range(1, K + 1):
            p *= X
            sums[k] += p.sum()
        left -= size
    return sums / count


def simulate_waiting(cfg: SimConfig, threads: int = 1) -> SimResult:
    """Replicated simulation; CIs use t-quantiles across replication means."""
    scale, draw = _scale_and_draws(cfg.instance)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.replications)
    args = [(draw, scale, cfg.K, cfg.burn_in, cfg.customers, s) for s in seeds]
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(threads) as ex:
            reps = list(ex.map(lambda a: _replication(*a), args))
    else:
        reps = [_replication(*a) for a in args]
    R = np.array(reps)
    r = cfg.replications
    mean = R.mean(axis=0)
    half = stats.t.ppf(0.995, r - 1) * R.std(axis=0, ddof=1) / sqrt(r)
    return SimResult(mean[1:], mean[1:] - half[1:], mean[1:] + half[1:], float(mean[0]),
                     (float(mean[0] - half[0]), float(mean[0] + half[0])), scale, R)
