"""Transforms of the increment ``V - U/rho`` and the saddle point machinery.

Notation
--------
``psi(zeta) = f_V(-zeta) f_U(zeta / rho)`` is the moment generating
function of ``U/rho - V`` and ``h = log psi``. In the nearly deterministic
regimes ``n`` copies of each time are averaged and the increment transform
becomes ``psi(zeta / n) ** n``.

``h`` is always formed from centered cumulant generating functions,

    h(zeta) = K_V(-zeta) + K_U(zeta / rho) + (gap / rho) zeta,

where ``gap = 1 - rho`` is carried exactly. This keeps ``1 - psi**n`` accurate
to full relative precision even when ``rho`` is within ``1e-6`` of one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, sqrt

import numpy as np

from .distributions import DistributionSpec, mgf, mgf_derivatives
from .errors import (ConfigError, LogBranchFailure, NewtonDivergence,
                     NonNegativeSaddle, OutsideAnalyticityStrip, UnstableLoad)


@dataclass(frozen=True)
class QueueInstance:
    """GI/G/1 queue with unit-mean service ``V``, interarrival ``U``, load ``rho``.

    Interarrival times are ``U / rho``. ``gap`` defaults to ``1 - rho`` but
    can be supplied exactly (see :meth:`from_gap`).
    """

    service: DistributionSpec
    arrival: DistributionSpec
    rho: float
    gap: float | None = None

    def __post_init__(self):
        gap = 1.0 - self.rho if self.gap is None else float(self.gap)
        if self.rho >= 1.0 or gap <= 0.0:
            raise UnstableLoad(f"load must be below one, got rho={self.rho}")
        if not (0.0 < self.rho < 1.0) or not (0.0 < gap < 1.0):
            raise ConfigError(f"load must lie in (0, 1), got rho={self.rho}")
        object.__setattr__(self, "gap", gap)

    @classmethod
    def from_gap(cls, service, arrival, gap: float) -> "QueueInstance":
        return cls(service, arrival, 1.0 - gap, gap)

    @property
    def sigma2(self) -> float:
        """``sigma_V^2 + sigma_U^2 / rho^2`` (curvature of ``h`` at 0)."""
        return self.service.variance + self.arrival.variance / self.rho ** 2

    @property
    def strip(self) -> tuple[float, float]:
        """Open interval of real ``zeta`` on which ``psi`` is finite."""
        return -self.service.edge, self.rho * self.arrival.edge


REGIMES = ("nd_kingman", "nd_gaussian")


@dataclass(frozen=True)
class ThinnedQueueInstance:
    """Nearly deterministic queue: averages of ``n`` copies of ``V`` and ``U``.

    ``regime='nd_kingman'`` sets ``rho_n = 1 - beta/n`` and
    ``regime='nd_gaussian'`` sets ``rho_n = 1 - beta/sqrt(n)``.
    """

    service: DistributionSpec
    arrival: DistributionSpec
    n: int
    beta: float
    regime: str = "nd_kingman"
    base: QueueInstance = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ConfigError(f"regime must be one of {REGIMES}, got {self.regime!r}")
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if not self.beta > 0:
            raise ConfigError(f"beta must be positive, got {self.beta}")
        scale = self.n if self.regime == "nd_kingman" else sqrt(self.n)
        gap = self.beta / scale
        if gap >= 1.0:
            raise ConfigError(f"beta={self.beta} too large for n={self.n}: load would be <= 0")
        object.__setattr__(self, "base",
                           QueueInstance.from_gap(self.service, self.arrival, gap))

    @property
    def rho(self) -> float:
        return self.base.rho

    @property
    def gap(self) -> float:
        return self.base.gap


@dataclass(frozen=True)
class NewtonConfig:
    max_iter: int = 50
    tol: float = 1e-13
    max_halvings: int = 30


@dataclass(frozen=True)
class SaddleInfo:
    """Saddle point of ``h`` and the derived Gaussian-regime quantities."""

    zeta_sp: float
    h2: float
    h3: float
    sigma_n: float
    beta_n: float
    d2: float
    phi_n: float
    B_n: float
    iterations: int
    assumption_ok: bool | None = None
    margin: float | None = None


def psi(q: QueueInstance, zeta):
    """``f_V(-zeta) f_U(zeta / rho)``."""
    zeta = np.asarray(zeta)
    return mgf(q.service, -zeta) * mgf(q.arrival, zeta / q.rho)


def log_psi(q: QueueInstance, zeta):
    """``h(zeta)`` from centered cumulant generating functions."""
    zeta = np.asarray(zeta)
    return (q.service.centered_cgf(-zeta) + q.arrival.centered_cgf(zeta / q.rho)
            + (q.gap / q.rho) * zeta)


def phi_thinned(tq: ThinnedQueueInstance, z):
    """``psi(z / n) ** n``, the transform of ``n (V_n - U_n / rho_n)`` at ``-z``."""
    return np.exp(tq.n * log_psi(tq.base, np.asarray(z) / tq.n))


def h_and_derivs(q: QueueInstance, zeta):
    """``(h, h', h'', h''')`` at ``zeta`` from analytic mgf derivatives.

    The third derivative keeps the ``2 (f'/f)^3`` terms of each factor, so it
    is valid away from the saddle point as well (they cancel exactly there).
    """
    zeta = np.asarray(zeta)
    v = mgf_derivatives(q.service, -zeta, 3)
    u = mgf_derivatives(q.arrival, zeta / q.rho, 3)
    r = q.rho
    a1, a2, a3 = v[1] / v[0], v[2] / v[0], v[3] / v[0]
    b1, b2, b3 = u[1] / u[0], u[2] / u[0], u[3] / u[0]
    p = v[0] * u[0]
    if np.any((np.abs(np.imag(p)) <= 1e-300) & (np.real(p) <= 0)):
        raise LogBranchFailure("psi is on the non-positive real axis")
    h = log_psi(q, zeta)
    h1 = -a1 + b1 / r
    h2 = (a2 - a1 ** 2) + (b2 - b1 ** 2) / r ** 2
    h3 = -(a3 - 3 * a2 * a1 + 2 * a1 ** 3) + (b3 - 3 * b2 * b1 + 2 * b1 ** 3) / r ** 3
    if not np.iscomplexobj(zeta):
        return tuple(np.real(v) for v in (h, h1, h2, h3))
    return h, h1, h2, h3


def sigma_alpha_sq(q: QueueInstance) -> float:
    """Classical heavy-traffic variance ``(sigma_V^2 + sigma_U^2/rho^2) rho``."""
    return q.sigma2 * q.rho


def gamma_n(tq: ThinnedQueueInstance) -> float:
    """Mean of the exponential limit in the nearly deterministic Kingman regime."""
    q = tq.base
    return q.sigma2 * q.rho / (2 * tq.n * q.gap)


def saddle_seed(q: QueueInstance) -> float:
    """Second-order approximation ``-(1 - rho) / (rho sigma^2)`` of the saddle."""
    return -q.gap / (q.rho * q.sigma2)


def find_saddle_point(q: QueueInstance, cfg: NewtonConfig = NewtonConfig()):
    """Negative root of ``h'`` by damped Newton iteration.

    Returns
    -------
    zeta_sp : float
    iterations : int

    Raises
    ------
    NewtonDivergence
        No convergence within ``cfg.max_iter`` steps or a step could not be
        kept inside the analyticity strip.
    NonNegativeSaddle
        The root found is not negative.
    """
    lo, hi = q.strip
    x = saddle_seed(q)
    if not lo < x < hi:
        x = 0.5 * lo if np.isfinite(lo) else -1.0
    for it in range(1, cfg.max_iter + 1):
        _, h1, h2, _ = h_and_derivs(q, x)
        h1, h2 = float(h1), float(h2)
        if not h2 > 0:
            raise NewtonDivergence(f"h'' = {h2} is not positive at zeta = {x}")
        if abs(h1) < cfg.tol:
            x -= h1 / h2  # one polishing step
            break
        step = h1 / h2
        for _ in range(cfg.max_halvings):
            cand = x - step
            if lo < cand < hi:
                break
            step *= 0.5
        else:
            raise NewtonDivergence("Newton step cannot be kept inside the strip")
        if cand == x:
            break
        x = cand
    else:
        _, h1, _, _ = h_and_derivs(q, x)
        if abs(float(h1)) >= cfg.tol:
            raise NewtonDivergence(f"no convergence after {cfg.max_iter} iterations, h' = {h1}")
    if x >= 0:
        raise NonNegativeSaddle(f"saddle point {x} is not negative")
    return x, it


def gaussian_regime_params(tq: ThinnedQueueInstance, cfg: NewtonConfig = NewtonConfig(),
                           check_assumption: bool = False) -> SaddleInfo:
    """Saddle point based scaling constants for the Gaussian regime.

    ``sigma_n = sqrt(h''(zeta_sp))``, ``beta_n = -zeta_sp sigma_n sqrt(n)``,
    ``d2 = -h'''/(6 h'')``, ``phi_n = d2 / (sigma_n sqrt(n))`` and
    ``B_n = beta_n / (1 + beta_n phi_n)``.
    """
    q = tq.base
    zsp, its = find_saddle_point(q, cfg)
    _, _, h2, h3 = h_and_derivs(q, zsp)
    h2, h3 = float(h2), float(h3)
    sigma = sqrt(h2)
    rn = sqrt(tq.n)
    beta_n = -zsp * sigma * rn
    d2 = -h3 / (6.0 * h2)
    phi = d2 / (sigma * rn)
    B = beta_n / (1.0 + beta_n * phi)
    ok = margin = None
    if check_assumption:
        ok, margin = assumption_check(q, zsp)
    return SaddleInfo(zsp, h2, h3, sigma, beta_n, d2, phi, B, its, ok, margin)


def _lattice_period(q: QueueInstance):
    spans = [q.service.spacing, None if q.arrival.spacing is None else q.arrival.spacing / q.rho]
    spans = [s for s in spans if s]
    return 2 * np.pi / min(spans) if spans else None


def _atoms(spec):
    if spec.kind == "deterministic":
        return [1.0]
    return [float(a) for a in spec.atoms] if spec.spacing else None


def _as_fraction(x: float, max_den: int = 10 ** 7):
    f = Fraction(x).limit_denominator(max_den)
    return f if abs(float(f) - x) <= 8e-16 * max(1.0, abs(x)) else None


@dataclass(frozen=True)
class LatticeHint:
    """Where ``|psi(x + iy)|`` can return close to its maximum, in ``zeta`` units.

    ``marks`` are the periods of the lattice components of ``V`` and ``U/rho``
    (the modulus of that component is periodic with them). ``period`` is the
    exact period of ``psi`` itself when every increment atom lies on one
    lattice through the origin, else ``None``.
    """

    period: float | None
    marks: tuple


def lattice_hint(q: QueueInstance):
    """Lattice structure of the increment ``V - U/rho``; ``None`` if there is none."""
    marks = []
    if q.service.spacing:
        marks.append(2 * np.pi / q.service.spacing)
    if q.arrival.spacing:
        marks.append(2 * np.pi * q.rho / q.arrival.spacing)
    if not marks:
        return None
    period = None
    va, ua = _atoms(q.service), _atoms(q.arrival)
    if va is not None and ua is not None:
        xs = [_as_fraction(float(v) - float(u) / q.rho) for v in va for u in ua]
        if all(x is not None for x in xs):
            den = 1
            for x in xs:
                den = den * x.denominator // gcd(den, x.denominator)
            g = 0
            for x in xs:
                g = gcd(g, x.numerator * (den // x.denominator))
            if g:
                period = 2 * np.pi * den / g
    return LatticeHint(period, tuple(marks))


def assumption_check(q: QueueInstance, x: float, delta: float = 0.05, step: float = 0.01,
                     y_max: float | None = None, eps: float = 1e-4):
    """Scan ``|psi(x + iy)|`` for ``delta <= y <= y_max`` against ``psi(x)``.

    The modulus-gap condition asks that ``psi(x)`` strictly dominates the
    modulus away from the real axis. Lattice laws revisit the maximum
    periodically, so the scan length is 50 periods for them (50 otherwise).

    Returns
    -------
    ok : bool
        ``margin > eps``.
    margin : float
        ``psi(x) - max |psi(x + iy)|`` over the grid.
    """
    if y_max is None:
        period = _lattice_period(q)
        y_max = 50.0 * (period if period else 1.0)
    y = np.arange(delta, y_max + step / 2, step)
    try:
        mod = np.abs(psi(q, x + 1j * y))
        top = float(np.real(psi(q, x)))
    except OutsideAnalyticityStrip:
        return False, -np.inf
    margin = top - float(np.max(mod))
    return margin > eps, margin
