"""Laplace-Stieltjes transforms of scaled waiting times and their numerical inversion.

CDFs are recovered with the Abate-Whitt EULER algorithm: a trapezoidal
discretisation of the Bromwich integral of ``F(s) / s`` whose alternating
tail is accelerated by binomial (Euler) averaging of partial sums.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import comb, exp, pi
from typing import Callable

import numpy as np

from .errors import InversionUnstable, LogBranchFailure
from .gaussian_walk import walk_contour
from .moments import contour_for
from .quadrature import QuadratureConfig, pollaczek_log_lst
from .transform import (QueueInstance, ThinnedQueueInstance, gamma_n,
                        gaussian_regime_params, sigma_alpha_sq)


@dataclass
class LSTHandle:
    """Transform ``s -> E[exp(-s X)]`` of a nonnegative variable.

    ``evaluator`` takes a complex array and returns a complex array of the
    same shape. Values are cached per argument, since every EULER node for
    a given ``t`` shares its real part and grids often repeat nodes.
    """

    evaluator: Callable
    atom_at_zero: float | None = None
    label: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        flat = s.ravel()
        todo = np.array([v for v in dict.fromkeys(flat.tolist()) if v not in self._cache],
                        dtype=complex)
        if todo.size:
            for v, r in zip(todo.tolist(), np.asarray(self.evaluator(todo), dtype=complex)):
                self._cache[v] = r
        return np.array([self._cache[v] for v in flat.tolist()], dtype=complex).reshape(s.shape)


@dataclass(frozen=True)
class EulerConfig:
    """EULER parameters; the defaults give a discretisation error near ``1e-8``."""

    A: float = 18.4
    m: int = 11
    n: int = 38
    stability_tol: float = 1e-6


@dataclass
class CDFResult:
    t: np.ndarray
    values: np.ndarray
    raw: np.ndarray
    clamped: list = field(default_factory=list)
    label: str = ""


def _pollaczek_evaluator(ci, unit, cfg):
    def ev(s):
        s = np.asarray(s, dtype=complex)
        out = np.ones(s.shape, dtype=complex)
        nz = s != 0
        if np.any(nz):
            logs, _ = pollaczek_log_lst(ci, unit * s[nz], cfg)
            out[nz] = np.exp(logs)
        return out
    return ev


def lst_quadrature(cfg: QuadratureConfig) -> QuadratureConfig:
    """Quadrature settings for transform values fed to EULER.

    EULER multiplies transform errors by about ``exp(A/2) ~ 1e4``, so
    tolerances tighter than ``1e-10`` absolute and ``1e-9`` relative buy
    nothing and are raised to those values.
    """
    return replace(cfg, abs_tol=max(cfg.abs_tol, 1e-10), rel_tol=max(cfg.rel_tol, 1e-9))


def make_exact_lst(instance, cfg: QuadratureConfig = QuadratureConfig()) -> LSTHandle:
    """Exact transform of the regime-scaled waiting time (``alpha W``, ``W_n`` or ``sqrt(n) W_n / sigma_n``)."""
    cfg = lst_quadrature(cfg)
    ci, unit, info = contour_for(instance)
    if ci.g_at_x0() >= 1.0:
        raise LogBranchFailure(f"no admissible contour for {ci.label}")
    return LSTHandle(_pollaczek_evaluator(ci, unit, cfg), label=f"exact[{info['regime']}]")


def exponential_lst(theta: float) -> LSTHandle:
    """``(1 + theta s)^-1``."""
    return LSTHandle(lambda s: 1.0 / (1.0 + theta * np.asarray(s, dtype=complex)),
                     atom_at_zero=0.0, label=f"exponential[{theta:g}]")


def walk_max_lst(beta: float, cfg: QuadratureConfig = QuadratureConfig()) -> LSTHandle:
    """Transform of the Gaussian-walk maximum ``M_beta``."""
    return LSTHandle(_pollaczek_evaluator(walk_contour(beta), 1.0, cfg),
                     label=f"M[{beta:g}]")


def refined_walk_lst(beta_n: float, phi_n: float,
                     cfg: QuadratureConfig = QuadratureConfig()) -> LSTHandle:
    """``E[exp(-R_n(s) M_{B_n})]`` with ``R_n(s) = s / ((1 + beta phi)(1 + (s + beta) phi))``.

    For ``phi_n < 0`` the map ``R_n`` has a pole on the positive axis, so the
    composition is only a formal transform there; arguments pushed left of
    the walk contour raise :class:`LogBranchFailure`.
    """
    c = 1.0 + beta_n * phi_n
    B = beta_n / c
    inner = _pollaczek_evaluator(walk_contour(B), 1.0, cfg)

    def ev(s):
        r = np.asarray(s, dtype=complex) / (c * (1.0 + (np.asarray(s) + beta_n) * phi_n))
        # E[exp(-r M_B)] is finite only for Re r > -2B
        if np.any(r.real <= -2 * B):
            raise LogBranchFailure(
                f"refined transform diverges: Re R_n(s) reaches {r.real.min():.3g} <= -2 B_n "
                f"(phi_n={phi_n:.3g} < 0 makes it a formal transform only)")
        out = np.empty(r.shape, dtype=complex)
        near = r.real <= -B
        out[~near] = inner(r[~near])
        if np.any(near):
            x0 = 0.5 * (r.real[near].min() - 2 * B)
            shifted = walk_contour(B)
            shifted = type(shifted)(shifted.log_g, x0, shifted.scale, shifted.label)
            out[near] = _pollaczek_evaluator(shifted, 1.0, cfg)(r[near])
        return out
    return LSTHandle(ev, label=f"refined[{beta_n:g},{phi_n:g}]")


def make_approx_lst(instance, kind: str = "standard",
                    cfg: QuadratureConfig = QuadratureConfig()) -> LSTHandle:
    """Limit transform of the regime.

    ``kind`` is ``"standard"`` (exponential or ``M_beta``) or ``"refined"``
    (Gaussian regime only).
    """
    if isinstance(instance, QueueInstance):
        return exponential_lst(sigma_alpha_sq(instance) / 2)
    if not isinstance(instance, ThinnedQueueInstance):
        raise TypeError(f"unsupported instance {type(instance).__name__}")
    if instance.regime == "nd_kingman":
        return exponential_lst(gamma_n(instance))
    sp = gaussian_regime_params(instance)
    if kind == "refined":
        return refined_walk_lst(sp.beta_n, sp.phi_n, cfg)
    return walk_max_lst(sp.beta_n, cfg)


def _euler_weights(m: int) -> np.ndarray:
    return np.array([comb(m, k) for k in range(m + 1)], dtype=float) / 2.0 ** m


def invert_cdf(h: LSTHandle, t_grid, euler: EulerConfig = EulerConfig(),
               threads: int = 1) -> CDFResult:
    """``P(X <= t)`` by EULER inversion of ``h(s) / s``.

    Raises
    ------
    InversionUnstable
        When the last two Euler-averaged sums differ by more than
        ``euler.stability_tol``.
    """
    t = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if np.any(t <= 0):
        raise ValueError("inversion points must be positive")
    A, m, n = euler.A, euler.m, euler.n
    N = n + m
    k = np.arange(N + 1)
    w = _euler_weights(m)

    def one(tj):
        s = (A + 2j * pi * k) / (2 * tj)
        F = h(s) / s
        terms = (-1.0) ** k * F.real
        terms[0] *= 0.5
        partial = exp(A / 2) / tj * np.cumsum(terms)
        e_n = float(w @ partial[n:n + m + 1])
        e_prev = float(w @ partial[n - 1:n + m])
        if abs(e_n - e_prev) > euler.stability_tol:
            raise InversionUnstable(
                f"Euler sums disagree by {abs(e_n - e_prev):.2e} at t={tj:g} ({h.label})")
        return e_n

    if threads > 1 and len(t) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(threads) as ex:
            raw = np.array(list(ex.map(one, t)))
    else:
        raw = np.array([one(tj) for tj in t])
    vals = np.clip(raw, 0.0, 1.0)
    clamped = [(float(tj), float(r)) for tj, r in zip(t, raw) if r < 0.0 or r > 1.0]
    return CDFResult(t, vals, raw, clamped, h.label)


def atom_at_zero(h: LSTHandle, m1: float, euler: EulerConfig = EulerConfig()) -> float:
    """``P(X = 0)`` read off as the inverted CDF at ``t = 1e-6 m1``."""
    if h.atom_at_zero is not None:
        return h.atom_at_zero
    return float(invert_cdf(h, [1e-6 * m1], euler).values[0])
