"""Unit-mean service and interarrival distributions.

Each family is a frozen dataclass whose constructor validates its
parameters, so an invalid distribution can never exist. Besides the
moment generating function ``f(z) = E[exp(z X)]`` every family exposes the
*centered* cumulant generating function ``log E[exp(z (X - 1))]``, which is
the numerically stable building block of all heavy-traffic transforms.

Examples
--------
>>> g = Gamma.with_scale(0.5)
>>> g.variance, g.c3
(0.5, 0.5)
>>> float(abs(mgf(g, 0.2) - 1 / 0.9 ** 2))
0.0
"""
from __future__ import annotations

from dataclasses import dataclass, fields
from fractions import Fraction
from math import isfinite
from typing import ClassVar

import numpy as np

from . import _numerics as nx
from .errors import (ConfigError, DegenerateLattice, NonPositiveParameter,
                     NonUnitMean, OutsideAnalyticityStrip,
                     TwoPointOrderViolation, UnsupportedOrder)

MEAN_TOL = 1e-12


def _positive(name, value):
    if not (isfinite(value) and value > 0):
        raise NonPositiveParameter(f"{name} must be positive and finite, got {value!r}")


class DistributionSpec:
    """Common interface of the unit-mean families."""

    kind: ClassVar[str] = ""
    edge: float = np.inf  # mgf finite for Re z < edge

    @property
    def mean(self) -> float:
        return 1.0

    @property
    def variance(self) -> float:
        raise NotImplementedError

    @property
    def c3(self) -> float:
        raise NotImplementedError

    @property
    def spacing(self):
        """Atom spacing for lattice families, ``None`` otherwise."""
        return None

    @property
    def max_support(self) -> float:
        return np.inf

    # transforms -------------------------------------------------------
    def centered_cgf(self, z):
        """``log E[exp(z (X - 1))]`` evaluated without cancellation."""
        raise NotImplementedError

    def mgf_derivatives(self, z, order: int):
        """``[f(z), f'(z), ..., f^(order)(z)]``."""
        raise NotImplementedError

    # sampling ----------------------------------------------------------
    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        raise NotImplementedError

    def sample_mean(self, rng: np.random.Generator, n: int, size) -> np.ndarray:
        """Draws of the mean of ``n`` independent copies."""
        acc = np.zeros(size)
        for _ in range(n):
            acc += self.sample(rng, size)
        return acc / n

    # serialization -------------------------------------------------------
    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        d.update({f.name: getattr(self, f.name) for f in fields(self)})
        return d

    def _strip(self, z):
        z = np.asarray(z)
        if np.any(z.real >= self.edge):
            raise OutsideAnalyticityStrip(
                f"{self.kind}: Re z must be below {self.edge}, got max {np.max(z.real)}")
        return z


def _bell_derivs(f, k1, k2, k3, order):
    """mgf derivatives from cumulant generating function derivatives."""
    out = [f, f * k1, f * (k2 + k1 * k1), f * (k3 + 3 * k1 * k2 + k1 ** 3)]
    return out[: order + 1]


@dataclass(frozen=True)
class Gamma(DistributionSpec):
    """Gamma law with ``shape * scale = 1``; mgf ``(1 - scale z)^-shape``."""

    shape: float
    scale: float
    kind: ClassVar[str] = "gamma"

    def __post_init__(self):
        _positive("shape", self.shape)
        _positive("scale", self.scale)
        if abs(self.shape * self.scale - 1.0) > MEAN_TOL:
            raise NonUnitMean(f"gamma mean is {self.shape * self.scale}, expected 1")

    @classmethod
    def with_scale(cls, scale: float) -> "Gamma":
        return cls(1.0 / scale, scale)

    @property
    def edge(self):
        return 1.0 / self.scale

    @property
    def variance(self):
        return self.scale

    @property
    def c3(self):
        return 2.0 * self.scale ** 2

    def centered_cgf(self, z):
        z = self._strip(z)
        return -self.shape * nx.log1p_minus_x(-self.scale * z)

    def mgf_derivatives(self, z, order):
        z = self._strip(z)
        base = 1.0 - self.scale * z
        out, coef = [], 1.0
        for r in range(order + 1):
            out.append(coef * base ** (-self.shape - r))
            coef *= (self.shape + r) * self.scale
        return out

    def sample(self, rng, size):
        return rng.gamma(self.shape, self.scale, size)

    def sample_mean(self, rng, n, size):
        # the mean of n copies is again gamma
        return rng.gamma(n * self.shape, self.scale / n, size)


@dataclass(frozen=True)
class Bates(DistributionSpec):
    """Mean of ``points`` uniforms on ``[1 - half_width, 1 + half_width]``."""

    points: int
    half_width: float
    kind: ClassVar[str] = "bates"

    def __post_init__(self):
        if int(self.points) != self.points or self.points < 1:
            raise NonPositiveParameter(f"points must be a positive integer, got {self.points!r}")
        object.__setattr__(self, "points", int(self.points))
        _positive("half_width", self.half_width)
        if self.half_width > 1:
            raise NonPositiveParameter("half_width above 1 allows negative values")

    @property
    def variance(self):
        return self.half_width ** 2 / (3 * self.points)

    @property
    def c3(self):
        return 0.0

    @property
    def max_support(self):
        return 1.0 + self.half_width

    def centered_cgf(self, z):
        z = self._strip(z)
        return self.points * nx.log_sinhc(self.half_width * z / self.points)

    def mgf_derivatives(self, z, order):
        z = self._strip(z)
        m, d = self.points, self.half_width
        u = d * z / m
        s1, s2, s3 = nx.log_sinhc_derivs(u)
        f = np.exp(self.centered_cgf(z) + z)
        return _bell_derivs(f, 1.0 + d * s1, d * d / m * s2, d ** 3 / m ** 2 * s3, order)

    def sample(self, rng, size):
        shape = (size,) if np.isscalar(size) else tuple(size)
        u = rng.uniform(1 - self.half_width, 1 + self.half_width, shape + (self.points,))
        return u.mean(axis=-1)


class _Atomic(DistributionSpec):
    """Finitely supported law with atoms ``atoms`` and masses ``probs``."""

    atoms: np.ndarray
    probs: np.ndarray

    @property
    def variance(self):
        return float(np.sum(self.probs * (self.atoms - 1.0) ** 2))

    @property
    def max_support(self):
        return float(np.max(self.atoms))

    def centered_cgf(self, z):
        z = nx._as_complex(self._strip(z))
        acc = np.zeros_like(z)
        for a, p in zip(self.atoms, self.probs):
            acc = acc + p * nx.expm1_minus_x(z * (a - 1.0))
        return nx.clog1p(acc)

    def mgf_derivatives(self, z, order):
        z = nx._as_complex(self._strip(z))
        out = []
        for r in range(order + 1):
            acc = np.zeros_like(z)
            for a, p in zip(self.atoms, self.probs):
                acc = acc + p * a ** r * np.exp(z * a)
            out.append(acc)
        return out

    def sample(self, rng, size):
        idx = rng.choice(len(self.atoms), size=size, p=self.probs)
        return self.atoms[idx]


@dataclass(frozen=True)
class LatticeM(_Atomic):
    """Uniform law on ``points`` equally spaced atoms in ``[1-d, 1+d]``."""

    points: int
    half_width: float
    kind: ClassVar[str] = "lattice"

    def __post_init__(self):
        if int(self.points) != self.points or self.points < 2:
            raise DegenerateLattice(f"lattice needs at least 2 points, got {self.points!r}")
        object.__setattr__(self, "points", int(self.points))
        _positive("half_width", self.half_width)
        if self.half_width > 1:
            raise NonPositiveParameter("half_width above 1 allows negative values")

    @property
    def atoms(self):
        m, d = self.points, self.half_width
        return (1.0 - d) + np.arange(m) * (2.0 * d / (m - 1))

    @property
    def probs(self):
        return np.full(self.points, 1.0 / self.points)

    @property
    def spacing(self):
        return 2.0 * self.half_width / (self.points - 1)

    @property
    def variance(self):
        m, d = self.points, self.half_width
        return d * d * (m + 1) / (3.0 * (m - 1))

    @property
    def c3(self):
        return 0.0

    def sample(self, rng, size):
        return self.atoms[rng.integers(self.points, size=size)]


@dataclass(frozen=True)
class TwoPoint(_Atomic):
    """Two atoms ``a < 1 < b`` weighted to have mean one."""

    a: float
    b: float
    kind: ClassVar[str] = "two_point"

    def __post_init__(self):
        if not (0 <= self.a < 1 < self.b and isfinite(self.b)):
            raise TwoPointOrderViolation(f"need 0 <= a < 1 < b, got a={self.a}, b={self.b}")

    @property
    def p(self):
        """Mass at ``a``."""
        return (self.b - 1.0) / (self.b - self.a)

    @property
    def atoms(self):
        return np.array([self.a, self.b])

    @property
    def probs(self):
        return np.array([self.p, 1.0 - self.p])

    @property
    def spacing(self):
        return self.b - self.a

    @property
    def variance(self):
        return (1.0 - self.a) * (self.b - 1.0)

    @property
    def c3(self):
        return (self.a + self.b - 2.0) * self.variance

    def sample(self, rng, size):
        return np.where(rng.random(size) < self.p, self.a, self.b)


@dataclass(frozen=True)
class InverseGaussian(DistributionSpec):
    """Inverse Gaussian with mean one and shape ``lam``."""

    lam: float
    kind: ClassVar[str] = "inverse_gaussian"

    def __post_init__(self):
        _positive("lam", self.lam)

    @property
    def edge(self):
        return self.lam / 2.0

    @property
    def variance(self):
        return 1.0 / self.lam

    @property
    def c3(self):
        return 3.0 / self.lam ** 2

    def centered_cgf(self, z):
        z = nx._as_complex(self._strip(z))
        r = np.sqrt(1.0 - 2.0 * z / self.lam)
        return 2.0 * z * z / (self.lam * (1.0 + r) ** 2)

    def mgf_derivatives(self, z, order):
        z = nx._as_complex(self._strip(z))
        lam = self.lam
        r = np.sqrt(1.0 - 2.0 * z / lam)
        f = np.exp(lam * (1.0 - r))
        return _bell_derivs(f, 1.0 / r, 1.0 / (lam * r ** 3), 3.0 / (lam * lam * r ** 5), order)

    def sample(self, rng, size):
        return rng.wald(1.0, self.lam, size)

    def sample_mean(self, rng, n, size):
        return rng.wald(1.0, n * self.lam, size)


@dataclass(frozen=True)
class Deterministic(DistributionSpec):
    """Point mass at one."""

    kind: ClassVar[str] = "deterministic"

    @property
    def variance(self):
        return 0.0

    @property
    def c3(self):
        return 0.0

    @property
    def max_support(self):
        return 1.0

    def centered_cgf(self, z):
        return np.zeros_like(nx._as_complex(z))

    def mgf_derivatives(self, z, order):
        e = np.exp(nx._as_complex(z))
        return [e] * (order + 1)

    def sample(self, rng, size):
        return np.ones(size)

    def sample_mean(self, rng, n, size):
        return np.ones(size)


FAMILIES = {cls.kind: cls for cls in
            (Gamma, Bates, LatticeM, TwoPoint, InverseGaussian, Deterministic)}
_ALIASES = {"uniform_sum": "bates", "lattice_m": "lattice", "twopoint": "two_point",
            "ig": "inverse_gaussian", "det": "deterministic"}


def _number(value, key):
    if isinstance(value, str):
        try:
            return float(Fraction(value))
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{key}: cannot parse {value!r} as a number") from exc
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    return float(value)


def from_dict(doc: dict) -> DistributionSpec:
    """Build a distribution from ``{"kind": ..., <parameters>}``.

    Numbers may be given as strings such as ``"5/2"``. ``{"kind": "erlang",
    "s": s}`` is shorthand for a gamma law of shape ``s``. A gamma law may
    give either ``shape`` or ``scale``; an explicit ``mean`` other than one
    is rejected.
    """
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ConfigError(f"distribution needs a 'kind' field, got {doc!r}")
    doc = dict(doc)
    raw_kind = doc.pop("kind")
    if raw_kind == "erlang":
        # Erlang(s) scaled to mean one
        s = _number(doc.pop("s", None) if "s" in doc else doc.pop("shape", None), "s")
        if s != int(s) or s < 1:
            raise ConfigError(f"erlang: s must be a positive integer, got {s}")
        raw_kind, doc["shape"] = "gamma", s
    if raw_kind not in FAMILIES:
        raise ConfigError(f"unknown distribution kind {raw_kind!r}")
    if "mean" in doc:
        mean = _number(doc.pop("mean"), "mean")
        if abs(mean - 1.0) > MEAN_TOL:
            raise NonUnitMean(f"mean must be 1, got {mean}")
    params = {k: _number(v, k) for k, v in doc.items()}
    cls = FAMILIES[raw_kind]
    if cls is Gamma:
        if "scale" in params and "shape" not in params:
            params["shape"] = 1.0 / params["scale"]
        elif "shape" in params and "scale" not in params:
            params["scale"] = 1.0 / params["shape"]
    names = {f.name for f in fields(cls)}
    unknown = set(params) - names
    missing = names - set(params)
    if unknown or missing:
        raise ConfigError(f"{raw_kind}: unknown {sorted(unknown)}, missing {sorted(missing)}")
    return cls(**params)


def validate(spec) -> DistributionSpec:
    """Return a validated distribution; accepts an instance or its dict form."""
    if isinstance(spec, DistributionSpec):
        # re-run the constructor checks (guards against object.__setattr__ tampering)
        return type(spec)(**{f.name: getattr(spec, f.name) for f in fields(spec)})
    return from_dict(spec)


def mgf(spec: DistributionSpec, z):
    """Moment generating function ``E[exp(z X)]``."""
    return np.exp(spec.centered_cgf(z) + np.asarray(z))


def mgf_derivatives(spec: DistributionSpec, z, order: int = 3):
    """Analytic derivatives ``f, f', ..., f^(order)`` with ``order <= 3``."""
    if order not in (0, 1, 2, 3):
        raise UnsupportedOrder(f"derivative order must be 0..3, got {order}")
    return spec.mgf_derivatives(z, order)


def cumulants3(spec: DistributionSpec):
    """``(mean, variance, third cumulant)`` in closed form."""
    return spec.mean, spec.variance, spec.c3


def describe(spec: DistributionSpec) -> str:
    d = spec.to_dict()
    kind = d.pop("kind")
    if kind == "gamma":
        return f"Gamma(scale={spec.scale:g})"
    args = ", ".join(f"{k}={v:g}" for k, v in d.items())
    return f"{type(spec).__name__}({args})"


__all__ = ["DistributionSpec", "Gamma", "Bates", "LatticeM", "TwoPoint",
           "InverseGaussian", "Deterministic", "FAMILIES", "from_dict", "validate",
           "mgf", "mgf_derivatives", "cumulants3", "describe"]
