"""Contour integrals of ``log(1 - g(z))`` along ``Re z = x0``.

All exact results in the package reduce to integrals

    I = int_0^inf  Re[ kernel(z) log(1 - g(z)) ] dy,    z = x0 + i y,

where ``g`` is the transform of the random-walk increment and the kernel
is ``z^-(l+1)`` (cumulants) or ``s / (z (s - z))`` (transforms). The
integrand is vector valued so ``g`` is evaluated once per node for every
order ``l`` or every transform argument ``s``.

Integration proceeds on ``[0, Y0]`` with a mesh refined around ``|x0|``
and the natural scale of ``g``, then on doubling blocks ``[Y, 2Y]``. After
each block the remainder ``[2Y, inf)`` is extrapolated from a power-law
fit ``A y^-p`` to the block means of ``log(1 - g)``; the tail therefore
stays accurate when ``log(1 - g)`` does not decay, as for lattice laws. The
loop stops once two successive extrapolated totals agree.

When ``g`` is exactly periodic with period ``P`` (lattice increments) the
line integral folds onto one period, with the kernel replaced by its
lattice sum over ``z + i j P``. Those sums have closed forms through
derivatives of ``pi cot(pi w)``, so no truncation is involved.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial, fsum, log2, pi
from typing import Callable

import numpy as np

from ._numerics import log_one_minus_exp
from .errors import LogBranchFailure, PanelLimitExceeded, TruncationFailure

# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1]
_XGK = np.array([0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                 0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                 0.207784955007898467600689403773245, 0.0])
_WGK = np.array([0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                 0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                 0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

_NODES = np.concatenate([-_XGK[:7], _XGK[::-1]])
_WK = np.concatenate([_WGK[:7], _WGK[::-1]])
_wg_full = np.zeros(8)
_wg_full[1::2] = _WG
_WG15 = np.concatenate([_wg_full[:7], _wg_full[::-1]])


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and limits of the contour quadrature.

    ``y0`` and ``y_max`` are measured in units of the integrand's natural
    scale (``ContourIntegrand.scale``).
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    y0: float = 32.0
    y_max: float = 1e6
    max_panels: int = 400_000
    precision: str = "double"

    @property
    def dtype(self):
        return np.clongdouble if self.precision == "extended" else np.complex128


@dataclass(frozen=True)
class ContourIntegrand:
    """``log g`` on the vertical line ``Re z = x0``.

    Parameters
    ----------
    log_g : callable
        Maps complex ``z`` to ``log g(z)``; any branch works because only
        ``exp(log_g)`` enters.
    x0 : float
        Abscissa of the contour. Needs ``g(x0) < 1``.
    scale : float
        Length scale over which ``g`` varies (``1/alpha`` or ``n``).
    period : float, optional
        Exact period of ``g`` along the contour (lattice increments).
    marks : tuple of float
        Spacings of points where ``|g|`` may have narrow peaks.
    mark_width : float
        Width of those peaks.
    """

    log_g: Callable
    x0: float
    scale: float = 1.0
    label: str = ""
    period: float | None = None
    marks: tuple = ()
    mark_width: float = 0.0

    def log1mg(self, y, dtype=np.complex128):
        z = (self.x0 + 1j * np.asarray(y)).astype(dtype)
        w = self.log_g(z)
        if np.any(np.real(w) >= 0):
            raise LogBranchFailure(f"|g| >= 1 on the contour {self.label}")
        return z, log_one_minus_exp(w)

    def g_at_x0(self) -> float:
        return float(np.exp(np.real(self.log_g(np.array([self.x0 + 0j])))[0]))


@dataclass
class ContourResult:
    values: np.ndarray
    errors: np.ndarray
    truncation: float
    evaluations: int
    panels: int
    notes: list = field(default_factory=list)


_BATCH = 1 << 21  # integrand values held at once


def _eval_panels(f, a, b, m=None):
    if m is None:
        k, e = _eval_panels(f, a[:1], b[:1], -1)
        m = k.shape[1]
        if len(a) > 1:
            k2, e2 = _eval_panels(f, a[1:], b[1:], m)
            k, e = np.concatenate([k, k2]), np.concatenate([e, e2])
        return k, e
    step = max(1, _BATCH // (15 * max(m, 1)))
    if m > 0 and len(a) > step:
        parts = [_eval_panels(f, a[i:i + step], b[i:i + step], m) for i in range(0, len(a), step)]
        return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])
    c = 0.5 * (a + b)
    hw = 0.5 * (b - a)
    x = (c[:, None] + hw[:, None] * _NODES[None, :]).ravel()
    fx = f(x).reshape(len(a), 15, -1)
    k = hw[:, None] * np.einsum("pjm,j->pm", fx, _WK)
    g = hw[:, None] * np.einsum("pjm,j->pm", fx, _WG15)
    return k, np.abs(k - g)


def integrate_vector(f, edges, abs_tol, rel_tol, max_panels=400_000, return_panels=False):
    """Globally adaptive Gauss-Kronrod (7, 15) for a vector integrand.

    Parameters
    ----------
    f : callable
        ``f(x)`` maps nodes of shape ``(N,)`` to values of shape ``(N, m)``.
    edges : array_like
        Initial panel boundaries (increasing).
    abs_tol, rel_tol : float or array of shape (m,)
        Component ``j`` is converged when its summed error estimate is at most
        ``max(abs_tol[j], rel_tol[j] * |I_j|)``. ``inf`` disables a component.

    Returns
    -------
    values, errors : ndarray of shape (m,)
    n_panels, n_evals : int
    panels : tuple of (a, b, K)
        Only with ``return_panels``: panel bounds and Kronrod estimates.
    """
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1], edges[1:]
    K, E = _eval_panels(f, a, b)
    n_evals = 15 * len(a)
    stuck = np.zeros(len(a), dtype=bool)
    while True:
        total = K.sum(axis=0)
        err = E.sum(axis=0)
        with np.errstate(invalid="ignore"):
            tol = np.nan_to_num(np.maximum(abs_tol, rel_tol * np.abs(total)), nan=np.inf)
        if np.all(err <= tol):
            break
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(np.isfinite(tol), E / tol, 0.0)
        badness = np.nan_to_num(ratio.max(axis=1), nan=0.0)
        badness[stuck] = 0.0
        if not np.any(badness > 0):
            break
        # split the worst panels until the untouched rest carries <= half the budget
        order = np.argsort(badness)
        keep = np.cumsum(badness[order]) <= 0.5
        split = np.zeros(len(a), dtype=bool)
        split[order[~keep]] = True
        mid = 0.5 * (a[split] + b[split])
        tiny = (mid <= a[split]) | (mid >= b[split])
        if np.all(tiny):
            stuck[split] = True
            continue
        idx = np.flatnonzero(split)
        stuck[idx[tiny]] = True
        idx = idx[~tiny]
        mid = 0.5 * (a[idx] + b[idx])
        na = np.concatenate([a[idx], mid])
        nb = np.concatenate([mid, b[idx]])
        k2, e2 = _eval_panels(f, na, nb)
        n_evals += 15 * len(na)
        live = np.ones(len(a), dtype=bool)
        live[idx] = False
        a = np.concatenate([a[live], na])
        b = np.concatenate([b[live], nb])
        K = np.concatenate([K[live], k2])
        E = np.concatenate([E[live], e2])
        stuck = np.concatenate([stuck[live], np.zeros(len(na), dtype=bool)])
        if len(a) > max_panels:
            raise PanelLimitExceeded(f"more than {max_panels} panels needed")
    values = np.array([fsum(col) for col in K.T])
    if return_panels:
        return values, E.sum(axis=0), len(a), n_evals, (a, b, K)
    return values, E.sum(axis=0), len(a), n_evals


_GL_X, _GL_W = np.polynomial.legendre.leggauss(40)
_GL_X = 1.5 + 0.5 * _GL_X  # nodes on [1, 2]
_GL_W = 0.5 * _GL_W
_WIN = np.sin(np.pi * (_GL_X - 1.0)) ** 2


def _window(y, lo, hi):
    return np.sin(np.pi * (y - lo) / (hi - lo)) ** 2


class _PowerTail:
    """Power law ``A y^-p`` through two windowed block means of ``log(1 - g)``.

    ``m1`` and ``m2`` are sin^2-windowed means over ``[a/2, a]`` and
    ``[a, 2a]``. The window suppresses the contribution of oscillations to
    the means from ``O(period / a)`` to ``O((period / a)^2)``.
    """

    def __init__(self, m1, m2, a, x0):
        self.x0 = x0
        if m1 == 0 or m2 == 0:
            self.A, self.p = 0.0, 0.0
            return
        p = min(max(log2(abs(m1) / abs(m2)), 0.0), 6.0)
        cp = np.sum(_GL_W * _WIN * _GL_X ** (-p)) / 0.5
        self.A = m2 / (a ** (-p) * cp)
        self.p = p

    def integral(self, y, q):
        """``int_y^inf A t^-p (x0 + i t)^-q dt`` for arrays ``y`` (rows) and ``q`` (columns)."""
        y = np.asarray(y, dtype=float)[:, None]
        q = np.asarray(q, dtype=float)[None, :]
        p = self.p
        lead = y ** (1 - p - q) / np.maximum(p + q - 1, 1e-3)
        corr = -(q * self.x0 / 1j) * y ** (-p - q) / (p + q)
        return self.A * (1j) ** (-q) * (lead + corr)


def _mark_edges(ci: ContourIntegrand, lo, hi, cap=4096):
    """Breakpoints at and around the possible peaks of ``|g|`` inside ``(lo, hi)``."""
    if not ci.marks or ci.mark_width <= 0:
        return np.empty(0)
    centres = []
    for d in ci.marks:
        k0, k1 = int(np.ceil(lo / d)), int(np.floor(hi / d))
        if k1 - k0 + 1 > cap:
            return np.empty(0)
        centres.append(d * np.arange(max(k0, 1), k1 + 1))
    c = np.concatenate(centres)
    if len(c) > cap:
        return np.empty(0)
    off = ci.mark_width * np.array([0.0, -0.5, 0.5, -2.0, 2.0, -6.0, 6.0])
    pts = (c[:, None] + off[None, :]).ravel()
    return pts[(pts > lo) & (pts < hi)]


def _edges(lo, hi, *extra):
    pts = np.concatenate([[lo, hi], *extra])
    pts = np.unique(pts[(pts >= lo) & (pts <= hi)])
    return pts


def _cot_pi(w):
    """``cot(pi w)`` for ``Im w > 0``, stable for large ``Im w``."""
    e = np.expm1(2j * np.pi * w)
    return 1j * (e + 2.0) / e


def lattice_kernel_sums(z, P, qmax):
    """``S_q(z) = sum_j (z + i j P)^-q`` for ``q = 1 .. qmax`` (symmetric sum for q=1).

    Needs ``Re z < 0``. Uses ``sum_j (w + j)^-q = (-1)^(q-1)/(q-1)!
    d^(q-1)/dw^(q-1) pi cot(pi w)`` with ``w = z / (iP)``; the derivatives are
    polynomials in ``c = cot(pi w)`` because ``c' = -pi (1 + c^2)``.
    """
    w = z / (1j * P)
    c = _cot_pi(w)
    poly = np.polynomial.Polynomial([0.0, pi])
    dc = np.polynomial.Polynomial([-pi, 0.0, -pi])
    out = []
    for q in range(1, qmax + 1):
        val = poly(c) * ((-1) ** (q - 1) / factorial(q - 1))
        out.append(val * (1j * P) ** (-q))
        poly = poly.deriv() * dc
    return out


def _drive_periodic(ci: ContourIntegrand, kernel, m, cfg: QuadratureConfig):
    """Integrate ``kernel(z, L)`` over one half period ``[0, P/2]``."""
    x = abs(ci.x0)
    half = 0.5 * ci.period
    geo = x / 8 * 2.0 ** np.arange(0, 200)
    edges = _edges(0.0, half, geo, [x, ci.scale, half / 2], _mark_edges(ci, 0.0, half, 1 << 15))

    def f(y):
        z, L = ci.log1mg(y, cfg.dtype)
        return kernel(z, L)

    v, e, panels, evals = integrate_vector(f, edges, cfg.abs_tol, cfg.rel_tol, cfg.max_panels)
    return ContourResult(v, e, half, evals, panels, ["periodic"])


def _use_periodic(ci: ContourIntegrand, cfg: QuadratureConfig) -> bool:
    if not ci.period:
        return False
    if ci.period > cfg.y_max * max(ci.scale, 1.0):
        return False
    n_marks = sum(0.5 * ci.period / d for d in ci.marks)
    return n_marks <= 1 << 15


def _drive(ci: ContourIntegrand, kernel, tail, m, cfg: QuadratureConfig, min_core=0.0):
    """Core-plus-doubling integration shared by cumulants and transforms.

    ``kernel(z, L)`` returns the ``(N, m)`` real integrand and
    ``tail(fit, y)`` the ``(len(y), m)`` extrapolated remainders beyond ``y``.
    The reported total is the window-weighted average over the last block
    of ``integral up to y + remainder beyond y``, which cancels the
    zero-mean oscillation left by a non-decaying integrand.
    """
    dtype = cfg.dtype
    x = abs(ci.x0)
    S = ci.scale
    block = [0.0, 1.0]  # current doubling block, read by the window

    def f(y):
        z, L = ci.log1mg(y, dtype)
        out = np.empty((len(y), m + 2))
        out[:, :m] = kernel(z, L)
        w = _window(y, *block)
        out[:, m] = L.real * w
        out[:, m + 1] = L.imag * w
        return out

    y_core = max(cfg.y0 * S, 16 * x, 8 * min_core)
    pts = {x / 4, x, 4 * x, 1.0, 10.0, S / 4, S, 4 * S}
    geo = x / 8 * 2.0 ** np.arange(0, 200)
    pts.update(geo[geo < y_core / 2])
    edges = _edges(0.0, y_core / 2, list(pts), _mark_edges(ci, 0.0, y_core / 2))

    atol = np.full(m + 2, cfg.abs_tol / 2)
    rtol = np.full(m + 2, cfg.rel_tol / 2)
    atol[m:] = np.inf
    rtol[m:] = np.inf
    core, err, panels, evals = integrate_vector(f, edges, atol, rtol, cfg.max_panels)[:4]
    acc = core[:m].copy()
    qerr = err[:m].copy()

    means = []
    lo = y_core / 2
    prev_total = None
    limit = cfg.y_max * max(S, 1.0)
    while True:
        hi = 2 * lo
        block[:] = [lo, hi]
        bv, be, bp, bn, (pa, pb, pk) = integrate_vector(
            f, _edges(lo, hi, np.linspace(lo, hi, 9), _mark_edges(ci, lo, hi)), atol / 4, rtol / 4, cfg.max_panels, return_panels=True)
        panels += bp
        evals += bn
        means.append((bv[m] + 1j * bv[m + 1]) / (0.5 * (hi - lo)))
        if len(means) >= 2:
            fit = _PowerTail(means[-2], means[-1], lo, ci.x0)
            srt = np.argsort(pa)
            pa, pb, pk = pa[srt], pb[srt], pk[srt, :m]
            running = acc + np.cumsum(pk, axis=0)
            totals = running + tail(fit, pb)
            w = (pb - pa) * _window(pb, lo, hi)
            total = (w[:, None] * totals).sum(axis=0) / w.sum()
        acc += bv[:m]
        qerr += be[:m]
        lo = hi
        if len(means) < 2:
            continue
        tol = np.maximum(cfg.abs_tol, cfg.rel_tol * np.abs(total))
        if prev_total is not None:
            delta = np.abs(total - prev_total)
            if np.all(delta <= tol / 2):
                return ContourResult(total, qerr + delta, hi, evals, panels)
            if hi > limit:
                raise TruncationFailure(
                    f"tail not converged at y={hi:g} for {ci.label}; max change "
                    f"{np.max(delta):.3g}")
        prev_total = total


def contour_cumulants(ci: ContourIntegrand, orders, cfg: QuadratureConfig = QuadratureConfig()):
    """Cumulants ``c_l = (-1)^l l!/pi int_0^inf Re[log(1-g)/z^(l+1)] dy``.

    ``l = 0`` gives ``-log P(walk maximum = 0)``.

    Returns
    -------
    ContourResult
        ``values`` and ``errors`` are ordered like ``orders``.
    """
    orders = np.atleast_1d(np.asarray(orders, dtype=int))
    if ci.g_at_x0() >= 1.0:
        raise LogBranchFailure(f"g(x0) >= 1 at x0={ci.x0}; contour is not admissible")
    lmax = int(orders.max())
    pref = np.array([(-1) ** l * factorial(l) / pi for l in orders])

    def kernel(z, L):
        zi = 1.0 / z
        powers = [zi]
        for _ in range(lmax):
            powers.append(powers[-1] * zi)
        return np.stack([np.real(L * powers[l]) for l in orders], axis=1).astype(float) * pref

    def tail(fit, y):
        return pref * np.real(fit.integral(y, orders + 1))

    if _use_periodic(ci, cfg):
        def kernel_p(z, L):
            sums = lattice_kernel_sums(z, ci.period, lmax + 1)
            # the symmetric 1/z sum counts P(S_j = 0) with weight 1/2; the mean of
            # log(1 - g) over a period is -sum_j P(S_j = 0)/j, and adding pi/P
            # to the kernel removes that half so order 0 gives P(max = 0) exactly
            sums[0] = sums[0] + pi / ci.period
            return np.stack([np.real(L * sums[l]) for l in orders], axis=1).astype(float) * pref

        return _drive_periodic(ci, kernel_p, len(orders), cfg)
    res = _drive(ci, kernel, tail, len(orders), cfg)
    if ci.period and np.any(orders == 0):
        res.notes.append("order 0 counts half of P(S_j = 0); period too long to fold")
    return res


def cumulant_contour_integral(ci: ContourIntegrand, order: int,
                              cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """Single cumulant ``c_order`` of the walk maximum described by ``ci``."""
    return float(contour_cumulants(ci, [order], cfg).values[0])


def pollaczek_log_lst(ci: ContourIntegrand, s, cfg: QuadratureConfig = QuadratureConfig()):
    """``log E[exp(-s M)]`` for the walk maximum ``M`` described by ``ci``.

    Uses ``-(1/2 pi) int s / (z (s - z)) log(1 - g(z)) dy`` over the whole
    line, folded onto ``y >= 0``. ``s`` must lie to the right of the contour.

    Returns
    -------
    values : complex ndarray
    result : ContourResult
        Raw result with real and imaginary parts interleaved.
    """
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    if np.any(s.real <= ci.x0):
        raise LogBranchFailure("transform argument must lie right of the contour")
    if ci.g_at_x0() >= 1.0:
        raise LogBranchFailure(f"g(x0) >= 1 at x0={ci.x0}; contour is not admissible")
    sc = np.conj(s)
    m = 2 * len(s)
    c = -1.0 / (2 * pi)

    def kernel(z, L):
        zc = z[:, None]
        Lc = L[:, None]
        F = s / (zc * (s - zc)) * Lc + np.conj(sc / (zc * (sc - zc)) * Lc)
        out = np.empty((len(z), m))
        out[:, 0::2] = c * F.real
        out[:, 1::2] = c * F.imag
        return out

    def tail(fit, y):
        t = fit.integral(y, [2, 3])
        t2, t3 = t[:, :1], t[:, 1:]
        F = (-s * t2 - s * s * t3) + np.conj(-sc * t2 - sc * sc * t3)
        out = np.empty((len(y), m))
        out[:, 0::2] = c * F.real
        out[:, 1::2] = c * F.imag
        return out

    if _use_periodic(ci, cfg):
        P = ci.period

        def ksum(z, sv):
            # sum_j s / ((z + ijP)(s - z - ijP)), i.e. 1/z + 1/(s - z) summed
            return (np.pi / (1j * P)) * (_cot_pi(z / (1j * P)) - _cot_pi((z - sv) / (1j * P)))

        def kernel_p(z, L):
            zc, Lc = z[:, None], L[:, None]
            F = ksum(zc, s) * Lc + np.conj(ksum(zc, sc) * Lc)
            out = np.empty((len(z), m))
            out[:, 0::2] = c * F.real
            out[:, 1::2] = c * F.imag
            return out

        res = _drive_periodic(ci, kernel_p, m, cfg)
    else:
        res = _drive(ci, kernel, tail, m, cfg, min_core=float(np.max(np.abs(s))))
    return res.values[0::2] + 1j * res.values[1::2], res


def tail_bound(ci: ContourIntegrand, order: int, y: float) -> float:
    """Bound on ``|int_y^inf Re[log(1-g)/z^(order+1)] dy|`` for ``order >= 1``.

    Uses ``|log(1 - g)| <= -log(1 - g(x0)) + pi`` along the contour.
    """
    g0 = ci.g_at_x0()
    return (-np.log1p(-g0) + pi) / (order * y ** order)
