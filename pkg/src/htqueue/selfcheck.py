"""Fast internal consistency checks behind ``htqueue selfcheck``."""
from __future__ import annotations

import time
from math import pi

import numpy as np

from . import gaussian_walk as gw
from . import zeta as zeta_mod
from .distributions import Gamma
from .moments import exact_scaled_moments
from .transform import QueueInstance, ThinnedQueueInstance

WALK_BETAS = (0.1, 0.5, 1.0, 2.0, 3.0)


def check_zeta():
    # looked up through the module so a patched implementation is what gets tested
    known = {2.0: pi ** 2 / 6, 4.0: pi ** 4 / 90, 0.0: -0.5, -1.0: -1 / 12, -3.0: 1 / 120,
             -2.0: 0.0, -5.0: -1 / 252}
    worst = max(abs(zeta_mod.riemann_zeta(s) - v) for s, v in known.items())
    return worst <= 1e-14, f"max |zeta - known| = {worst:.2e}"


def check_walk_dual():
    worst = 0.0
    for b in WALK_BETAS:
        a = gw.mgw_cumulants_integral(b, 5)
        z = gw.mgw_cumulants_zeta(b, 5)
        worst = max(worst, float(np.max(np.abs(a - z) / np.maximum(1.0, np.abs(a)))))
    return worst <= 1e-8, f"max relative gap integral vs zeta = {worst:.2e}"


def check_contour_independence():
    V, U = Gamma.with_scale(0.5), Gamma.with_scale(2.5)
    worst = 0.0
    for inst in (QueueInstance.from_gap(V, U, 0.1), ThinnedQueueInstance(V, U, 10, 1.0),
                 ThinnedQueueInstance(V, U, 100, 1.0, "nd_gaussian")):
        a = exact_scaled_moments(inst).values
        b = exact_scaled_moments(inst, x0_factor=0.5).values
        worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(a)))))
    return worst <= 1e-8, f"max relative change on halving the abscissa = {worst:.2e}"


def check_mm1():
    exp1 = Gamma(1.0, 1.0)
    worst = 0.0
    for rho in (0.5, 0.9):
        q = QueueInstance(exp1, exp1, rho)
        m1 = exact_scaled_moments(q, 1).values[1] / q.gap
        worst = max(worst, abs(m1 - rho / (1 - rho)))
    return worst <= 1e-8, f"max |E[W] - rho/(1-rho)| = {worst:.2e}"


CHECKS = {
    "zeta_known_values": check_zeta,
    "gaussian_walk_dual_method": check_walk_dual,
    "contour_independence": check_contour_independence,
    "mm1_closed_form": check_mm1,
}


def run_selfcheck():
    """Run every check; exceptions count as failures.

    Returns
    -------
    list of (name, passed, detail, seconds)
    """
    out = []
    for name, fn in CHECKS.items():
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # noqa: BLE001 - report, never crash the summary
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail, time.perf_counter() - t0))
    return out
