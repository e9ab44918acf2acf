import json
from math import sqrt
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings
from scipy.stats import binom

from htqueue.distributions import (Bates, Deterministic, Gamma, InverseGaussian,
                                   LatticeM, TwoPoint)

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

DATA = Path(__file__).parent / "data"

G = Gamma.with_scale
CASES = {
    "ex1a": (G(0.5), G(2.5)),
    "ex1b": (G(2.5), G(0.5)),
    "ex1c": (G(1.5), G(1.5)),
    "ex2": (Bates(4, 1.0), G(2.5)),
    "ex3": (LatticeM(4, 1.0), G(2.5)),
    "ex4": (TwoPoint(0.5, 1.5), TwoPoint(0.75, 2.0)),
    "ex5": (G(0.8), InverseGaussian(1.25 * sqrt(1.5))),
    "ex7": (Deterministic(), Gamma(5.0, 0.2)),
}


def reference_tables():
    return json.loads((DATA / "reference_tables.json").read_text())["tables"]


def two_point_walk_cumulants(V: TwoPoint, U: TwoPoint, n: int, rho: float, K: int = 5,
                             jmax: int = 2000):
    """Cumulants of ``max_j S_j`` for ``S_j = sum_{jn} V - sum_{jn} U / rho``.

    Independent of any transform: uses ``c_l = sum_j E[(S_j^+)^l] / j`` with
    exact binomial laws of the atom counts.
    """
    c = np.zeros(K)
    for j in range(1, jmax + 1):
        N = j * n
        k = np.arange(N + 1)
        pu, pv = binom.pmf(k, N, 1 - U.p), binom.pmf(k, N, 1 - V.p)
        ku, kv = k[pu > 1e-22], k[pv > 1e-22]
        pu, pv = pu[pu > 1e-22], pv[pv > 1e-22]
        sv = V.a * N + (V.b - V.a) * kv
        su = (U.a * N + (U.b - U.a) * ku) / rho
        S = np.maximum(sv[None, :] - su[:, None], 0.0)
        P = pu[:, None] * pv[None, :]
        add = np.array([np.sum(P * S ** l) for l in range(1, K + 1)]) / j
        c += add
        if j > 5 and add[0] < 1e-18 * c[0]:
            return c
    raise RuntimeError("Spitzer series did not converge")


@pytest.fixture
def ex1a():
    return CASES["ex1a"]


def erlang_deterministic_walk_cumulants(shape: int, n: int, rho: float, K: int = 5,
                                        dps: int = 60, jmax: int = 500):
    """Cumulants of ``max_j S_j`` for ``S_j = jn - G_j / rho``, ``G_j ~ Gamma(shape jn, 1/shape)``.

    Deterministic unit service against Gamma interarrival times, summed over
    ``jn`` customers. Partial moments ``E[(a - G/rho)^l; G < rho a]`` come from
    regularised incomplete gamma functions in high precision.
    """
    import mpmath as mp
    with mp.workdps(dps):
        c = [mp.mpf(0)] * K
        for j in range(1, jmax + 1):
            k = mp.mpf(shape) * j * n
            th = mp.mpf(1) / shape
            a = mp.mpf(j * n)
            x = rho * a / th
            # E[G^i 1{G < rho a}] = th^i Gamma(k+i)/Gamma(k) P(k+i, x)
            EG = [th ** i * mp.rf(k, i) * mp.gammainc(k + i, 0, x, regularized=True)
                  for i in range(K + 1)]
            add = [sum(mp.binomial(l, i) * a ** (l - i) * (-1 / mp.mpf(rho)) ** i * EG[i]
                       for i in range(l + 1)) / j for l in range(1, K + 1)]
            c = [ci + ai for ci, ai in zip(c, add)]
            if j > 3 and abs(add[0]) < mp.mpf(10) ** -20 * abs(c[0]):
                return np.array([float(v) for v in c])
    raise RuntimeError("Spitzer series did not converge")


ACCEPTANCE = []  # (criterion, passed, detail), filled by test_acceptance


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit, ok, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {crit:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
