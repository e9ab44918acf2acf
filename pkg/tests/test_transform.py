from math import sqrt

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from htqueue.distributions import Gamma, InverseGaussian, LatticeM, TwoPoint
from htqueue.errors import ConfigError, NewtonDivergence, UnstableLoad
from htqueue.transform import (NewtonConfig, QueueInstance, ThinnedQueueInstance,
                               assumption_check, find_saddle_point, gamma_n,
                               gaussian_regime_params, h_and_derivs, log_psi, psi,
                               saddle_seed, sigma_alpha_sq)

from conftest import CASES

G = Gamma.with_scale


def gamma_gamma_closed_form(tu, tv, rho):
    zsp = -(1 - rho) / (tv + tu)
    h2 = (tu + tv) ** 3 / (tu + rho * tv) ** 2
    d2 = -(tu ** 2 - tv ** 2) / (3 * (tu + rho * tv))
    return zsp, h2, d2


def gamma_ig_closed_form(tv, lam, rho):
    g = rho / (lam * tv)
    return (sqrt((g + 1) ** 2 - (1 - rho ** 2)) - g - 1) / tv


@pytest.mark.parametrize("rho", [0.8, 0.9, 0.99])
@pytest.mark.parametrize("tu, tv", [(2.5, 0.5), (0.5, 2.5), (1.5, 1.5), (0.3, 1.7)])
def test_saddle_gamma_gamma(rho, tu, tv):
    q = QueueInstance(G(tv), G(tu), rho)
    zsp, h2, d2 = gamma_gamma_closed_form(tu, tv, rho)
    z, _ = find_saddle_point(q)
    assert abs(z - zsp) <= 1e-12 * max(1, abs(zsp))
    _, h1, hh2, hh3 = h_and_derivs(q, z)
    assert abs(h1) < 1e-13
    assert hh2 == pytest.approx(h2, rel=1e-12)
    assert -hh3 / (6 * hh2) == pytest.approx(d2, rel=1e-10, abs=1e-13)


@pytest.mark.parametrize("rho", [0.8, 0.9, 0.99])
@pytest.mark.parametrize("tv, lam", [(0.8, 1.25 * sqrt(1.5)), (0.5, 3.0), (2.0, 0.7)])
def test_saddle_gamma_inverse_gaussian(rho, tv, lam):
    q = QueueInstance(G(tv), InverseGaussian(lam), rho)
    z, _ = find_saddle_point(q)
    assert abs(z - gamma_ig_closed_form(tv, lam, rho)) <= 1e-12


@given(st.floats(-0.3, 0.3), st.floats(-5, 5))
def test_h_derivatives_match_finite_differences(x, y):
    q = QueueInstance(CASES["ex2"][0], CASES["ex5"][1], 0.9)
    z = complex(x, y)
    h, h1, h2, h3 = h_and_derivs(q, np.array([z]))
    eps = 1e-4
    for lo, ref in ((0, h1), (1, h2), (2, h3)):
        fp = h_and_derivs(q, np.array([z + eps]))[lo]
        fm = h_and_derivs(q, np.array([z - eps]))[lo]
        if lo == 0:  # the log branch may jump, so difference exp(h - h(z)) instead
            fp, fm = np.exp(fp - h), np.exp(fm - h)
        d = (fp - fm) / (2 * eps)
        assert abs(d[0] - ref[0]) <= 1e-6 * max(1, abs(ref[0]))


@given(st.floats(-0.4, 0.3), st.floats(-30, 30))
def test_log_psi_consistent_and_conjugate_symmetric(x, y):
    q = QueueInstance(*CASES["ex1a"], 0.9)
    z = np.array([complex(x, y)])
    assert abs(np.exp(log_psi(q, z)) - psi(q, z))[0] <= 1e-13 * max(1, abs(psi(q, z)[0]))
    assert abs(psi(q, z.conj())[0] - np.conj(psi(q, z)[0])) <= 1e-14 * max(1, abs(psi(q, z)[0]))


def test_h3_full_formula_away_from_saddle():
    # at a non-stationary point the third derivative must still be exact
    q = QueueInstance(*CASES["ex4"], 0.9)
    x = 0.05
    eps = 1e-3
    h2p = h_and_derivs(q, x + eps)[2]
    h2m = h_and_derivs(q, x - eps)[2]
    assert h_and_derivs(q, x)[3] == pytest.approx((h2p - h2m) / (2 * eps), rel=1e-5)


@pytest.mark.parametrize("name", sorted(CASES))
def test_gaussian_regime_params_relations(name):
    tq = ThinnedQueueInstance(*CASES[name], 100, 1.0, "nd_gaussian")
    sp = gaussian_regime_params(tq)
    assert sp.zeta_sp < 0
    assert sp.sigma_n == pytest.approx(sqrt(sp.h2))
    assert sp.beta_n == pytest.approx(-sp.zeta_sp * sp.sigma_n * 10)
    assert sp.B_n == pytest.approx(sp.beta_n / (1 + sp.beta_n * sp.phi_n))
    # to leading order beta_n = beta / (rho sigma)
    q = tq.base
    assert sp.beta_n == pytest.approx(1.0 / (q.rho * sqrt(q.sigma2)), rel=0.1)
    assert saddle_seed(tq.base) == pytest.approx(sp.zeta_sp, rel=0.2)


def test_symmetric_case_has_zero_skew():
    sp = gaussian_regime_params(ThinnedQueueInstance(G(1.5), G(1.5), 100, 1.0, "nd_gaussian"))
    assert abs(sp.d2) < 1e-14 and sp.B_n == sp.beta_n


def test_kingman_constants_coincide():
    # at beta = 1 the two Kingman constants are the same number
    V, U = CASES["ex1a"]
    for n in (10, 100, 1000, 10000, 100000):
        a = sigma_alpha_sq(QueueInstance.from_gap(V, U, 1 / n)) / 2
        b = gamma_n(ThinnedQueueInstance(V, U, n, 1.0))
        assert b == pytest.approx(a, rel=1e-15)


def test_assumption_check():
    tq = ThinnedQueueInstance(*CASES["ex1a"], 100, 1.0, "nd_gaussian")
    sp = gaussian_regime_params(tq, check_assumption=True)
    assert sp.assumption_ok and sp.margin > 0
    # lattice laws return to the maximum modulus periodically
    q = QueueInstance(LatticeM(4, 1.0), LatticeM(4, 1.0), 1.0 - 1e-9)
    ok, margin = assumption_check(q, -1e-3)
    assert not ok


def test_construction_errors():
    V, U = CASES["ex1a"]
    with pytest.raises(UnstableLoad):
        QueueInstance(V, U, 1.0)
    with pytest.raises(ConfigError):
        QueueInstance(V, U, -0.2)
    with pytest.raises(ConfigError):
        ThinnedQueueInstance(V, U, 0, 1.0)
    with pytest.raises(ConfigError):
        ThinnedQueueInstance(V, U, 4, 2.0, "nd_gaussian")
    with pytest.raises(ConfigError):
        ThinnedQueueInstance(V, U, 4, 1.0, "other")


def test_newton_divergence_reported():
    q = QueueInstance(TwoPoint(0.5, 1.5), TwoPoint(0.75, 2.0), 0.9)
    with pytest.raises(NewtonDivergence):
        find_saddle_point(q, NewtonConfig(max_iter=1, tol=1e-300))
