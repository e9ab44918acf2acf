from dataclasses import replace
from math import factorial

import numpy as np
import pytest

from htqueue.approximations import (classical_kingman, exponential_moments, nd_gaussian_refined,
                                    nd_gaussian_standard, nd_kingman, refined_from_walk,
                                    regime_params)
from htqueue.errors import RefinementDegenerate
from htqueue.gaussian_walk import mgw_moments
from htqueue.transform import (QueueInstance, ThinnedQueueInstance, gamma_n,
                               gaussian_regime_params, sigma_alpha_sq)

from conftest import CASES


@pytest.mark.parametrize("name", ["ex1a", "ex1b", "ex1c", "ex5"])
@pytest.mark.parametrize("alpha", [0.1, 0.01, 0.001])
def test_classical_closed_form(name, alpha):
    q = QueueInstance.from_gap(*CASES[name], alpha)
    s2 = sigma_alpha_sq(q)
    ref = [factorial(k) * (s2 / 2) ** k for k in range(6)]
    assert classical_kingman(q).values == pytest.approx(ref, rel=1e-15)


def test_sigma_alpha_closed_form():
    # Gamma with scale t has variance t
    q = QueueInstance.from_gap(*CASES["ex1a"], 0.1)
    assert sigma_alpha_sq(q) == pytest.approx((0.5 + 2.5 / 0.81) * 0.9, rel=1e-14)
    tq = ThinnedQueueInstance(*CASES["ex1a"], 10, 2.0)
    rho = tq.rho
    assert gamma_n(tq) == pytest.approx((0.5 + 2.5 / rho ** 2) * rho / (20 * (1 - rho)), rel=1e-12)


@pytest.mark.parametrize("name", ["ex1a", "ex1b", "ex1c"])
def test_kingman_bound_dominates_exact_mean(name):
    from htqueue.moments import exact_scaled_moments
    for alpha in (0.1, 0.01, 0.001):
        q = QueueInstance.from_gap(*CASES[name], alpha)
        assert exact_scaled_moments(q, 1).values[1] <= classical_kingman(q, 1).values[1]


def test_nd_kingman_is_exponential():
    tq = ThinnedQueueInstance(*CASES["ex2"], 100, 1.0)
    g = gamma_n(tq)
    assert nd_kingman(tq).values == pytest.approx([factorial(k) * g ** k for k in range(6)])
    assert exponential_moments(2.0, 3).values == pytest.approx([1, 2, 8, 48])


def test_symmetric_case_refinement_vanishes():
    tq = ThinnedQueueInstance(*CASES["ex1c"], 100, 1.0, "nd_gaussian")
    a = nd_gaussian_standard(tq).values
    b = nd_gaussian_refined(tq).values
    assert np.max(np.abs(a - b) / a) <= 1e-13


def test_refined_with_zero_phi_is_standard():
    walk = mgw_moments(0.8, 5)
    assert refined_from_walk(walk, 0.8, 0.0) == pytest.approx(walk.values, rel=1e-15)


def test_refined_formula_by_hand():
    walk = mgw_moments(0.7, 3)
    beta, phi = 0.75, 0.05
    c = 1 + beta * phi
    out = refined_from_walk(walk, beta, phi)
    assert out[1] == pytest.approx(walk[1] / c ** 2)
    assert out[2] == pytest.approx(walk[2] / c ** 4 + 2 * walk[1] * phi / c ** 3)
    assert out[3] == pytest.approx(walk[3] / c ** 6 + 6 * walk[2] * phi / c ** 5)


def test_refined_degenerate_drift():
    tq = ThinnedQueueInstance(*CASES["ex1a"], 10, 1.0, "nd_gaussian")
    sp = gaussian_regime_params(tq)
    bad = replace(sp, phi_n=-2.0 / sp.beta_n)
    with pytest.raises(RefinementDegenerate):
        nd_gaussian_refined(tq, saddle=bad)


def test_gaussian_approximations_converge():
    # the standard error shrinks like n^-1/2, the refined one like n^-1
    from htqueue.moments import exact_scaled_moments
    V, U = CASES["ex1a"]
    errs = {"std": [], "ref": []}
    for n in (100, 1000):
        tq = ThinnedQueueInstance(V, U, n, 1.0, "nd_gaussian")
        ex = exact_scaled_moments(tq, 3).values[2]
        errs["std"].append(abs(nd_gaussian_standard(tq, 3).values[2] - ex))
        errs["ref"].append(abs(nd_gaussian_refined(tq, 3).values[2] - ex))
    assert errs["std"][1] < errs["std"][0] / 2
    assert errs["ref"][1] < errs["ref"][0] / 5
    assert errs["ref"][1] < errs["std"][1]


def test_regime_params_dispatch():
    V, U = CASES["ex1a"]
    assert regime_params(QueueInstance.from_gap(V, U, 0.1)).regime == "classical"
    assert regime_params(ThinnedQueueInstance(V, U, 10, 1.0)).gamma_n > 0
    rp = regime_params(ThinnedQueueInstance(V, U, 10, 1.0, "nd_gaussian"))
    assert rp.saddle.beta_n > 0
