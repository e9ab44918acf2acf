import numpy as np
import pytest

from htqueue.distributions import Gamma
from htqueue.errors import InversionUnstable, LogBranchFailure
from htqueue.lst_inversion import (EulerConfig, LSTHandle, atom_at_zero, exponential_lst,
                                   invert_cdf, make_approx_lst, make_exact_lst,
                                   refined_walk_lst, walk_max_lst)
from htqueue.moments import exact_scaled_moments
from htqueue.transform import QueueInstance, ThinnedQueueInstance, gaussian_regime_params

from conftest import CASES

EXP = Gamma(1.0, 1.0)
T = np.linspace(0.05, 6.0, 40)


def test_exponential_closed_form():
    for theta in (0.5, 1.0, 3.0):
        F = invert_cdf(exponential_lst(theta), T * theta).values
        assert np.max(np.abs(F - (1 - np.exp(-T)))) <= 1e-6


def test_mixture_closed_form():
    # atom 0.2 at zero, then 0.3 Exp(mean 1) + 0.5 Exp(mean 4)
    h = LSTHandle(lambda s: 0.2 + 0.3 / (1 + s) + 0.5 / (1 + 4 * s))
    ref = 1 - 0.3 * np.exp(-T) - 0.5 * np.exp(-T / 4)
    assert np.max(np.abs(invert_cdf(h, T).values - ref)) <= 1e-6
    assert atom_at_zero(h, 2.3) == pytest.approx(0.2, abs=1e-5)


def test_mm1_exact_pipeline():
    # alpha W is 0 w.p. 1-rho and Exp(1) otherwise
    rho = 0.8
    F = invert_cdf(make_exact_lst(QueueInstance(EXP, EXP, rho)), T).values
    assert np.max(np.abs(F - (1 - rho * np.exp(-T)))) <= 1e-6


def test_transform_is_a_transform():
    h = make_exact_lst(QueueInstance.from_gap(*CASES["ex1a"], 0.1))
    assert h(np.array([0.0]))[0] == 1.0
    s = np.array([1e-3, 0.5, 2.0 + 3.0j, 10.0 - 40.0j, 100.0])
    v = h(s)
    assert np.all(np.abs(v) <= 1 + 1e-12)
    assert np.all(np.abs(h(np.conj(s)) - np.conj(v)) <= 1e-12)


@pytest.mark.parametrize("inst, p0", [
    (QueueInstance.from_gap(*CASES["ex1a"], 0.1), 0.056),
    (ThinnedQueueInstance(*CASES["ex1a"], 10, 1.0), 0.216),
])
def test_atom_at_zero(inst, p0):
    m1 = exact_scaled_moments(inst, 1).values[1]
    assert atom_at_zero(make_exact_lst(inst), m1) == pytest.approx(p0, abs=0.003)


@pytest.mark.parametrize("inst", [
    QueueInstance.from_gap(*CASES["ex1a"], 0.1),
    QueueInstance.from_gap(*CASES["ex2"], 0.1),
    ThinnedQueueInstance(*CASES["ex1a"], 10, 1.0),
    ThinnedQueueInstance(*CASES["ex5"], 100, 1.0, "nd_gaussian"),
], ids=["classical", "bates", "kingman", "gaussian"])
def test_cdf_shape_and_mean(inst):
    mv = exact_scaled_moments(inst, 2)
    m1 = mv.values[1]
    t = np.linspace(0.0, 25.0, 1001)[1:] * m1
    res = invert_cdf(make_exact_lst(inst), t)
    assert np.all(res.raw >= -1e-4) and np.all(res.raw <= 1 + 1e-4)
    assert np.all(np.diff(res.values) >= -1e-5)
    assert res.values[np.searchsorted(t, 20 * m1)] > 0.999
    # E[X] = int (1 - F); the lost mass beyond 25 m1 is negligible
    tt = np.concatenate([[0.0], t])
    F0 = atom_at_zero(make_exact_lst(inst), m1)
    FF = np.concatenate([[F0], res.values])
    mean = np.trapezoid(1 - FF, tt)
    assert mean == pytest.approx(m1, rel=0.01)


def test_step_cdf_flagged():
    # two-point laws at rho = 9/10 put alpha W on the grid alpha/18 Z, so the CDF
    # jumps at alpha/18 and the Euler sums cannot settle right next to it
    q = QueueInstance(*CASES["ex4"], 0.9)
    with pytest.raises(InversionUnstable):
        invert_cdf(make_exact_lst(q), [0.1 / 18 * 0.93])


def test_exact_and_limit_cdfs_close_in_heavy_traffic():
    q = QueueInstance.from_gap(*CASES["ex1a"], 0.01)
    t = np.linspace(0.05, 8, 40) * exact_scaled_moments(q, 1).values[1]
    a = invert_cdf(make_exact_lst(q), t).values
    b = invert_cdf(make_approx_lst(q), t).values
    assert np.max(np.abs(a - b)) < 0.01


def test_walk_max_atom():
    # P(M_beta = 0) = exp(-c_0) with c_0 = sum_j P(S_j > 0)/j
    from math import erfc, exp, sqrt
    beta = 1.0
    c0 = sum(0.5 * erfc(beta * sqrt(j) / sqrt(2)) / j for j in range(1, 400))
    assert atom_at_zero(walk_max_lst(beta), 0.5) == pytest.approx(exp(-c0), abs=1e-5)


def test_refined_positive_phi_is_proper():
    tq = ThinnedQueueInstance(*CASES["ex1b"], 100, 1.0, "nd_gaussian")
    sp = gaussian_regime_params(tq)
    assert sp.phi_n > 0
    h = make_approx_lst(tq, "refined")
    t = np.linspace(0.05, 10, 30)
    res = invert_cdf(h, t)
    assert np.all(np.diff(res.values) >= -1e-6)
    exact = invert_cdf(make_exact_lst(tq), t).values
    std = invert_cdf(make_approx_lst(tq), t).values
    # the refinement moves the standard approximation toward the exact CDF
    assert np.max(np.abs(res.values - exact)) < np.max(np.abs(std - exact))


def test_refined_negative_phi_is_formal():
    h = refined_walk_lst(0.6, -0.12)
    with pytest.raises(LogBranchFailure):
        invert_cdf(h, [1.0])


def test_instability_detected():
    rng = np.random.default_rng(0)
    noisy = LSTHandle(lambda s: 1 / (1 + s) + 1e-3 * rng.standard_normal(np.shape(s)))
    with pytest.raises(InversionUnstable):
        invert_cdf(noisy, [1.0])
    with pytest.raises(ValueError):
        invert_cdf(exponential_lst(1.0), [0.0])


def test_threads_give_same_answer():
    h = make_exact_lst(QueueInstance.from_gap(*CASES["ex1a"], 0.1))
    a = invert_cdf(h, T).values
    b = invert_cdf(make_exact_lst(QueueInstance.from_gap(*CASES["ex1a"], 0.1)), T,
                   threads=4).values
    assert np.array_equal(a, b)


def test_euler_parameters_matter_little():
    h = exponential_lst(1.0)
    a = invert_cdf(h, T).values
    b = invert_cdf(h, T, EulerConfig(A=20.0, m=13, n=40)).values
    assert np.max(np.abs(a - b)) < 1e-7
