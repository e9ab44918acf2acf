import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from htqueue.distributions import Gamma
from htqueue.errors import UnstableLoad
from htqueue.moments import exact_scaled_moments, prob_wait_zero
from htqueue.simulation import (SimConfig, lindley_path, sample_variate,
                                simulate_waiting)
from htqueue.transform import QueueInstance, ThinnedQueueInstance

from conftest import CASES

EXP = Gamma(1.0, 1.0)


def _lindley_loop(x, w0):
    out, w = [], w0
    for v in x:
        w = max(w + v, 0.0)
        out.append(w)
    return np.array(out)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=60), st.floats(0, 10))
def test_vectorised_lindley_matches_loop(x, w0):
    x = np.array(x)
    assert lindley_path(x, w0) == pytest.approx(_lindley_loop(x, w0), abs=1e-9)


def test_deterministic_given_seed():
    cfg = SimConfig(QueueInstance(EXP, EXP, 0.5), customers=20_000, replications=3, seed=7)
    a, b = simulate_waiting(cfg), simulate_waiting(cfg)
    assert np.array_equal(a.per_replication, b.per_replication)
    c = simulate_waiting(SimConfig(cfg.instance, 20_000, 3, seed=8))
    assert not np.array_equal(a.per_replication, c.per_replication)
    # the thread pool must not change the stream assignment
    d = simulate_waiting(cfg, threads=3)
    assert np.array_equal(a.per_replication, d.per_replication)


def test_mm1_mean_in_interval():
    # alpha W has mean rho, P(W=0) = 1 - rho
    cfg = SimConfig(QueueInstance(EXP, EXP, 0.5), customers=200_000, replications=10, seed=1)
    r = simulate_waiting(cfg)
    assert r.contains(1, 0.5)
    assert r.p_zero_ci[0] <= 0.5 <= r.p_zero_ci[1]


def test_interval_coverage():
    # 99% intervals should cover the truth in nearly all of 20 independent runs
    hits = 0
    for seed in range(20):
        cfg = SimConfig(QueueInstance(EXP, EXP, 0.5), customers=20_000, replications=10,
                        seed=seed, K=1)
        hits += simulate_waiting(cfg).contains(1, 0.5)
    assert hits >= 17


def test_unstable_load_rejected():
    with pytest.raises(UnstableLoad):
        SimConfig.for_load(EXP, EXP, 1.0)
    with pytest.raises(ValueError):
        SimConfig(QueueInstance(EXP, EXP, 0.5), replications=1)


def test_thinned_queue_atom():
    tq = ThinnedQueueInstance(*CASES["ex1a"], 10, 1.0)
    r = simulate_waiting(SimConfig(tq, customers=200_000, replications=10, seed=3, K=2))
    p0 = prob_wait_zero(tq)
    assert r.p_zero_ci[0] <= p0 <= r.p_zero_ci[1]
    m = exact_scaled_moments(tq, 2).values
    assert r.contains(1, m[1])


def test_gaussian_regime_scaling():
    tq = ThinnedQueueInstance(*CASES["ex5"], 10, 1.0, "nd_gaussian")
    r = simulate_waiting(SimConfig(tq, customers=200_000, replications=10, seed=4, K=1))
    assert r.contains(1, exact_scaled_moments(tq, 1).values[1])


def test_sample_variate():
    rng = np.random.default_rng(0)
    x = [sample_variate(EXP, rng) for _ in range(2000)]
    assert np.mean(x) == pytest.approx(1.0, abs=0.1)


def test_burn_in_grows_in_heavy_traffic():
    light = SimConfig(QueueInstance(EXP, EXP, 0.5)).burn_in
    heavy = SimConfig(QueueInstance(EXP, EXP, 0.99)).burn_in
    assert heavy == pytest.approx(100 * light, rel=1e-6)
    assert SimConfig(QueueInstance(EXP, EXP, 0.5), warmup=5).burn_in == 5
