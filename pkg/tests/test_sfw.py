import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sfwoc.battery import BatteryParams, battery_agent, generate
from sfwoc.core import evaluate_J
from sfwoc.dp import best_responses
from sfwoc.exact import enumerate_optimum
from sfwoc.model import AgentSpec, OcInstance, is_feasible
from sfwoc.randgen import random_instance
from sfwoc.rng import bernoulli_matrix, uniforms
from sfwoc.sfw import SfwSchedule, initial_state, sfw_iterate, sfw_run, theorem_bounds
from sfwoc.social import SocialCostBlock


@pytest.fixture(scope="module")
def fleet():
    return generate(BatteryParams(N=30, T=8, seed=2))


def test_zero_step_keeps_the_iterate(fleet):
    sched = SfwSchedule(K=5, n=7, seed=1, omega=0.0)
    res = sfw_run(fleet, sched)
    assert len(set(res.values)) == 1
    assert all(r.swaps == 0 for r in res.records[:-1])


def test_unit_step_takes_cheaper_of_best_response_and_incumbent(fleet):
    sched = SfwSchedule(K=3, n=4, seed=1, omega=1.0)
    state = initial_state(fleet)
    for k in range(3):
        br_state, info = sfw_iterate(fleet, state, k, sched)
        br = best_responses(fleet, fleet.social_cost.gradient(state.y))
        J_br = evaluate_J(fleet, br.trajectories())
        assert info.swaps == 4 * fleet.N
        assert br_state.value == pytest.approx(min(J_br, state.value), abs=1e-12)
        state = br_state


def test_single_agent_coin_frequency():
    omega = 0.3
    draws = np.array([bernoulli_matrix(123, k, 1, 1, omega)[0, 0] for k in range(10000)])
    assert abs(draws.mean() - omega) <= 0.02


def test_marginals_within_three_standard_errors():
    for k, omega in ((0, 1.0), (3, 0.4), (10, 2 / 12), (40, 2 / 42)):
        lam = bernoulli_matrix(7, k, 50, 200, omega)
        se = math.sqrt(omega * (1 - omega) / lam.size)
        assert abs(lam.mean() - omega) <= 3 * se + 1e-15


def test_draws_are_addressed_not_consumed():
    full = bernoulli_matrix(5, 2, 6, 40, 0.5)
    assert np.array_equal(full[3], uniforms(5, 2, 4, 40) < 0.5)
    assert np.array_equal(uniforms(5, 2, 4, 40)[:10], uniforms(5, 2, 4, 10))


def test_monotone_and_feasible(fleet):
    res = sfw_run(fleet, SfwSchedule(K=30, n=10, seed=3))
    assert np.all(np.diff(res.values) <= 1e-12)
    assert all(is_feasible(a, tr) for a, tr in zip(fleet.agents, res.best_x))
    assert res.best_value == evaluate_J(fleet, res.best_x)


def test_incremental_scores_match_full_evaluation(fleet):
    sched = SfwSchedule(K=10, n=6, seed=4)
    state = initial_state(fleet)
    for k in range(10):
        state, _ = sfw_iterate(fleet, state, k, sched)
        assert abs(state.value - evaluate_J(fleet, state.trajectories())) <= 1e-9


def test_reproducible_across_workers(fleet):
    sched = SfwSchedule(K=15, n=5, seed=9)
    a = sfw_run(fleet, sched)
    for w in (1, 2, 8):
        b = sfw_run(fleet, sched, workers=w)
        assert a.values.tolist() == b.values.tolist()
        assert a.best_x == b.best_x


def test_different_seeds_differ(fleet):
    a = sfw_run(fleet, SfwSchedule(K=10, n=3, seed=0))
    b = sfw_run(fleet, SfwSchedule(K=10, n=3, seed=1))
    assert [r.swaps for r in a.records] != [r.swaps for r in b.records]


def test_singleton_decision_sets():
    agents = [battery_agent(3, 3, 2, 0.7, 4), battery_agent(5, 5, 1, 0.2, 4)]
    social = [SocialCostBlock.quadratic(1.0, 1.5)] * 4 + [SocialCostBlock.zero(), SocialCostBlock.identity()]
    inst = OcInstance(2, 4, agents, social)
    res = sfw_run(inst, SfwSchedule(K=8))
    assert len(set(res.values)) == 1
    assert res.best_x == initial_state(inst).trajectories()


def test_never_below_exact_optimum():
    rng = np.random.default_rng(8)
    for _ in range(15):
        inst = random_instance(rng, 3, 2)
        J_star, _ = enumerate_optimum(inst)
        res = sfw_run(inst, SfwSchedule(K=20, n=5, seed=int(rng.integers(1000))))
        assert res.values.min() >= J_star - 1e-9


def test_schedule_validation():
    with pytest.raises(ValueError):
        SfwSchedule(K=0)
    with pytest.raises(ValueError):
        SfwSchedule(K=3, n=0)
    with pytest.raises(ValueError):
        SfwSchedule(K=3, omega=1.5)
    with pytest.raises(ValueError):
        SfwSchedule(K=3, n=[2, 2])
    assert SfwSchedule(K=3, n=[1, 2, 3]).n_at(2) == 3


def _v_loop(C0, K, n):
    total = 0.0
    for k in range(1, K):
        total += k * (k + 1) * (k + 1) / n
    return 2 * C0 * C0 / (K * K * (K + 1) * (K + 1)) * total


def _m_loop(C0, K, n):
    best = 0.0
    for k in range(1, K):
        best = max(best, (k + 1) * (k + 2) / n)
    return C0 / (K * (K + 1)) * best


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 1e4), st.integers(1, 60), st.integers(1, 100))
def test_bound_constants_match_direct_loops(C0, K, n):
    tb = theorem_bounds(C0, 1.0, 60, SfwSchedule(K=K, n=n), 1.0)
    assert tb.v_K == pytest.approx(_v_loop(C0, K, n), rel=1e-12, abs=0)
    assert tb.m_K == pytest.approx(_m_loop(C0, K, n), rel=1e-12, abs=0)


def test_bound_examples():
    big = theorem_bounds(100.0, 5.0, 50, SfwSchedule(K=20, n=10**9), 0.5)
    assert big.v_K < 1e-3 and big.m_K < 1e-6
    assert big.probability_lower_bound > 1 - 1e-12
    a = theorem_bounds(100.0, 5.0, 50, SfwSchedule(K=20), 0.5)
    b = theorem_bounds(100.0, 5.0, 50, SfwSchedule(K=40), 0.5)
    assert b.expectation_bound == a.expectation_bound / 2
    p = a.probability_lower_bound
    assert p == 1 - math.exp(-0.25 * 50 / (2 * (a.v_K + 0.5 * a.m_K / 3)))
    assert a.probability_at(0.5) == p


def test_bound_outside_certified_range_is_flagged():
    with pytest.warns(UserWarning):
        tb = theorem_bounds(1.0, 1.0, 10, SfwSchedule(K=21), 1.0)
    assert not tb.certified
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert theorem_bounds(1.0, 1.0, 10, SfwSchedule(K=20), 1.0).certified
    with pytest.raises(ValueError):
        theorem_bounds(1.0, 1.0, 10, SfwSchedule(K=5), 0.0)


def test_gamma_reporting(fleet):
    res = sfw_run(fleet, SfwSchedule(K=4), reference=1.0)
    assert res.gap_vs_relaxed == res.best_value - 1.0
    assert np.array_equal(res.gammas(), res.values - 1.0)
    assert res.records[-1].omega is None and res.records[0].omega == 1.0


def test_agent_labels_do_not_matter_for_values():
    base = battery_agent(0, 3, 2, 0.5, 3)
    relabeled = AgentSpec(tuple(f"s{v}" for v in base.states), ("s0",), base.controls, base.feasible, base.transition, base.contribution, base.individual_cost)
    social = [SocialCostBlock.quadratic(1.0, 1.0)] * 3 + [SocialCostBlock.zero(), SocialCostBlock.identity()]
    a = sfw_run(OcInstance(1, 3, [base], social), SfwSchedule(K=5, seed=2))
    b = sfw_run(OcInstance(1, 3, [relabeled], social), SfwSchedule(K=5, seed=2))
    assert a.values.tolist() == b.values.tolist()
