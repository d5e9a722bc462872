"""Acceptance criteria, one test per criterion.

Shared runs (the 100-agent experiment, the small sandwich instances and the
N=20 consistency runs) live in module fixtures so the monotonicity criterion
can inspect every SFW run produced here. A summary line per criterion is
printed at the end of the session.
"""

import time

import numpy as np
import pytest
from conftest import brute_priced_min

from sfwoc.battery import BatteryParams, coarse_bounds, generate
from sfwoc.core import compute_constants
from sfwoc.dp import best_response
from sfwoc.exact import (
    build_micp,
    count_trajectories,
    enumerate_micp_optimum,
    enumerate_optimum,
    enumerate_trajectories,
    m_to_trajectory,
    trajectory_to_m,
)
from sfwoc.experiment import ExperimentConfig, fw_csv, run_experiment, sfw_csv
from sfwoc.fw import fw_run
from sfwoc.model import is_feasible
from sfwoc.randgen import random_agent, random_instance, random_social
from sfwoc.sfw import SfwSchedule, sfw_run
from sfwoc.social import SocialCost, SocialCostBlock

SFW_RUNS: dict[str, list] = {}


def _criterion(number, title):
    return pytest.mark.criterion(number, title)


# --- shared runs -----------------------------------------------------------------


@pytest.fixture(scope="module")
def full_experiment():
    inst = generate(BatteryParams())
    tic = time.perf_counter()
    res = run_experiment(inst, ExperimentConfig(K=100, n=20, reps=50, seed=0, fw_K=500))
    SFW_RUNS["full"] = res.runs
    return inst, res, time.perf_counter() - tic


@pytest.fixture(scope="module")
def sandwich_cases():
    rng = np.random.default_rng(2024)
    cases = []
    tic = time.perf_counter()
    while len(cases) < 50:
        N = int(rng.integers(1, 5))
        inst = random_instance(rng, N, int(rng.integers(1, 4)), max_states=3, max_controls=3)
        if np.prod([count_trajectories(a) for a in inst.agents], dtype=float) > 1e5:
            continue
        J_star, _ = enumerate_optimum(inst)
        fw = fw_run(inst, 500)
        sfw = sfw_run(inst, SfwSchedule(K=30, n=10, seed=len(cases)))
        cases.append((inst, J_star, fw, compute_constants(inst), sfw))
    SFW_RUNS["sandwich"] = [c[-1] for c in cases]
    return cases, time.perf_counter() - tic


@pytest.fixture(scope="module")
def consistency_runs():
    inst = generate(BatteryParams(N=20, T=24, seed=11))
    tic = time.perf_counter()
    fw = fw_run(inst, 500)
    report = compute_constants(inst)
    runs = [sfw_run(inst, SfwSchedule(K=40, n=20, seed=s)) for s in range(200)]
    SFW_RUNS["consistency"] = runs
    return inst, fw, report, runs, time.perf_counter() - tic


# --- criteria ----------------------------------------------------------------------


@_criterion(1, "DP oracle equals brute force on 200 random agents")
def test_dp_oracle_exactness():
    rng = np.random.default_rng(1)
    tic = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        T = int(rng.integers(1, 5))
        agent = random_agent(rng, T, max_states=5, max_controls=4)
        mu = rng.uniform(-5, 5, T + 2)
        traj, value = best_response(agent, mu)
        assert is_feasible(agent, traj)
        worst = max(worst, abs(value - brute_priced_min(agent, mu)))
    elapsed = time.perf_counter() - tic
    print(f"max |dp - brute| = {worst:.3g}, {elapsed:.2f} s")
    assert worst <= 1e-9
    assert elapsed < 10


@_criterion(2, "relaxation sandwich on 50 small instances")
def test_relaxation_sandwich(sandwich_cases):
    cases, elapsed = sandwich_cases
    for inst, J_star, fw, report, _ in cases:
        assert fw.certified_lower_bound <= J_star
        assert J_star <= fw.final_value + report.gap_bound + 1e-6
    print(f"{len(cases)} instances, {elapsed:.1f} s")
    assert elapsed < 120


@_criterion(3, "indicator model has the same optimum as enumeration")
def test_micp_equivalence():
    rng = np.random.default_rng(3)
    tic = time.perf_counter()
    done = 0
    while done < 30:
        inst = random_instance(rng, int(rng.integers(1, 3)), int(rng.integers(0, 3)), max_states=3, max_controls=2)
        if np.prod([count_trajectories(a) for a in inst.agents]) > 400:
            continue
        J_star, x_star = enumerate_optimum(inst)
        model = build_micp(inst)
        J_bar, m_star = enumerate_micp_optimum(model)
        assert abs(J_bar - J_star) <= 1e-9
        assert abs(model.objective(trajectory_to_m(model, x_star)) - J_star) <= 1e-9
        for x in zip(*[enumerate_trajectories(a) for a in inst.agents]):
            m = trajectory_to_m(model, list(x))
            assert m_to_trajectory(model, m) == list(x)
        assert np.array_equal(trajectory_to_m(model, m_to_trajectory(model, m_star)), m_star)
        done += 1
    assert time.perf_counter() - tic < 120


@_criterion(4, "100-agent battery experiment: coarse bound 7.68, final mean and std of gamma below it")
def test_full_experiment(full_experiment):
    inst, res, elapsed = full_experiment
    bound = coarse_bounds(BatteryParams()).gap_bound
    assert bound == 7.68
    gammas = res.final_gammas
    assert len(gammas) == 50 and all(len(r.records) == 101 for r in res.runs)
    print(f"mean gamma = {gammas.mean():.4g}, std gamma = {gammas.std():.4g}, bound = {bound}, {elapsed:.0f} s")
    assert gammas.mean() < bound
    assert gammas.std() < bound
    assert res.aggregate[-1][1] < bound and res.aggregate[-1][2] < bound
    assert elapsed < 900


@_criterion(5, "SFW cost never increases")
def test_sfw_monotone(full_experiment, sandwich_cases, consistency_runs):
    cases, _ = sandwich_cases
    for inst, J_star, _, _, run in cases:
        assert run.values.min() >= J_star - 1e-9
    checked = 0
    for runs in SFW_RUNS.values():
        for run in runs:
            assert np.all(np.diff(run.values) <= 1e-12)
            checked += 1
    print(f"{checked} runs checked")
    assert checked >= 300


@_criterion(6, "mean gamma_K within 4 C1 / K on the N=20 fleet")
def test_rate_consistency(consistency_runs):
    inst, fw, report, runs, elapsed = consistency_runs
    reference = fw.certified_lower_bound  # never above the relaxed optimum, so gammas are not understated
    J = np.array([r.values for r in runs])
    for K in (5, 10, 20, 40):
        g = J[:, K] - reference
        limit = 4 * report.C1 / K + 3 * g.std(ddof=1) / np.sqrt(len(g))
        print(f"K={K}: mean gamma {g.mean():.4g} <= {limit:.4g}")
        assert g.mean() <= limit
    assert elapsed < 300


@_criterion(7, "gradient matches central differences on 1000 aggregates")
def test_gradient_finite_differences():
    rng = np.random.default_rng(7)
    tic = time.perf_counter()
    h = 1e-5
    worst = 0.0
    for _ in range(1000):
        T = int(rng.integers(0, 12))
        social = SocialCost(random_social(rng, T))
        y = rng.uniform(-5, 5, T + 2)
        mu = social.gradient(y)
        E = np.eye(T + 2) * h
        fd = (social.value(y + E) - social.value(y - E)) / (2 * h)
        worst = max(worst, float(np.abs(fd - mu).max()))
    print(f"max |fd - grad| = {worst:.3g}")
    assert worst <= 1e-6
    assert time.perf_counter() - tic < 5


@_criterion(8, "byte-identical CSV output under 1, 2 and 8 workers")
def test_determinism_across_workers():
    inst = generate(BatteryParams(N=100, T=24, seed=5))
    outputs = []
    for workers in (1, 1, 2, 8):
        res = run_experiment(inst, ExperimentConfig(K=12, n=10, reps=3, seed=4, fw_K=30, workers=workers))
        outputs.append({name: text for name, text in res.files.items() if "timing" not in name})
    assert all(o == outputs[0] for o in outputs[1:])
    fw_a = fw_csv(fw_run(inst, 30, workers=1))
    assert fw_a == fw_csv(fw_run(inst, 30, workers=8))
    sched = SfwSchedule(K=12, n=10, seed=4)
    assert sfw_csv(sfw_run(inst, sched, workers=2), 0.0) == sfw_csv(sfw_run(inst, sched, workers=8), 0.0)


@_criterion(9, "mean indicator-model size over 100 fleets is at least 192000")
def test_micp_size():
    sizes = []
    for seed in range(100):
        inst = generate(BatteryParams(seed=seed))
        # count of feasible (s, u) pairs per agent and step, straight from the charging rule
        size = 0
        for a in inst.agents:
            lo, hi = a.states[0], a.states[-1]
            size += (inst.T + 1) * sum(min(4, hi - s) + 1 for s in range(lo, hi + 1))
        sizes.append(size)
    for seed in (0, 1):
        assert build_micp(generate(BatteryParams(seed=seed))).n_variables == sizes[seed]
    print(f"mean d(m) = {np.mean(sizes):.0f} (min {min(sizes)}, max {max(sizes)})")
    assert np.mean(sizes) >= 192000


def test_identity_block_price_is_one():
    social = SocialCost([SocialCostBlock.quadratic(1.0, 2.0), SocialCostBlock.zero(), SocialCostBlock.identity()])
    assert social.gradient(np.array([0.3, -1.0, 42.0]))[-1] == 1.0
