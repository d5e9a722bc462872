import dataclasses

import numpy as np
import pytest

from sfwoc.core import BoundReport, assemble_constants, compute_constants
from sfwoc.errors import InfeasibleAgentError
from sfwoc.exact import count_trajectories, enumerate_trajectories
from sfwoc.model import AgentSpec, OcInstance, trajectory_contributions
from sfwoc.randgen import random_instance
from sfwoc.social import SocialCostBlock


def _menu_agent(values):
    return AgentSpec.build([0], [0], list(values), 0, lambda t, s: list(values), None, lambda t, s, u: u, lambda t, s, u: 0.0)


def test_single_agent_two_point_range():
    inst = OcInstance(1, 0, [_menu_agent([0, 4])], [SocialCostBlock.quadratic(1.0), SocialCostBlock.identity()])
    r = compute_constants(inst)
    assert r.diameters.tolist() == [[4.0, 0.0]]
    assert r.grad_lipschitz.tolist() == [2.0, 0.0]
    assert r.C1 == 32.0
    assert r.gap_bound == 16.0


def test_constant_contributions_give_zero_gap():
    agents = [_menu_agent([3]) for _ in range(4)]
    r = compute_constants(OcInstance(4, 0, agents, [SocialCostBlock.quadratic(2.0, 1.0), SocialCostBlock.identity()]))
    assert not r.diameters.any()
    assert r.C1 == 0.0 and r.gap_bound == 0.0


def test_report_recomputes_bit_for_bit():
    rng = np.random.default_rng(0)
    for _ in range(30):
        r = compute_constants(random_instance(rng, int(rng.integers(1, 6)), int(rng.integers(0, 4))))
        N = r.diameters.shape[0]
        C0 = float(np.sum(r.lipschitz * r.diameters.max(axis=0)))
        C1 = float(np.sum(r.grad_lipschitz * np.sum(r.diameters**2, axis=0)) / N)
        assert (C0, C1, C1 / (2 * N)) == (r.C0, r.C1, r.gap_bound)
        assert assemble_constants(r.diameters, r.lipschitz, r.grad_lipschitz) == (r.C0, r.C1, r.gap_bound)


def test_diameters_match_enumeration():
    rng = np.random.default_rng(1)
    done = 0
    while done < 40:
        inst = random_instance(rng, 3, int(rng.integers(0, 4)), max_states=4, max_controls=3)
        if max(count_trajectories(a) for a in inst.agents) > 200:
            continue
        r = compute_constants(inst)
        for i, a in enumerate(inst.agents):
            G = trajectory_contributions(a, enumerate_trajectories(a))
            assert np.allclose(r.diameters[i], G.max(0) - G.min(0), atol=1e-12, rtol=0)
        done += 1


def test_lipschitz_uses_hull_interval():
    inst = OcInstance(2, 0, [_menu_agent([0, 4]), _menu_agent([1, 2])], [SocialCostBlock.quadratic(1.5, 1.0), SocialCostBlock.identity()])
    r = compute_constants(inst)
    assert r.y_lo[0] == 0.5 and r.y_hi[0] == 3.0
    assert r.lipschitz[0] == 2 * 1.5 * 2.0
    assert r.lipschitz[1] == 1.0


def test_missing_initial_state_raises():
    a = _menu_agent([0, 1])
    inst = OcInstance(1, 0, [dataclasses.replace(a, initial_states=())], [SocialCostBlock.zero(), SocialCostBlock.identity()])
    with pytest.raises(InfeasibleAgentError):
        compute_constants(inst)


def test_from_parts_matches_formula():
    d = np.array([[4.0, 1.0], [2.0, 3.0]])
    r = BoundReport.from_parts(d, [1.0, 2.0], [2.0, 0.5])
    assert r.C0 == 1.0 * 4 + 2.0 * 3
    assert r.C1 == (2.0 * 20 + 0.5 * 10) / 2
    assert r.gap_bound == r.C1 / 4
