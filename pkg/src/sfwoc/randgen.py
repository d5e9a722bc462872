"""Small random instances for cross-checking solvers against enumeration."""

from __future__ import annotations

import numpy as np

from .model import AgentSpec, OcInstance
from .social import SocialCostBlock


def random_agent(
    rng: np.random.Generator,
    T: int,
    max_states: int = 5,
    max_controls: int = 4,
    integer_costs: bool = False,
) -> AgentSpec:
    """Random agent with nonempty initial and control sets.

    ``integer_costs`` draws small integers so ties between trajectories occur.
    """
    S = int(rng.integers(1, max_states + 1))
    U = int(rng.integers(1, max_controls + 1))
    feasible = rng.random((T + 1, S, U)) < 0.6
    for t in range(T + 1):
        for s in range(S):
            if not feasible[t, s].any():
                feasible[t, s, rng.integers(U)] = True
    transition = rng.integers(0, S, size=(T, S, U))
    if integer_costs:
        h = rng.integers(-2, 3, size=(T + 1, S, U)).astype(float)
        ell = rng.integers(0, 3, size=(T + 1, S, U)).astype(float)
    else:
        h = rng.uniform(-2.0, 2.0, size=(T + 1, S, U))
        ell = rng.uniform(0.0, 2.0, size=(T + 1, S, U))
    n_init = int(rng.integers(1, S + 1))
    initial = tuple(sorted(rng.choice(S, size=n_init, replace=False).tolist()))
    return AgentSpec(tuple(range(S)), initial, tuple(range(U)), feasible, transition, h, ell)


def random_social(rng: np.random.Generator, T: int, linear_share: float = 0.2) -> list[SocialCostBlock]:
    blocks = []
    for _ in range(T + 1):
        r = rng.random()
        if r < linear_share:
            blocks.append(SocialCostBlock.linear(rng.uniform(-1.0, 1.0)))
        elif r < linear_share + 0.05:
            blocks.append(SocialCostBlock.zero())
        else:
            blocks.append(SocialCostBlock.quadratic(rng.uniform(0.0, 2.0), rng.uniform(-1.0, 1.0)))
    blocks.append(SocialCostBlock.identity())
    return blocks


def random_instance(
    rng: np.random.Generator,
    N: int,
    T: int,
    max_states: int = 3,
    max_controls: int = 3,
    integer_costs: bool = False,
) -> OcInstance:
    agents = [random_agent(rng, T, max_states, max_controls, integer_costs) for _ in range(N)]
    return OcInstance(N, T, agents, random_social(rng, T))
