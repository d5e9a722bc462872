"""Ground truth for small instances.

Two independent routes to the exact optimum:

* ``enumerate_optimum`` walks the product of every agent's feasible
  trajectories;
* ``build_micp`` writes the problem over 0/1 indicators m[i, t, (s, u)] with
  simplex, initial-state and flow-conservation constraints, and
  ``enumerate_micp_optimum`` searches the integer points of that model using
  only its constraint rows and objective.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConstraintViolationError, EnumerationCapError
from .model import AgentSpec, OcInstance, Trajectory, trajectory_contributions
from .social import SocialCost, SocialCostBlock

DEFAULT_CAP = 10**7


def enumerate_trajectories(agent: AgentSpec) -> list[Trajectory]:
    """All feasible trajectories in lexicographic order of (s^0, u^0, ..., u^T)."""
    T = agent.T
    out = []

    def walk(t, s, states, controls):
        for u in agent.feasible_controls(t, s):
            st, ct = states + (s,), controls + (int(u),)
            if t == T:
                out.append(Trajectory(st, ct))
            else:
                walk(t + 1, int(agent.transition[t, s, u]), st, ct)

    for s0 in agent.initial_index:
        walk(0, s0, (), ())
    return out


def count_trajectories(agent: AgentSpec) -> int:
    T = agent.T
    count = agent.feasible[T].sum(axis=1).astype(object)
    for t in range(T - 1, -1, -1):
        nxt = agent.transition[t]
        count = np.array(
            [sum(count[nxt[s, u]] for u in agent.feasible_controls(t, s)) for s in range(agent.n_states)],
            dtype=object,
        )
    return int(sum(count[s] for s in agent.initial_index))


def enumerate_optimum(
    instance: OcInstance, cap: int = DEFAULT_CAP, chunk: int = 1 << 16
) -> tuple[float, list[Trajectory]]:
    """Global minimum of J over the product space, first minimiser in lexicographic order."""
    counts = [count_trajectories(a) for a in instance.agents]
    size = int(np.prod([int(c) for c in counts], dtype=object))
    if size > cap:
        raise EnumerationCapError(size, cap)
    per_agent = [enumerate_trajectories(a) for a in instance.agents]
    contrib = [trajectory_contributions(a, trajs) for a, trajs in zip(instance.agents, per_agent)]
    social = instance.social_cost
    N = instance.N
    shape = tuple(len(p) for p in per_agent)
    best_val, best_idx = np.inf, 0
    for start in range(0, size, chunk):
        flat = np.arange(start, min(size, start + chunk))
        digits = np.unravel_index(flat, shape)
        total = contrib[0][digits[0]].copy()
        for i in range(1, N):
            total += contrib[i][digits[i]]
        vals = social.value(total / N)
        j = int(vals.argmin())
        if vals[j] < best_val:
            best_val, best_idx = float(vals[j]), int(flat[j])
    digits = np.unravel_index(best_idx, shape)
    return best_val, [per_agent[i][int(d)] for i, d in enumerate(digits)]


# --- MICP ------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearConstraint:
    """sum coeffs[k] * m[index[k]]  ==  rhs."""

    name: str
    family: str
    index: tuple[int, ...]
    coeffs: tuple[float, ...]
    rhs: float


@dataclass(frozen=True, eq=False)
class MicpModel:
    """Indicator model of the control problem.

    ``variables[k] = (i, t, s, u)`` in positions. The objective is
    ``sum_t f_t(aggregate_t . m) + linear . m`` where ``aggregate_t`` holds
    h / N and ``linear`` holds l / N. Nonnegativity and integrality are
    implicit for every variable.
    """

    N: int
    T: int
    variables: tuple[tuple[int, int, int, int], ...]
    blocks: tuple[SocialCostBlock, ...]
    aggregate_index: tuple[np.ndarray, ...]
    aggregate_coeffs: tuple[np.ndarray, ...]
    linear: np.ndarray
    constraints: tuple[LinearConstraint, ...]

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    def position(self) -> dict:
        return {v: k for k, v in enumerate(self.variables)}

    def family_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for c in self.constraints:
            out[c.family] = out.get(c.family, 0) + 1
        return out

    def aggregates(self, m) -> np.ndarray:
        m = np.asarray(m, dtype=float)
        return np.array([c @ m[idx] for idx, c in zip(self.aggregate_index, self.aggregate_coeffs)])

    def objective(self, m) -> float:
        m = np.asarray(m, dtype=float)
        social = SocialCost(self.blocks)
        return float(social.value(self.aggregates(m))) + float(self.linear @ m)

    def violations(self, m) -> list[str]:
        m = np.asarray(m)
        out = []
        if m.shape != (self.n_variables,):
            return [f"assignment has shape {m.shape}, expected ({self.n_variables},)"]
        if not np.all(m == np.round(m)):
            out.append("integrality: non-integer entries")
        if np.any(m < 0):
            out.append("simplex: negative entries")
        for c in self.constraints:
            lhs = float(np.dot(np.asarray(c.coeffs), m[list(c.index)])) if c.index else 0.0
            if abs(lhs - c.rhs) > 1e-9:
                out.append(f"{c.family}: {c.name} has {lhs:g} != {c.rhs:g}")
        return out


def build_micp(instance: OcInstance) -> MicpModel:
    N, T = instance.N, instance.T
    variables = []
    index: dict[tuple, int] = {}
    for i, a in enumerate(instance.agents):
        for t in range(T + 1):
            for s, u in np.argwhere(a.feasible[t]):
                index[(i, t, int(s), int(u))] = len(variables)
                variables.append((i, t, int(s), int(u)))
    n = len(variables)
    linear = np.zeros(n)
    agg_idx: list[list[int]] = [[] for _ in range(T + 1)]
    agg_val: list[list[float]] = [[] for _ in range(T + 1)]
    for k, (i, t, s, u) in enumerate(variables):
        a = instance.agents[i]
        linear[k] = a.individual_cost[t, s, u] / N
        h = float(a.contribution[t, s, u])
        if h != 0.0:
            agg_idx[t].append(k)
            agg_val[t].append(h / N)

    cons = []
    for i, a in enumerate(instance.agents):
        for t in range(T + 1):
            idx = tuple(index[(i, t, int(s), int(u))] for s, u in np.argwhere(a.feasible[t]))
            cons.append(LinearConstraint(f"simplex_{i}_{t}", "simplex", idx, (1.0,) * len(idx), 1.0))
        init = set(a.initial_index)
        for s in range(a.n_states):
            if s in init:
                continue
            for u in a.feasible_controls(0, s):
                cons.append(
                    LinearConstraint(f"init_{i}_{s}_{int(u)}", "initial", (index[(i, 0, s, int(u))],), (1.0,), 0.0)
                )
        for theta in range(1, T + 1):
            pre: dict[int, list[int]] = {s: [] for s in range(a.n_states)}
            for s, u in np.argwhere(a.feasible[theta - 1]):
                pre[int(a.transition[theta - 1, s, u])].append(index[(i, theta - 1, int(s), int(u))])
            for s in range(a.n_states):
                out_idx = [index[(i, theta, s, int(u))] for u in a.feasible_controls(theta, s)]
                idx = tuple(out_idx + pre[s])
                coeffs = (1.0,) * len(out_idx) + (-1.0,) * len(pre[s])
                cons.append(LinearConstraint(f"flow_{i}_{theta}_{s}", "flow", idx, coeffs, 0.0))
    return MicpModel(
        N,
        T,
        tuple(variables),
        instance.social[: T + 1],
        tuple(np.array(x, dtype=np.int64) for x in agg_idx),
        tuple(np.array(x, dtype=float) for x in agg_val),
        linear,
        tuple(cons),
    )


def trajectory_to_m(model: MicpModel, x: Sequence[Trajectory]) -> np.ndarray:
    pos = model.position()
    m = np.zeros(model.n_variables, dtype=np.int64)
    for i, traj in enumerate(x):
        for t in range(model.T + 1):
            m[pos[(i, t, traj.states[t], traj.controls[t])]] = 1
    return m


def m_to_trajectory(model: MicpModel, m) -> list[Trajectory]:
    """Inverse of ``trajectory_to_m``; raises with every broken constraint."""
    problems = model.violations(m)
    if problems:
        raise ConstraintViolationError(problems)
    m = np.asarray(m)
    chosen: dict[tuple[int, int], tuple[int, int]] = {}
    for k in np.flatnonzero(m):
        i, t, s, u = model.variables[k]
        chosen[(i, t)] = (s, u)
    return [
        Trajectory(
            tuple(chosen[(i, t)][0] for t in range(model.T + 1)),
            tuple(chosen[(i, t)][1] for t in range(model.T + 1)),
        )
        for i in range(model.N)
    ]


def enumerate_micp_optimum(model: MicpModel, cap: int = 10**6) -> tuple[float, np.ndarray]:
    """Minimum of the model objective over its integer-feasible points.

    Integrality, nonnegativity and the simplex rows force exactly one unit
    entry per (agent, time) block; every such choice is tested against the
    remaining rows of that agent, then agents are combined.
    """
    blocks: dict[tuple[int, int], list[int]] = {}
    for k, (i, t, _, _) in enumerate(model.variables):
        blocks.setdefault((i, t), []).append(k)
    rows_of: dict[int, list[LinearConstraint]] = {}
    for c in model.constraints:
        if c.family == "simplex" or not c.index:
            continue
        rows_of.setdefault(model.variables[c.index[0]][0], []).append(c)

    per_agent: list[list[tuple[int, ...]]] = []
    for i in range(model.N):
        choices = [blocks[(i, t)] for t in range(model.T + 1)]
        ok = []
        for pick in itertools.product(*choices):
            on = set(pick)
            if all(
                abs(sum(c for k, c in zip(row.index, row.coeffs) if k in on) - row.rhs) <= 1e-9
                for row in rows_of.get(i, [])
            ):
                ok.append(pick)
        per_agent.append(ok)
    size = int(np.prod([len(p) for p in per_agent], dtype=object))
    if size > cap:
        raise EnumerationCapError(size, cap)
    best_val, best_m = np.inf, None
    m = np.zeros(model.n_variables)
    for combo in itertools.product(*per_agent):
        m[:] = 0.0
        for pick in combo:
            m[list(pick)] = 1.0
        val = model.objective(m)
        if val < best_val:
            best_val, best_m = val, m.astype(np.int64)
    return best_val, best_m
