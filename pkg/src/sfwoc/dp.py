"""Per-agent best response by backward induction.

Given prices mu (the social-cost gradient at the current aggregate), agent i
minimises sum_t [ mu_{T+1} * l^t(s, u) + mu_t * h^t(s, u) ] over its feasible
trajectories. With the identity terminal block mu_{T+1} = 1, so this is the
usual priced individual cost.

All routines work on ``AgentTables`` stacks so a whole population is solved
with one vectorised sweep per time step; every agent's numbers are computed
elementwise, so results do not depend on how agents are batched.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleAgentError, InstanceMismatchError
from .model import AgentSpec, AgentTables, OcInstance, Trajectory


@dataclass(frozen=True)
class ValueTable:
    """V[t, s] for t = 0..T+1 (row T+1 is zero); +inf marks padded states."""

    values: np.ndarray


@dataclass(frozen=True)
class BestResponses:
    """Batched oracle output: position arrays (B, T+1), optimal values (B,), contributions (B, T+2)."""

    states: np.ndarray
    controls: np.ndarray
    values: np.ndarray
    contributions: np.ndarray

    def trajectories(self) -> list[Trajectory]:
        return [Trajectory(s, u) for s, u in zip(self.states, self.controls)]


def _check_mu(mu, T: int) -> np.ndarray:
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (T + 2,):
        raise InstanceMismatchError(f"price vector has shape {mu.shape}, expected ({T + 2},)")
    return mu


def _priced(tables: AgentTables, mu: np.ndarray) -> np.ndarray:
    T = tables.T
    q = mu[T + 1] * tables.individual_cost + mu[: T + 1, None, None] * tables.contribution
    return np.where(tables.feasible, q, np.inf)


def _backward(tables: AgentTables, priced: np.ndarray) -> np.ndarray:
    B, T1, S, U = priced.shape
    T = T1 - 1
    V = np.zeros((B, T + 2, S))
    V[:, T] = priced[:, T].min(axis=2)
    for t in range(T - 1, -1, -1):
        cont = np.take_along_axis(V[:, t + 1], tables.transition[:, t].reshape(B, S * U), axis=1)
        V[:, t] = (priced[:, t] + cont.reshape(B, S, U)).min(axis=2)
    return V


def _solve(tables: AgentTables, mu: np.ndarray) -> BestResponses:
    if not tables.initial.any(axis=1).all():
        raise InfeasibleAgentError("an agent has no initial state")
    priced = _priced(tables, mu)
    V = _backward(tables, priced)
    B, T1, S, U = priced.shape
    T = T1 - 1
    b = np.arange(B)
    v0 = np.where(tables.initial, V[:, 0], np.inf)
    s = v0.argmin(axis=1)
    values = v0[b, s]
    if not np.isfinite(values).all():
        raise InfeasibleAgentError("an agent has a reachable state without feasible controls")
    states = np.empty((B, T1), dtype=np.int64)
    controls = np.empty((B, T1), dtype=np.int64)
    for t in range(T1):
        q = priced[b, t, s]
        if t < T:
            nxt = tables.transition[b, t, s]
            q = q + V[b[:, None], t + 1, nxt]
        u = q.argmin(axis=1)
        states[:, t] = s
        controls[:, t] = u
        if t < T:
            s = nxt[b, u]
    return BestResponses(states, controls, values, tables.contributions(states, controls))


def priced_cost(agent: AgentSpec, mu, t: int, s: int, u: int) -> float:
    """l^t(s, u) * mu_{T+1} + mu_t * h^t(s, u) for a feasible pair (positions)."""
    mu = _check_mu(mu, agent.T)
    if not agent.feasible[t, s, u]:
        raise InstanceMismatchError(f"(t={t}, s={s}, u={u}) is not a feasible pair")
    return float(mu[agent.T + 1] * agent.individual_cost[t, s, u] + mu[t] * agent.contribution[t, s, u])


def backward_pass(agent: AgentSpec, mu) -> ValueTable:
    mu = _check_mu(mu, agent.T)
    if not agent.feasible.any(axis=2).all():
        raise InfeasibleAgentError("empty feasible control set")
    tables = agent.tables
    V = _backward(tables, _priced(tables, mu))[0]
    return ValueTable(V[:, : agent.n_states])


def best_response(agent: AgentSpec, mu) -> tuple[Trajectory, float]:
    """Optimal trajectory and its priced cost; ties go to the first position."""
    mu = _check_mu(mu, agent.T)
    if not agent.initial_index:
        raise InfeasibleAgentError("initial state set is empty")
    out = _solve(agent.tables, mu)
    return Trajectory(out.states[0], out.controls[0]), float(out.values[0])


def _chunks(n: int, workers: int) -> list[slice]:
    workers = max(1, min(workers, n))
    bounds = np.linspace(0, n, workers + 1).astype(int)
    return [slice(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:])]


def best_responses(instance: OcInstance, mu, workers: int = 1) -> BestResponses:
    """Best responses of all agents; bitwise identical for any ``workers``."""
    mu = _check_mu(mu, instance.T)
    tables = instance.tables
    if workers <= 1:
        return _solve(tables, mu)
    parts = _chunks(tables.n_agents, workers)
    with ThreadPoolExecutor(max_workers=len(parts)) as pool:
        results = list(pool.map(lambda sl: _solve(tables.take(sl), mu), parts))
    return BestResponses(
        np.concatenate([r.states for r in results]),
        np.concatenate([r.controls for r in results]),
        np.concatenate([r.values for r in results]),
        np.concatenate([r.contributions for r in results]),
    )
