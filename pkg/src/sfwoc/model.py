"""Finite-state multi-agent control problems and their aggregative form.

Each agent's data lives in dense tables indexed ``[t, s, u]`` by *positions*
in its ordered state and control label tuples; a boolean ``feasible`` mask
marks which (s, u) pairs are allowed at time t. Trajectories store positions
too. Label order fixes every tie-break downstream.

The aggregate space has T+2 scalar blocks: block t <= T carries the
contribution h^t(s^t, u^t) and block T+1 carries the summed individual costs,
priced by an identity social cost.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Hashable, Sequence

import numpy as np

from .errors import InfeasibleTrajectoryError, InstanceMismatchError
from .social import SocialCost, SocialCostBlock


@dataclass(frozen=True)
class Trajectory:
    """State and control positions for t = 0..T."""

    states: tuple[int, ...]
    controls: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(int(s) for s in self.states))
        object.__setattr__(self, "controls", tuple(int(u) for u in self.controls))

    @classmethod
    def from_labels(cls, agent: "AgentSpec", states, controls) -> "Trajectory":
        return cls(
            tuple(agent.state_index(s) for s in states),
            tuple(agent.control_index(u) for u in controls),
        )

    def labels(self, agent: "AgentSpec") -> tuple[tuple, tuple]:
        return (
            tuple(agent.states[s] for s in self.states),
            tuple(agent.controls[u] for u in self.controls),
        )


@dataclass(frozen=True, eq=False)
class AgentSpec:
    """One agent: label sets plus dense (t, s, u) tables.

    ``transition[t, s, u]`` is the position of the next state for t < T, or -1
    when the label was not found among ``states``. Table entries outside the
    feasible mask are ignored.
    """

    states: tuple
    initial_states: tuple
    controls: tuple
    feasible: np.ndarray
    transition: np.ndarray
    contribution: np.ndarray
    individual_cost: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "initial_states", tuple(self.initial_states))
        object.__setattr__(self, "controls", tuple(self.controls))
        for name, dtype in (
            ("feasible", bool),
            ("transition", np.int64),
            ("contribution", float),
            ("individual_cost", float),
        ):
            arr = np.array(getattr(self, name), dtype=dtype)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def build(
        cls,
        states: Sequence[Hashable],
        initial_states: Sequence[Hashable],
        controls: Sequence[Hashable],
        T: int,
        feasible: Callable[[int, Any], Sequence[Hashable]],
        transition: Callable[[int, Any, Any], Hashable],
        contribution: Callable[[int, Any, Any], float],
        individual_cost: Callable[[int, Any, Any], float],
    ) -> "AgentSpec":
        """Tabulate an agent from label-level callables."""
        states, controls = tuple(states), tuple(controls)
        s_pos = {s: k for k, s in enumerate(states)}
        u_pos = {u: k for k, u in enumerate(controls)}
        S, U = len(states), len(controls)
        feas = np.zeros((T + 1, S, U), dtype=bool)
        nxt = np.full((T, S, U), -1, dtype=np.int64)
        h = np.zeros((T + 1, S, U))
        ell = np.zeros((T + 1, S, U))
        for t in range(T + 1):
            for si, s in enumerate(states):
                for u in feasible(t, s):
                    ui = u_pos[u]
                    feas[t, si, ui] = True
                    h[t, si, ui] = contribution(t, s, u)
                    ell[t, si, ui] = individual_cost(t, s, u)
                    if t < T:
                        nxt[t, si, ui] = s_pos.get(transition(t, s, u), -1)
        return cls(states, tuple(initial_states), controls, feas, nxt, h, ell)

    @property
    def T(self) -> int:
        return self.feasible.shape[0] - 1

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_controls(self) -> int:
        return len(self.controls)

    @cached_property
    def _state_pos(self) -> dict:
        return {s: k for k, s in enumerate(self.states)}

    @cached_property
    def _control_pos(self) -> dict:
        return {u: k for k, u in enumerate(self.controls)}

    def state_index(self, label) -> int:
        return self._state_pos[label]

    def control_index(self, label) -> int:
        return self._control_pos[label]

    @cached_property
    def initial_index(self) -> tuple[int, ...]:
        """Positions of the initial states that are actual states, in state order."""
        pos = {self._state_pos[s] for s in self.initial_states if s in self._state_pos}
        return tuple(sorted(pos))

    def feasible_controls(self, t: int, s: int) -> np.ndarray:
        return np.flatnonzero(self.feasible[t, s])

    @cached_property
    def tables(self) -> "AgentTables":
        return stack_agents([self])

    def trajectory_error(self, traj: Trajectory) -> tuple[int, str] | None:
        """First reason ``traj`` is infeasible as (t, message), or None."""
        T = self.T
        if len(traj.states) != T + 1 or len(traj.controls) != T + 1:
            raise InstanceMismatchError(
                f"trajectory lengths ({len(traj.states)}, {len(traj.controls)}) != T+1 = {T + 1}"
            )
        S, U = self.n_states, self.n_controls
        if traj.states[0] not in self.initial_index:
            return 0, f"initial state position {traj.states[0]} not in the initial set"
        for t in range(T + 1):
            s, u = traj.states[t], traj.controls[t]
            if not (0 <= s < S):
                return t, f"state position {s} out of range"
            if not (0 <= u < U) or not self.feasible[t, s, u]:
                return t, f"control position {u} not feasible in state {self.states[s]!r}"
            if t < T and self.transition[t, s, u] != traj.states[t + 1]:
                return t, "state sequence does not follow the transition"
        return None


def is_feasible(agent: AgentSpec, traj: Trajectory) -> bool:
    return agent.trajectory_error(traj) is None


def first_trajectory(agent: AgentSpec) -> Trajectory:
    """Deterministic trajectory: first initial state, then first feasible control at every step."""
    s = agent.initial_index[0]
    states, controls = [], []
    for t in range(agent.T + 1):
        u = int(np.argmax(agent.feasible[t, s]))
        states.append(s)
        controls.append(u)
        if t < agent.T:
            s = int(agent.transition[t, s, u])
    return Trajectory(tuple(states), tuple(controls))


@dataclass(frozen=True, eq=False)
class AgentTables:
    """Agents stacked along a leading axis, padded to common state/control counts.

    Padding is infeasible everywhere, so it never wins a minimisation and is
    never reached from an initial state.
    """

    feasible: np.ndarray  # (B, T+1, S, U) bool
    contribution: np.ndarray  # (B, T+1, S, U)
    individual_cost: np.ndarray  # (B, T+1, S, U)
    transition: np.ndarray  # (B, T, S, U), infeasible entries clipped to 0
    initial: np.ndarray  # (B, S) bool

    @property
    def n_agents(self) -> int:
        return self.feasible.shape[0]

    @property
    def T(self) -> int:
        return self.feasible.shape[1] - 1

    def take(self, sl: slice) -> "AgentTables":
        return AgentTables(
            self.feasible[sl],
            self.contribution[sl],
            self.individual_cost[sl],
            self.transition[sl],
            self.initial[sl],
        )

    def contributions(self, states: np.ndarray, controls: np.ndarray) -> np.ndarray:
        """Contribution vectors g_i, shape (B, T+2), for position arrays of shape (B, T+1)."""
        B, T1 = states.shape
        b = np.arange(B)[:, None]
        t = np.arange(T1)[None, :]
        g = np.empty((B, T1 + 1))
        g[:, :T1] = self.contribution[b, t, states, controls]
        g[:, T1] = self.individual_cost[b, t, states, controls].sum(axis=1)
        return g


def stack_agents(agents: Sequence[AgentSpec]) -> AgentTables:
    T = agents[0].T
    B = len(agents)
    S = max(a.n_states for a in agents)
    U = max(a.n_controls for a in agents)
    feas = np.zeros((B, T + 1, S, U), dtype=bool)
    h = np.zeros((B, T + 1, S, U))
    ell = np.zeros((B, T + 1, S, U))
    nxt = np.zeros((B, T, S, U), dtype=np.int64)
    init = np.zeros((B, S), dtype=bool)
    for i, a in enumerate(agents):
        if a.T != T:
            raise InstanceMismatchError(f"agent {i} has horizon {a.T}, expected {T}")
        s, u = a.n_states, a.n_controls
        feas[i, :, :s, :u] = a.feasible
        h[i, :, :s, :u] = np.where(a.feasible, a.contribution, 0.0)
        ell[i, :, :s, :u] = np.where(a.feasible, a.individual_cost, 0.0)
        nxt[i, :, :s, :u] = np.where(a.feasible[:T], np.clip(a.transition, 0, None), 0)
        init[i, list(a.initial_index)] = True
    return AgentTables(feas, h, ell, nxt, init)


@dataclass(frozen=True, eq=False)
class OcInstance:
    """N agents over horizon T with T+2 social cost blocks.

    ``meta`` carries generator provenance (e.g. battery parameters) and is
    preserved by the file format.
    """

    N: int
    T: int
    agents: tuple[AgentSpec, ...]
    social: tuple[SocialCostBlock, ...]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        object.__setattr__(self, "social", tuple(self.social))

    @property
    def n_blocks(self) -> int:
        return self.T + 2

    @cached_property
    def social_cost(self) -> SocialCost:
        return SocialCost(self.social)

    @cached_property
    def tables(self) -> AgentTables:
        return stack_agents(self.agents)

    def check_decisions(self, x: Sequence[Trajectory]) -> None:
        if len(x) != self.N:
            raise InstanceMismatchError(f"got {len(x)} trajectories for {self.N} agents")
        for i, (agent, traj) in enumerate(zip(self.agents, x)):
            err = agent.trajectory_error(traj)
            if err is not None:
                raise InfeasibleTrajectoryError(i, *err)

    def contribution_matrix(self, x: Sequence[Trajectory]) -> np.ndarray:
        """Rows g_i(x_i), shape (N, T+2); raises on infeasible input."""
        self.check_decisions(x)
        states = np.array([tr.states for tr in x], dtype=np.int64)
        controls = np.array([tr.controls for tr in x], dtype=np.int64)
        return self.tables.contributions(states, controls)


def trajectory_contributions(agent: AgentSpec, trajs: Sequence[Trajectory]) -> np.ndarray:
    """Contribution vectors of many trajectories of one agent, shape (n, T+2); no feasibility check."""
    states = np.array([tr.states for tr in trajs], dtype=np.int64).reshape(len(trajs), agent.T + 1)
    controls = np.array([tr.controls for tr in trajs], dtype=np.int64).reshape(len(trajs), agent.T + 1)
    t = np.arange(agent.T + 1)[None, :]
    g = np.empty((len(trajs), agent.T + 2))
    g[:, :-1] = agent.contribution[t, states, controls]
    g[:, -1] = agent.individual_cost[t, states, controls].sum(axis=1)
    return g


def contribution_vector(agent: AgentSpec, traj: Trajectory) -> np.ndarray:
    """g_i(x_i): h^t(s^t, u^t) for t <= T, then the summed individual cost."""
    err = agent.trajectory_error(traj)
    if err is not None:
        raise InfeasibleTrajectoryError(None, *err)
    states = np.array([traj.states], dtype=np.int64)
    controls = np.array([traj.controls], dtype=np.int64)
    return agent.tables.contributions(states, controls)[0]


def evaluate_oc_cost(instance: OcInstance, x: Sequence[Trajectory]) -> float:
    """Cost of the control problem written directly over states and controls.

    Deliberately independent of the aggregate machinery: plain loops over
    agents and time, used to cross-check the reformulated cost.
    """
    instance.check_decisions(x)
    N, T = instance.N, instance.T
    total = 0.0
    for t in range(T + 1):
        s = 0.0
        for agent, traj in zip(instance.agents, x):
            s += float(agent.contribution[t, traj.states[t], traj.controls[t]])
        total += instance.social[t].value(s / N)
    individual = 0.0
    for agent, traj in zip(instance.agents, x):
        for t in range(T + 1):
            individual += float(agent.individual_cost[t, traj.states[t], traj.controls[t]])
    return total + individual / N


# --- validation -------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    rule: str
    message: str
    agent: int | None = None
    t: int | None = None
    state: Any = None
    control: Any = None

    def __str__(self):
        where = ", ".join(
            f"{k}={v!r}"
            for k, v in (("agent", self.agent), ("t", self.t), ("state", self.state), ("control", self.control))
            if v is not None
        )
        return f"[{self.rule}] {where}: {self.message}" if where else f"[{self.rule}] {self.message}"


def _agent_violations(i: int, a: AgentSpec, T: int) -> list[Violation]:
    out = []
    S, U = a.n_states, a.n_controls
    if a.T != T:
        out.append(Violation("horizon", f"agent horizon {a.T} differs from instance T={T}", agent=i))
        return out
    for name, arr, shape in (
        ("feasible", a.feasible, (T + 1, S, U)),
        ("contribution", a.contribution, (T + 1, S, U)),
        ("individual_cost", a.individual_cost, (T + 1, S, U)),
        ("transition", a.transition, (T, S, U)),
    ):
        if arr.shape != shape:
            out.append(Violation("table-shape", f"{name} has shape {arr.shape}, expected {shape}", agent=i))
    if out:
        return out
    if len(set(a.states)) != S or len(set(a.controls)) != U:
        out.append(Violation("labels", "state or control labels are not unique", agent=i))
    if not a.initial_states:
        out.append(Violation("nonempty-initial-states", "initial state set is empty", agent=i))
    for s in a.initial_states:
        if s not in a._state_pos:
            out.append(Violation("initial-state-label", "initial state is not a state", agent=i, state=s))
    empty = np.argwhere(~a.feasible.any(axis=2))
    for t, s in empty:
        out.append(
            Violation("nonempty-controls", "no feasible control", agent=i, t=int(t), state=a.states[s])
        )
    bad = a.feasible[:T] & ((a.transition < 0) | (a.transition >= S))
    for t, s, u in np.argwhere(bad):
        out.append(
            Violation(
                "transition-range",
                "transition leaves the state set",
                agent=i, t=int(t), state=a.states[s], control=a.controls[u],
            )
        )
    for name, arr in (("contribution", a.contribution), ("individual_cost", a.individual_cost)):
        for t, s, u in np.argwhere(a.feasible & ~np.isfinite(arr)):
            out.append(
                Violation(
                    "finite-tables", f"{name} is not finite",
                    agent=i, t=int(t), state=a.states[s], control=a.controls[u],
                )
            )
    return out


def validate_instance(instance: OcInstance) -> list[Violation]:
    """Every structural problem with ``instance``; an empty list means valid."""
    out = []
    N, T = instance.N, instance.T
    if N < 1:
        out.append(Violation("agent-count", f"N={N} must be positive"))
    if T < 0:
        out.append(Violation("horizon", f"T={T} must be nonnegative"))
        return out
    if len(instance.agents) != N:
        out.append(Violation("agent-count", f"{len(instance.agents)} agents listed for N={N}"))
    if len(instance.social) != T + 2:
        out.append(Violation("block-count", f"{len(instance.social)} social blocks, expected T+2={T + 2}"))
    elif instance.social[T + 1].kind != "identity":
        out.append(Violation("terminal-block", "block T+1 must be the identity", t=T + 1))
    for t, b in enumerate(instance.social):
        if b.kind == "quadratic" and not b.alpha >= 0:
            out.append(Violation("convexity", f"quadratic block has alpha={b.alpha} < 0", t=t))
        if not all(np.isfinite([b.alpha, b.target, b.weight])):
            out.append(Violation("finite-social", "social block parameter is not finite", t=t))
    for i, a in enumerate(instance.agents):
        out.extend(_agent_violations(i, a, T))
    return out
