"""Stochastic Frank-Wolfe for the nonconvex aggregative problem.

Each iteration computes every agent's best response to the current prices,
then samples ``n_k`` candidate profiles in which each agent independently
switches to its best response with probability omega_k. The next iterate is
the cheapest of the candidates and the incumbent. Candidates are scored from
the incumbent aggregate by adding only the switched agents' contribution
differences.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import mean_rows
from .dp import best_responses
from .fw import default_step
from .model import OcInstance, Trajectory, first_trajectory
from .rng import bernoulli_matrix


@dataclass(frozen=True)
class SfwSchedule:
    """K iterations; omega None means 2/(k+2), a float means a constant step.

    ``n`` is a constant sample count or a per-iteration sequence of length >= K.
    """

    K: int
    n: int | Sequence[int] = 20
    seed: int = 0
    omega: float | None = None

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"K={self.K} must be at least 1")
        if self.omega is not None and not 0.0 <= self.omega <= 1.0:
            raise ValueError(f"omega={self.omega} outside [0, 1]")
        if not isinstance(self.n, int):
            object.__setattr__(self, "n", tuple(int(v) for v in self.n))
            if len(self.n) < self.K:
                raise ValueError("sample-count sequence shorter than K")
        if min(self.n_at(k) for k in range(self.K)) < 1:
            raise ValueError("sample counts must be >= 1")

    def omega_at(self, k: int) -> float:
        return default_step(k) if self.omega is None else float(self.omega)

    def n_at(self, k: int) -> int:
        return self.n if isinstance(self.n, int) else self.n[k]


@dataclass
class SfwState:
    """Current profile as position arrays plus its contribution matrix and cost."""

    states: np.ndarray  # (N, T+1)
    controls: np.ndarray  # (N, T+1)
    G: np.ndarray  # (N, T+2)
    value: float

    @property
    def y(self) -> np.ndarray:
        return mean_rows(self.G)

    def trajectories(self) -> list[Trajectory]:
        return [Trajectory(s, u) for s, u in zip(self.states, self.controls)]


def initial_state(instance: OcInstance, x: Sequence[Trajectory] | None = None) -> SfwState:
    if x is None:
        x = [first_trajectory(a) for a in instance.agents]
    G = instance.contribution_matrix(x)
    states = np.array([tr.states for tr in x], dtype=np.int64)
    controls = np.array([tr.controls for tr in x], dtype=np.int64)
    return SfwState(states, controls, G, float(instance.social_cost.value(mean_rows(G))))


@dataclass(frozen=True)
class StepInfo:
    omega: float
    n: int
    swaps: int
    chosen: int  # 0 keeps the incumbent, j >= 1 is the winning sample


def sfw_iterate(
    instance: OcInstance,
    state: SfwState,
    k: int,
    schedule: SfwSchedule,
    workers: int = 1,
) -> tuple[SfwState, StepInfo]:
    social = instance.social_cost
    N = instance.N
    y = state.y
    br = best_responses(instance, social.gradient(y), workers=workers)
    omega, n = schedule.omega_at(k), schedule.n_at(k)
    lam = bernoulli_matrix(schedule.seed, k, n, N, omega)
    diff = br.contributions - state.G
    best_j, best_val = 0, state.value
    for j in range(n):
        swap = lam[j]
        if not swap.any():
            continue
        val = float(social.value(y + diff[swap].sum(axis=0) / N))
        if val < best_val:
            best_j, best_val = j + 1, val
    info = StepInfo(omega, n, int(lam.sum()), best_j)
    if best_j == 0:
        return state, info
    swap = lam[best_j - 1]
    states = np.where(swap[:, None], br.states, state.states)
    controls = np.where(swap[:, None], br.controls, state.controls)
    G = np.where(swap[:, None], br.contributions, state.G)
    value = float(social.value(mean_rows(G)))
    return SfwState(states, controls, G, value), info


@dataclass(frozen=True)
class SfwRecord:
    k: int
    J: float
    omega: float | None
    n: int | None
    swaps: int | None
    wall_ms: float


@dataclass
class SfwRunResult:
    records: list[SfwRecord]
    best_x: list[Trajectory]
    best_value: float
    gap_vs_relaxed: float | None = None
    reference: float | None = None

    @property
    def values(self) -> np.ndarray:
        return np.array([r.J for r in self.records])

    def gammas(self, reference: float | None = None) -> np.ndarray:
        ref = self.reference if reference is None else reference
        if ref is None:
            raise ValueError("no relaxed reference value supplied")
        return self.values - ref


def sfw_run(
    instance: OcInstance,
    schedule: SfwSchedule,
    reference: float | None = None,
    workers: int = 1,
    x0: Sequence[Trajectory] | None = None,
) -> SfwRunResult:
    """K iterations from the first-in-order profile; records cover k = 0..K.

    Row k holds J(x^k) and the step taken from x^k (empty on the final row).
    ``reference`` is a relaxed optimum (or proxy) used for gamma reporting.
    """
    state = initial_state(instance, x0)
    records = []
    for k in range(schedule.K):
        tic = time.perf_counter()
        new, info = sfw_iterate(instance, state, k, schedule, workers)
        records.append(SfwRecord(k, state.value, info.omega, info.n, info.swaps, 1e3 * (time.perf_counter() - tic)))
        state = new
    records.append(SfwRecord(schedule.K, state.value, None, None, None, 0.0))
    gap = None if reference is None else state.value - reference
    return SfwRunResult(records, state.trajectories(), state.value, gap, reference)


# --- concentration bound ------------------------------------------------------


@dataclass(frozen=True)
class TheoremBounds:
    C0: float
    C1: float
    N: int
    K: int
    v_K: float
    m_K: float
    expectation_bound: float
    eps: float
    probability_lower_bound: float
    certified: bool

    def probability_at(self, eps: float) -> float:
        return _probability(eps, self.N, self.v_K, self.m_K)


def _probability(eps: float, N: int, v: float, m: float) -> float:
    denom = 2.0 * (v + eps * m / 3.0)
    if denom <= 0.0:
        return 1.0
    return 1.0 - math.exp(-(eps**2) * N / denom)


def theorem_bounds(C0: float, C1: float, N: int, schedule: SfwSchedule, eps: float) -> TheoremBounds:
    """Expected-gap bound 4 C1 / K and the tail bound at ``eps`` for the 2/(k+2) step.

    The guarantee covers 1 <= K <= 2N; outside that range the numbers are
    still computed but ``certified`` is False and a warning is issued.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    K = schedule.K
    certified = 1 <= K <= 2 * N and schedule.omega is None
    if not certified:
        warnings.warn(
            f"bound not certified: K={K}, N={N} (needs 1 <= K <= 2N and the 2/(k+2) step)",
            stacklevel=2,
        )
    ks = range(1, K)
    v = 2.0 * C0**2 / (K**2 * (K + 1) ** 2) * sum(k * (k + 1) ** 2 / schedule.n_at(k) for k in ks)
    m = C0 / (K * (K + 1)) * max(((k + 1) * (k + 2) / schedule.n_at(k) for k in ks), default=0.0)
    return TheoremBounds(C0, C1, N, K, v, m, 4.0 * C1 / K, eps, _probability(eps, N, v, m), certified)
