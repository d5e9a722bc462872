"""Frank-Wolfe on the convexified problem min f(y) over conv(Y).

The linear minimisation step over conv(Y) splits into one best response per
agent. The duality gap <grad f(y), y - ybar> certifies f(y) - gap <= relaxed
optimum, which in turn lower-bounds the original problem.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import mean_rows
from .dp import best_responses
from .errors import InstanceMismatchError
from .model import OcInstance, Trajectory, first_trajectory

StepRule = Callable[[int], float]

# relative slack on the lower bound covering roundoff in f(y) and the gap
LB_SLACK = 1e-12


def default_step(k: int) -> float:
    return 2.0 / (k + 2.0)


def constant_step(omega: float) -> StepRule:
    if not 0.0 <= omega <= 1.0:
        raise ValueError(f"step {omega} outside [0, 1]")
    return lambda k: omega


def initial_decisions(instance: OcInstance) -> list[Trajectory]:
    """First-in-order trajectory of every agent (zero charging for the battery fleet)."""
    return [first_trajectory(a) for a in instance.agents]


def fw_linear_oracle(instance: OcInstance, y, workers: int = 1) -> tuple[np.ndarray, list[Trajectory]]:
    """Minimiser ybar of <grad f(y), .> over conv(Y), with the trajectories realising it."""
    mu = instance.social_cost.gradient(y)
    br = best_responses(instance, mu, workers=workers)
    return mean_rows(br.contributions), br.trajectories()


def fw_gap(instance: OcInstance, y, workers: int = 1) -> float:
    y = np.asarray(y, dtype=float)
    mu = instance.social_cost.gradient(y)
    ybar = mean_rows(best_responses(instance, mu, workers=workers).contributions)
    return float(mu @ (y - ybar))


@dataclass(frozen=True)
class FwRecord:
    k: int
    value: float
    gap: float
    lower_bound: float
    omega: float
    wall_ms: float


@dataclass
class RelaxedRunResult:
    records: list[FwRecord]
    y: np.ndarray
    final_value: float
    certified_lower_bound: float
    ybar_trajectories: list[Trajectory] = field(default_factory=list)

    @property
    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.records])

    @property
    def gaps(self) -> np.ndarray:
        return np.array([r.gap for r in self.records])


def fw_run(
    instance: OcInstance,
    K: int,
    step: StepRule | None = None,
    workers: int = 1,
    y0=None,
) -> RelaxedRunResult:
    """Run exactly K iterations; records cover k = 0..K (the last row only evaluates)."""
    if K < 1:
        raise ValueError(f"K={K} must be at least 1")
    step = step or default_step
    social = instance.social_cost
    if y0 is None:
        y = mean_rows(instance.contribution_matrix(initial_decisions(instance)))
    else:
        y = np.asarray(y0, dtype=float)
        if y.shape != (instance.n_blocks,):
            raise InstanceMismatchError(f"y0 has shape {y.shape}")
    records = []
    best_lb = -np.inf
    trajs: list[Trajectory] = []
    for k in range(K + 1):
        tic = time.perf_counter()
        value = float(social.value(y))
        mu = social.gradient(y)
        br = best_responses(instance, mu, workers=workers)
        ybar = mean_rows(br.contributions)
        gap = float(mu @ (y - ybar))
        slack = LB_SLACK * (1.0 + abs(value))
        # f(y) - gap lower-bounds the relaxed optimum and f(y) upper-bounds it; slack absorbs roundoff
        best_lb = max(best_lb, value - max(gap, 0.0) - slack)
        omega = step(k)
        if k < K:
            y = (1.0 - omega) * y + omega * ybar
        else:
            trajs = br.trajectories()
        records.append(FwRecord(k, value, gap, min(best_lb, value - slack), omega, 1e3 * (time.perf_counter() - tic)))
    return RelaxedRunResult(records, y, records[-1].value, records[-1].lower_bound, trajs)
