"""Aggregate, total cost and the relaxation constants C0 / C1."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dp import best_responses
from .errors import InfeasibleAgentError
from .model import OcInstance, Trajectory, validate_instance


def mean_rows(G: np.ndarray) -> np.ndarray:
    """Aggregate of a contribution matrix: (1/N) * sum of its rows."""
    return G.sum(axis=0) / G.shape[0]


def aggregate(instance: OcInstance, x: Sequence[Trajectory]) -> np.ndarray:
    return mean_rows(instance.contribution_matrix(x))


def evaluate_J(instance: OcInstance, x: Sequence[Trajectory]) -> float:
    return float(instance.social_cost.value(aggregate(instance, x)))


@dataclass(frozen=True)
class BoundReport:
    """Diameters, Lipschitz constants and the derived gap bound.

    ``diameters`` has shape (N, T+2); ``y_lo``/``y_hi`` bound the convexified
    aggregate set blockwise (for scalar blocks they are its exact hull).
    """

    diameters: np.ndarray
    lipschitz: np.ndarray
    grad_lipschitz: np.ndarray
    C0: float
    C1: float
    gap_bound: float
    y_lo: np.ndarray | None = None
    y_hi: np.ndarray | None = None

    @property
    def N(self) -> int:
        return self.diameters.shape[0]

    @classmethod
    def from_parts(cls, diameters, lipschitz, grad_lipschitz, y_lo=None, y_hi=None) -> "BoundReport":
        d = np.asarray(diameters, dtype=float)
        L = np.asarray(lipschitz, dtype=float)
        Lt = np.asarray(grad_lipschitz, dtype=float)
        C0, C1, gap = assemble_constants(d, L, Lt)
        return cls(d, L, Lt, C0, C1, gap, y_lo, y_hi)


def assemble_constants(d: np.ndarray, L: np.ndarray, Lt: np.ndarray) -> tuple[float, float, float]:
    """(C0, C1, C1 / 2N) from diameters d[i, t] and per-block constants."""
    N = d.shape[0]
    C0 = float(np.sum(L * d.max(axis=0)))
    C1 = float(np.sum(Lt * np.sum(d**2, axis=0)) / N)
    return C0, C1, C1 / (2 * N)


def block_ranges(instance: OcInstance) -> tuple[np.ndarray, np.ndarray]:
    """Per-agent min and max of every block g_it over feasible trajectories, each (N, T+2).

    Each block is additive over time, so its extrema come from two best
    responses with a unit price on that block (and its negative).
    """
    M = instance.n_blocks
    lo = np.empty((instance.N, M))
    hi = np.empty((instance.N, M))
    for t in range(M):
        e = np.zeros(M)
        e[t] = 1.0
        lo[:, t] = best_responses(instance, e).values
        hi[:, t] = -best_responses(instance, -e).values
    return lo, hi


def compute_constants(instance: OcInstance) -> BoundReport:
    """Exact diameters by dynamic programming; Lipschitz constants on the hull intervals."""
    problems = [v for v in validate_instance(instance) if v.rule in ("nonempty-initial-states", "nonempty-controls")]
    if problems:
        raise InfeasibleAgentError(str(problems[0]))
    lo, hi = block_ranges(instance)
    d = hi - lo
    y_lo, y_hi = mean_rows(lo), mean_rows(hi)
    L = np.array([b.lipschitz(a, z) for b, a, z in zip(instance.social, y_lo, y_hi)])
    Lt = np.array([b.grad_lipschitz() for b in instance.social])
    return BoundReport.from_parts(d, L, Lt, y_lo, y_hi)
