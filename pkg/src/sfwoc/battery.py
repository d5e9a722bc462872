"""Battery-fleet charging instances.

Each battery holds an integer state of charge between its initial level and
its capacity and charges by an integer amount per step, at most ``u_max`` and
never past capacity. The fleet's mean charging power should track a target
profile; each battery pays a terminal penalty for missing full charge.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .core import BoundReport
from .model import AgentSpec, OcInstance
from .rng import generator
from .social import SocialCostBlock


@dataclass(frozen=True)
class BatteryParams:
    N: int = 100
    T: int = 24
    u_max: int = 4
    s_in_range: tuple[int, int] = (0, 20)
    s_max_range: tuple[int, int] = (20, 40)
    alpha_range: tuple[float, float] = (1.0, 2.0)
    beta_range: tuple[float, float] = (0.0, 1.0)
    target_scale: float = 1.5
    seed: int = 0
    smooth_target: bool = False

    def __post_init__(self):
        for name in ("s_in_range", "s_max_range", "alpha_range", "beta_range"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.N < 1 or self.T < 1 or self.u_max < 1:
            raise ValueError("N, T and u_max must be positive")
        for name in ("s_in_range", "s_max_range", "alpha_range", "beta_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name}={lo, hi} is empty")
        if self.s_in_range[1] > self.s_max_range[0]:
            raise ValueError("s_in_range must lie below s_max_range so that s_in <= s_max")
        if self.alpha_range[0] < 0 or self.beta_range[0] < 0:
            raise ValueError("alpha and beta must be nonnegative")

    def to_dict(self) -> dict:
        d = asdict(self)
        for name in ("s_in_range", "s_max_range", "alpha_range", "beta_range"):
            d[name] = list(d[name])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BatteryParams":
        return cls(**d)


def target_profile(t: int, scale: float = 1.5, T: int | None = None, smooth: bool = False) -> float:
    """Target mean charging power: ``scale * floor(sin(pi t / 12) + 1)``.

    With ``smooth`` the floor is dropped.
    """
    if t < 0 or (T is not None and t > T - 1):
        raise ValueError(f"t={t} outside 0..T-1")
    wave = math.sin(math.pi * t / 12.0) + 1.0
    return scale * (wave if smooth else math.floor(wave))


def battery_agent(s_in: int, s_max: int, u_max: int, beta: float, T: int) -> AgentSpec:
    states = tuple(range(s_in, s_max + 1))
    controls = tuple(range(u_max + 1))
    S, U = len(states), len(controls)
    s = np.arange(s_in, s_max + 1)[:, None]
    u = np.arange(u_max + 1)[None, :]
    ok = u <= np.minimum(u_max, s_max - s)
    feasible = np.broadcast_to(ok, (T + 1, S, U))
    transition = np.broadcast_to(np.where(ok, (s + u) - s_in, -1), (T, S, U))
    contribution = np.zeros((T + 1, S, U))
    contribution[:T] = np.where(ok, u, 0)
    cost = np.zeros((T + 1, S, U))
    cost[T] = np.where(ok, beta * (s_max - s) ** 2, 0.0)
    return AgentSpec(states, (s_in,), controls, feasible, transition, contribution, cost)


def generate(params: BatteryParams) -> OcInstance:
    """Sample a fleet from the seeded stream (draw order: s_in, s_max, alpha, beta)."""
    p = params
    rng = generator(p.seed)
    s_in = rng.integers(p.s_in_range[0], p.s_in_range[1], size=p.N, endpoint=True)
    s_max = rng.integers(p.s_max_range[0], p.s_max_range[1], size=p.N, endpoint=True)
    a_lo, a_hi = p.alpha_range
    alpha = a_lo + (a_hi - a_lo) * rng.random(p.T)
    b_lo, b_hi = p.beta_range
    beta = b_lo + (b_hi - b_lo) * rng.random(p.N)
    agents = [battery_agent(int(a), int(b), p.u_max, float(c), p.T) for a, b, c in zip(s_in, s_max, beta)]
    social = [
        SocialCostBlock.quadratic(alpha[t], target_profile(t, p.target_scale, p.T, p.smooth_target))
        for t in range(p.T)
    ]
    social += [SocialCostBlock.zero(), SocialCostBlock.identity()]
    return OcInstance(p.N, p.T, agents, social, meta={"scenario": "battery", "params": p.to_dict()})


def params_of(instance: OcInstance) -> BatteryParams:
    if instance.meta.get("scenario") != "battery":
        raise ValueError("instance was not produced by the battery generator")
    return BatteryParams.from_dict(instance.meta["params"])


def coarse_bounds(params: BatteryParams) -> BoundReport:
    """Constants from parameter ranges alone, without looking at the sampled fleet.

    Charging blocks get diameter ``u_max`` and gradient-Lipschitz constant
    ``2 * alpha_hi``; the terminal block's diameter is the largest possible
    penalty. The zero block contributes nothing.
    """
    p = params
    N, T = p.N, p.T
    d = np.zeros((N, T + 2))
    d[:, :T] = p.u_max
    d[:, T + 1] = p.beta_range[1] * (p.s_max_range[1] - p.s_in_range[0]) ** 2
    two_alpha = 2.0 * p.alpha_range[1]
    L = np.zeros(T + 2)
    Lt = np.zeros(T + 2)
    for t in range(T):
        c = target_profile(t, p.target_scale, T, p.smooth_target)
        L[t] = two_alpha * max(abs(c), abs(p.u_max - c))
        Lt[t] = two_alpha
    L[T + 1] = 1.0
    return BoundReport.from_parts(d, L, Lt)
