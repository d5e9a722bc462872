"""Separable convex social costs f(y) = sum_t f_t(y_t) on the aggregate space.

Every supported block kind is written in the common form

    f_t(y) = a_t * (y - c_t)**2 + b_t * y

with ``a_t = alpha`` and ``c_t = target`` for quadratic blocks and
``b_t = weight`` (linear), ``1`` (identity) or ``0`` (zero) otherwise.
Values, gradients and Lipschitz constants all come from that form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InstanceMismatchError

KINDS = ("quadratic", "linear", "identity", "zero")


@dataclass(frozen=True)
class SocialCostBlock:
    """One scalar block f_t of the social cost."""

    kind: str
    alpha: float = 0.0
    target: float = 0.0
    weight: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown social cost kind {self.kind!r}")

    @classmethod
    def quadratic(cls, alpha: float, target: float = 0.0) -> "SocialCostBlock":
        return cls("quadratic", alpha=float(alpha), target=float(target))

    @classmethod
    def linear(cls, weight: float) -> "SocialCostBlock":
        return cls("linear", weight=float(weight))

    @classmethod
    def identity(cls) -> "SocialCostBlock":
        return cls("identity")

    @classmethod
    def zero(cls) -> "SocialCostBlock":
        return cls("zero")

    @property
    def curvature(self) -> float:
        return self.alpha if self.kind == "quadratic" else 0.0

    @property
    def center(self) -> float:
        return self.target if self.kind == "quadratic" else 0.0

    @property
    def slope(self) -> float:
        if self.kind == "linear":
            return self.weight
        if self.kind == "identity":
            return 1.0
        return 0.0

    def value(self, y: float) -> float:
        return self.curvature * (y - self.center) ** 2 + self.slope * y

    def derivative(self, y: float) -> float:
        return 2.0 * self.curvature * (y - self.center) + self.slope

    def lipschitz(self, lo: float, hi: float) -> float:
        """Lipschitz constant of the block on the interval [lo, hi]."""
        if self.kind == "quadratic":
            return 2.0 * self.alpha * max(abs(lo - self.target), abs(hi - self.target))
        return abs(self.slope)

    def grad_lipschitz(self) -> float:
        return 2.0 * self.curvature

    def to_dict(self) -> dict:
        if self.kind == "quadratic":
            return {"kind": "quadratic", "alpha": self.alpha, "target": self.target}
        if self.kind == "linear":
            return {"kind": "linear", "weight": self.weight}
        return {"kind": self.kind}

    @classmethod
    def from_dict(cls, data: dict) -> "SocialCostBlock":
        kind = data["kind"]
        if kind == "quadratic":
            return cls.quadratic(data["alpha"], data.get("target", 0.0))
        if kind == "linear":
            return cls.linear(data["weight"])
        return cls(kind)


class SocialCost:
    """Vectorised evaluation of a tuple of blocks.

    ``value`` and ``gradient`` accept arrays whose last axis indexes blocks,
    so a stack of candidate aggregates is evaluated in one call.
    """

    def __init__(self, blocks: Sequence[SocialCostBlock]):
        self.blocks = tuple(blocks)
        self.curvature = np.array([b.curvature for b in self.blocks], dtype=float)
        self.center = np.array([b.center for b in self.blocks], dtype=float)
        self.slope = np.array([b.slope for b in self.blocks], dtype=float)

    def __len__(self):
        return len(self.blocks)

    def _check(self, y):
        y = np.asarray(y, dtype=float)
        if y.shape[-1:] != (len(self.blocks),):
            raise InstanceMismatchError(
                f"aggregate has {y.shape[-1] if y.ndim else 0} blocks, expected {len(self.blocks)}"
            )
        return y

    def terms(self, y) -> np.ndarray:
        y = self._check(y)
        return self.curvature * (y - self.center) ** 2 + self.slope * y

    def value(self, y):
        return self.terms(y).sum(axis=-1)

    def gradient(self, y) -> np.ndarray:
        y = self._check(y)
        return 2.0 * self.curvature * (y - self.center) + self.slope


def evaluate_social(social: SocialCost | Sequence[SocialCostBlock], y) -> float:
    """Total social cost sum_t f_t(y_t)."""
    if not isinstance(social, SocialCost):
        social = SocialCost(social)
    return float(social.value(y))


def gradient(social: SocialCost | Sequence[SocialCostBlock], y) -> np.ndarray:
    """Blockwise derivative of the social cost; this is the price vector of the oracle."""
    if not isinstance(social, SocialCost):
        social = SocialCost(social)
    return social.gradient(y)
