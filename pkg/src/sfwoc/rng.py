"""Counter-based random streams.

Draws are addressed rather than consumed: the uniform for (k, j, i) is the
i-th double of a Philox4x64 stream keyed by the master seed with counter
block (0, j, k, 0). Any worker can regenerate any draw, so results do not
depend on scheduling or on how many agents are drawn at once.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def _stream(seed: int, *words: int) -> np.random.Generator:
    counter = [0, 0, 0, 0]
    for pos, w in zip((1, 2, 3), words):
        counter[pos] = int(w) & _MASK64
    return np.random.Generator(np.random.Philox(key=int(seed) & ((1 << 128) - 1), counter=counter))


def uniforms(seed: int, k: int, j: int, n: int) -> np.ndarray:
    """Uniforms on [0, 1) for indices i = 0..n-1 at address (k, j)."""
    return _stream(seed, j, k).random(n)


def bernoulli_matrix(seed: int, k: int, n_samples: int, n_agents: int, p: float) -> np.ndarray:
    """lambda[j, i] ~ Bernoulli(p) for j = 1..n_samples (row j-1) and agents i."""
    out = np.empty((n_samples, n_agents), dtype=bool)
    for j in range(1, n_samples + 1):
        out[j - 1] = uniforms(seed, k, j, n_agents) < p
    return out


def generator(seed: int, purpose: int = 0) -> np.random.Generator:
    """Sequential generator for one-off tasks such as instance sampling."""
    return _stream(seed, 0, 0, purpose + 1)
