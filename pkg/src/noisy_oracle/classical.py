"""Classical OR under a one-sided noisy bit oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .oracles import classical_noisy_query
from .rng import substream


@dataclass(frozen=True)
class ClassicalNoisyConfig:
    n: int
    alpha: float
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha={self.alpha} outside (0, 1]")


def repetitions(alpha: float) -> int:
    """Queries per index so a lone 1 is missed with probability <= 1/10."""
    return math.ceil(math.log(10) / alpha)


def noisy_or_upper(x: Sequence[int], alpha: float, seed: int, *key) -> tuple[int, int]:
    """(answer, queries used).  Never errs on the all-zero input."""
    ClassicalNoisyConfig(len(x), alpha, seed)
    rng = substream(seed, "noisy-or", *key)
    reps = repetitions(alpha)
    queries = 0
    for i in range(len(x)):
        for _ in range(reps):
            queries += 1
            if classical_noisy_query(x, i, alpha, rng):
                return 1, queries
    return 0, queries


def all_zero_product(n: int, alpha: Fraction | float, T: int) -> Fraction | float:
    """``prod_{k=1}^{T} (1 - alpha / (n - k + 1))``.

    This chain treats every 0 answer as ruling its index out, which is only
    true when alpha = 1.  For alpha < 1 it undershoots
    :func:`all_zero_exact`; the two agree for T <= 1.
    """
    if not 0 <= T <= n:
        raise ValueError(f"T={T} must lie in [0, n={n}]")
    out = Fraction(1) if isinstance(alpha, Fraction) else 1.0
    for k in range(1, T + 1):
        out *= 1 - alpha / (n - k + 1)
    return out


def all_zero_exact(n: int, alpha: Fraction | float, T: int) -> Fraction | float:
    """Chance that T distinct queries of a uniformly placed single 1 all return 0.

    Given k-1 zeros so far, the 1 sits at the next index with probability
    ``1 / (n - alpha (k-1))``; the chain telescopes to ``1 - alpha T / n``.
    """
    if not 0 <= T <= n:
        raise ValueError(f"T={T} must lie in [0, n={n}]")
    out = Fraction(1) if isinstance(alpha, Fraction) else 1.0
    for k in range(1, T + 1):
        out *= 1 - alpha / (n - alpha * (k - 1))
    return out


def noisy_or_lower_experiment(n: int, alpha: float, T: int, trials: int, seed: int) -> tuple[float, float]:
    """(empirical Pr[all T answers are 0], bound ``1 - alpha T / n``).

    Each trial places a single 1 uniformly at random and queries indices
    0..T-1 once each.
    """
    ClassicalNoisyConfig(n, alpha, seed)
    if not 0 <= T <= n:
        raise ValueError(f"T={T} must lie in [0, n={n}]")
    if trials < 1:
        raise ValueError("trials must be positive")
    rng = substream(seed, "or-lower", n, T)
    zeros = 0
    x = np.zeros(n, dtype=np.int8)
    for _ in range(trials):
        hot = int(rng.integers(n))
        x[hot] = 1
        if not any(classical_noisy_query(x, i, alpha, rng) for i in range(T)):
            zeros += 1
        x[hot] = 0
    return zeros / trials, 1 - alpha * T / n
