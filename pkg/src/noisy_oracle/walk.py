"""Random-walk model of the inner F loop.

Angles are kept as signed integers ``k``: the current target-qubit state sits
at ``k * pi/(2t)`` from ``|+>``, positive toward ``|1>``.  One round with the
oracle succeeding reflects about ``|+>`` (``k -> -k``); every round then
rotates clockwise by one unit (``k -> k - 1``).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .oracles import TruthTable
from .rng import substream
from .robust import _Circuit
from .sim import RegisterLayout, StateVector, angle_difference, product_state

MAX_ENUM_T = 12


@dataclass(frozen=True)
class WalkState:
    units: int = 0
    steps: int = 0
    t: int = 1

    @property
    def angle(self) -> float:
        return self.units * math.pi / (2 * self.t)

    @property
    def on_right(self) -> bool:
        # |+> itself counts as the right side
        return self.units <= 0


def geometric_step(walk: WalkState, success: bool, t: int | None = None) -> WalkState:
    t = walk.t if t is None else t
    if t < 1:
        raise ValueError("t must be positive")
    k = -walk.units if success else walk.units
    return WalkState(k - 1, walk.steps + 1, t)


def geometric_walk(pattern: Sequence[bool], t: int | None = None) -> WalkState:
    t = len(pattern) if t is None else t
    w = WalkState(0, 0, t)
    for success in pattern:
        w = geometric_step(w, bool(success))
    return w


def step_labels(pattern: Sequence[bool]) -> list[str]:
    """Labels rf/rs/lf/ls of a success pattern, taking the side before each step."""
    t = len(pattern)
    w = WalkState(0, 0, t)
    labels = []
    for success in pattern:
        labels.append(("r" if w.on_right else "l") + ("s" if success else "f"))
        w = geometric_step(w, bool(success))
    return labels


def label_increments(labels: Iterable[str]) -> list[int]:
    """+1 for rf/ls, -1 for rs/lf."""
    return [1 if lab in ("rf", "ls") else -1 for lab in labels]


def walk_phi_from_x(xs: Sequence[int], t: int) -> float:
    if len(xs) != t:
        raise ValueError(f"expected {t} increments, got {len(xs)}")
    return math.pi / (2 * t) * abs(sum(xs))


def enumerate_distribution(t: int, mode: str = "geometric") -> dict[int, Fraction]:
    """Exact law of the final ``|k|`` over all 2^t equiprobable patterns.

    ``geometric`` runs the reflection/rotation recurrence, ``walk`` takes
    ``|sum x_i|`` with ``x_i = +1`` for a true pattern bit and ``-1`` otherwise,
    ``labeled`` takes ``|sum x_i|`` from the rf/rs/lf/ls labeling.
    """
    if not 1 <= t <= MAX_ENUM_T:
        raise ValueError(f"enumeration supports 1 <= t <= {MAX_ENUM_T}, got {t}")
    counts: dict[int, int] = {}
    for pattern in itertools.product((False, True), repeat=t):
        if mode == "geometric":
            value = abs(geometric_walk(pattern).units)
        elif mode == "walk":
            value = abs(sum(1 if b else -1 for b in pattern))
        elif mode == "labeled":
            value = abs(sum(label_increments(step_labels(pattern))))
        else:
            raise ValueError(f"unknown mode {mode!r}")
        counts[value] = counts.get(value, 0) + 1
    total = 1 << t
    return {k: Fraction(v, total) for k, v in sorted(counts.items())}


def chernoff_threshold(t: int, delta: float) -> float:
    """``sqrt(6 t ln(2/delta))``: |sum of t fair +-1 steps| stays below it w.p. >= 1 - delta."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if not 0 < delta <= 2:
        raise ValueError(f"delta={delta} outside (0, 2]")
    return math.sqrt(6 * t * math.log(2 / delta))


def sample_walk_sums(t: int, trials: int, rng: np.random.Generator, chunk: int = 4096) -> np.ndarray:
    """Sums of t independent fair +-1 steps, one per trial."""
    out = np.empty(trials, dtype=np.int64)
    for start in range(0, trials, chunk):
        n = min(chunk, trials - start)
        steps = rng.random((n, t)) < 0.5
        out[start:start + n] = 2 * steps.sum(axis=1) - t
    return out


def chernoff_tail(t: int, delta: float, trials: int, seed: int) -> float:
    """Empirical ``Pr[|sum X_i| >= chernoff_threshold(t, delta)]``."""
    sums = sample_walk_sums(t, trials, substream(seed, "chernoff", t))
    return float(np.mean(np.abs(sums) >= chernoff_threshold(t, delta)))


def sample_geometric_units(t: int, trials: int, rng: np.random.Generator) -> np.ndarray:
    k = np.zeros(trials, dtype=np.int64)
    for _ in range(t):
        success = rng.random(trials) < 0.5
        k = np.where(success, -k, k) - 1
    return k


def montecarlo_tail(t: int, gamma: float, trials: int, seed: int) -> float:
    """Fraction of seeded geometric walks ending with ``|angle| > gamma``."""
    if trials < 1:
        raise ValueError("trials must be positive")
    k = sample_geometric_units(t, trials, substream(seed, "geometric-tail"))
    return float(np.mean(np.abs(k) * math.pi / (2 * t) > gamma))


def plus_state(n: int, z: int) -> StateVector:
    layout = RegisterLayout([("Z", n), ("S", 1)])
    zvec = np.zeros(1 << n)
    zvec[z] = 1.0
    return product_state(layout, {"Z": zvec, "S": np.array([1.0, 1.0]) / math.sqrt(2)})


def circuit_vs_walk_check(t: int, f: TruthTable | None = None, z: int | None = None) -> float:
    """Max over all 2^t fault patterns of |circuit angle - geometric angle|.

    The circuit side runs the inner F rounds on ``|z,+>`` and measures the
    angle to ``|z,+>``; the other side is :func:`geometric_walk`.
    """
    if not 1 <= t <= MAX_ENUM_T:
        raise ValueError(f"t must be in [1, {MAX_ENUM_T}]")
    if f is None:
        f = TruthTable.marked(2, [2])
    if z is None:
        z = next(i for i, v in enumerate(f.table) if v)
    if f.m != 1 or f(z) != 1:
        raise ValueError("the probed input must have f(z) = 1 with a single output bit")
    start = plus_state(f.n, z)
    circuit = _Circuit(start.layout, f, "Z", "S")
    zbits = format(z, f"0{f.n}b")
    worst = 0.0
    for pattern in itertools.product((False, True), repeat=t):
        state = start.copy()
        circuit.inner_rounds(state.amplitudes, np.array(pattern))
        circuit_angle = angle_difference(state, start, zbits)
        walk_angle = abs(geometric_walk(pattern).angle)
        worst = max(worst, abs(circuit_angle - walk_angle))
    return worst


def distribution_rows(dist: dict[int, Fraction]) -> list[tuple[int, int, int]]:
    return [(k, p.numerator, p.denominator) for k, p in dist.items()]
