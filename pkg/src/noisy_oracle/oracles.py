"""Oracle models: fault-free bit oracle, faulty oracle, addition/phase oracles.

The faulty oracle is sampled as a unitary trajectory.  Each invocation reads
two uniforms from a :class:`FaultTrace`: the first decides the optional
error-rate reduction skip, the second the oracle's own fault.  Reading both
per invocation keeps draw ``k`` a function of (seed, k) alone, whether draws
are taken one at a time or in blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .rng import substream
from .sim import RegisterLayout, SimulationError, StateVector

Rational = Union[float, Fraction]


class TraceExhausted(RuntimeError):
    """A replayed fault trace ran out of recorded draws."""


@dataclass(frozen=True)
class TruthTable:
    """Explicit ``f: {0,1}^n -> {0,1}^m``; ``table[z]`` is ``f(z)`` as an integer."""

    n: int
    m: int
    table: tuple[int, ...]

    def __post_init__(self):
        table = tuple(int(v) for v in self.table)
        if len(table) != 1 << self.n:
            raise ValueError(f"truth table needs {1 << self.n} entries, got {len(table)}")
        for v in table:
            if not 0 <= v < (1 << self.m):
                raise ValueError(f"output {v} does not fit in {self.m} bits")
        object.__setattr__(self, "table", table)

    def __call__(self, z: Union[int, str]) -> int:
        if isinstance(z, str):
            z = int(z, 2) if z else 0
        return self.table[z]

    @classmethod
    def marked(cls, n: int, marked: Sequence[int], m: int = 1) -> "TruthTable":
        """Boolean-style table with output ``2^m - 1`` on ``marked`` and 0 elsewhere."""
        table = [0] * (1 << n)
        for k in marked:
            table[k] = (1 << m) - 1
        return cls(n, m, table)

    @classmethod
    def random(cls, n: int, m: int, rng: np.random.Generator) -> "TruthTable":
        return cls(n, m, rng.integers(0, 1 << m, size=1 << n).tolist())

    def bit(self, i: int) -> "TruthTable":
        """Boolean function giving bit ``i`` (0 = most significant) of the output."""
        shift = self.m - 1 - i
        return TruthTable(self.n, 1, [(v >> shift) & 1 for v in self.table])

    def dumps(self) -> str:
        lines = []
        for z, v in enumerate(self.table):
            zbits = format(z, f"0{self.n}b") if self.n else ""
            mbits = format(v, f"0{self.m}b") if self.m else ""
            lines.append(f"{zbits} -> {mbits}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "TruthTable":
        rows = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "->" not in line:
                raise ValueError(f"line {lineno}: expected 'zbits -> mbits'")
            left, right = (part.strip() for part in line.split("->", 1))
            if any(ch not in "01" for ch in left + right):
                raise ValueError(f"line {lineno}: non-binary characters")
            rows.append((lineno, left, right))
        if not rows:
            raise ValueError("empty truth table")
        n, m = len(rows[0][1]), len(rows[0][2])
        table = []
        for expected, (lineno, left, right) in enumerate(rows):
            if len(left) != n or len(right) != m:
                raise ValueError(f"line {lineno}: inconsistent widths")
            if (int(left, 2) if n else 0) != expected:
                raise ValueError(f"line {lineno}: inputs must be listed in lexicographic order without gaps")
            table.append(int(right, 2) if m else 0)
        if len(table) != 1 << n:
            raise ValueError(f"truth table is incomplete: {len(table)} of {1 << n} inputs")
        return cls(n, m, table)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "TruthTable":
        return cls.loads(Path(path).read_text())

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.dumps())


class FaultTrace:
    """Recorded apply/skip draws of a faulty oracle.

    Built from a seed it draws fresh values; built from ``replay`` it hands
    back the given pattern and raises :class:`TraceExhausted` past its end.
    """

    def __init__(self, seed: int | None = None, *key, replay: Sequence[bool] | None = None):
        self.seed = seed
        self.key = key
        self._replay = None if replay is None else np.asarray(replay, dtype=bool)
        self._rng = None if replay is not None else substream(0 if seed is None else seed, *key)
        self._chunks: list[np.ndarray] = []
        self.counter = 0

    @property
    def draws(self) -> np.ndarray:
        if not self._chunks:
            return np.zeros(0, dtype=bool)
        return np.concatenate(self._chunks)

    def __len__(self) -> int:
        return self.counter

    def _take(self, n: int, skip_prob: float, fault_prob: float) -> np.ndarray:
        if self._replay is not None:
            if self.counter + n > len(self._replay):
                raise TraceExhausted(
                    f"replay trace has {len(self._replay)} draws, {self.counter + n} requested"
                )
            out = self._replay[self.counter:self.counter + n].copy()
        else:
            u = self._rng.random((n, 2))
            out = (u[:, 0] >= skip_prob) & (u[:, 1] >= fault_prob)
        self._chunks.append(out)
        self.counter += n
        return out


@dataclass(frozen=True)
class FaultyOracleConfig:
    """Faulty oracle with error rate ``p``.

    With ``reduce=True`` and ``p <= 1/2`` the caller additionally skips the
    oracle with probability :func:`reduce_error_rate` so the composite error
    rate is exactly 1/2.
    """

    table: TruthTable
    p: float
    reduce: bool = True
    seed: int | None = None

    def __post_init__(self):
        if not 0.0 <= float(self.p) <= 1.0:
            raise ValueError(f"error rate p={self.p} outside [0, 1]")

    @property
    def skip_prob(self) -> float:
        if self.reduce and self.p <= 0.5:
            return float(reduce_error_rate(self.p))
        return 0.0

    @property
    def effective_rate(self) -> float:
        return 0.5 if (self.reduce and self.p <= 0.5) else float(self.p)

    def new_trace(self, *key) -> FaultTrace:
        return FaultTrace(self.seed, *key)


def reduce_error_rate(p: Rational) -> Rational:
    """Skip probability that lifts an error rate ``p <= 1/2`` to exactly 1/2."""
    if p > Fraction(1, 2) or p < 0:
        raise ValueError(f"error rate reduction needs 0 <= p <= 1/2, got {p}")
    if isinstance(p, Fraction):
        return 1 - Fraction(1, 2) / (1 - p)
    return 1.0 - 1.0 / (2.0 * (1.0 - p))


def sample_fault(config: FaultyOracleConfig, trace: FaultTrace) -> bool:
    """One composite draw; ``True`` means the oracle is applied."""
    return bool(sample_faults(config, trace, 1)[0])


def sample_faults(config: FaultyOracleConfig, trace: FaultTrace, count: int) -> np.ndarray:
    return trace._take(count, config.skip_prob, float(config.p))


# ---------------------------------------------------------------------------
# bit oracle


def _check_widths(layout: RegisterLayout, f: TruthTable, Z: str, B: str) -> None:
    if layout.width(Z) != f.n:
        raise SimulationError(f"register {Z} has width {layout.width(Z)}, truth table needs {f.n}")
    if layout.width(B) != f.m:
        raise SimulationError(f"register {B} has width {layout.width(B)}, truth table needs {f.m}")


def oracle_permutation(layout: RegisterLayout, f: TruthTable, Z: str = "Z", B: str = "B") -> np.ndarray:
    """Index map of ``|z, b> -> |z, b xor f(z)>``; an involution."""
    _check_widths(layout, f, Z, B)
    idx = np.arange(layout.dim, dtype=np.int64)
    fz = np.asarray(f.table, dtype=np.int64)[layout.register_values(Z)]
    return idx ^ (fz << layout.offset(B))


def apply_standard_oracle(state: StateVector, f: TruthTable, Z: str = "Z", B: str = "B") -> StateVector:
    perm = oracle_permutation(state.layout, f, Z, B)
    return StateVector(state.layout, state.amplitudes[perm])


def apply_faulty_oracle(
    state: StateVector,
    f: TruthTable,
    Z: str,
    B: str,
    config: FaultyOracleConfig,
    trace: FaultTrace,
) -> StateVector:
    _check_widths(state.layout, f, Z, B)
    if sample_fault(config, trace):
        return apply_standard_oracle(state, f, Z, B)
    return state.copy()


# ---------------------------------------------------------------------------
# addition and phase oracles


def counter_width(modulus: int) -> int:
    return max(1, math.ceil(math.log2(modulus)))


def apply_addition_oracle(
    state: StateVector,
    k: int,
    modulus: int,
    register: str,
    draw: bool = True,
    index_register: str = "Z",
) -> StateVector:
    """``|k>|b> -> |k>|b+1 mod modulus>``, identity on other indices or when skipped."""
    layout = state.layout
    if modulus < 1 or (1 << layout.width(register)) < modulus:
        raise SimulationError(f"register {register} cannot hold integers mod {modulus}")
    values = layout.register_values(register)
    out_of_range = values >= modulus
    if np.any(np.abs(state.amplitudes[out_of_range]) > 1e-12):
        raise SimulationError(f"register {register} has amplitude on values >= {modulus}")
    if not draw:
        return state.copy()
    idx = np.arange(layout.dim, dtype=np.int64)
    hit = (layout.register_values(index_register) == k) & ~out_of_range
    shift = layout.offset(register)
    new_values = (values + 1) % modulus
    dest = np.where(hit, (idx & ~(((1 << layout.width(register)) - 1) << shift)) | (new_values << shift), idx)
    amps = np.empty_like(state.amplitudes)
    amps[dest] = state.amplitudes
    return StateVector(layout, amps)


def apply_phase_oracle(state: StateVector, k: int, r: int, draw: bool = True, register: str = "Z") -> StateVector:
    """Multiply the ``|k>`` component by ``exp(i pi / r)`` when applied."""
    if r < 1:
        raise ValueError(f"phase oracle needs r >= 1, got {r}")
    out = state.copy()
    if draw:
        hit = state.layout.register_values(register) == k
        out.amplitudes[hit] *= np.exp(1j * math.pi / r)
    return out


def phase_ancilla(r: int) -> np.ndarray:
    """``(1/sqrt(2r)) sum_j exp(-i pi j / r) |j>`` padded to a power-of-two length."""
    width = counter_width(2 * r)
    j = np.arange(2 * r)
    vec = np.zeros(1 << width, dtype=np.complex128)
    vec[: 2 * r] = np.exp(-1j * math.pi * j / r) / math.sqrt(2 * r)
    return vec


def phase_from_addition(
    state: StateVector, k: int, r: int, draw: bool = True, register: str = "Z", tol: float = 1e-10
) -> StateVector:
    """Realize the phase oracle with one addition-oracle call on a phased counter."""
    ancilla = phase_ancilla(r)
    name = "_counter"
    layout = state.layout.extend(name, counter_width(2 * r))
    joint = StateVector(layout, np.kron(state.amplitudes, ancilla))
    joint = apply_addition_oracle(joint, k, 2 * r, name, draw, index_register=register)
    block = joint.amplitudes.reshape(state.layout.dim, ancilla.shape[0])
    main = block @ ancilla.conj()
    residual = np.max(np.abs(block - np.outer(main, ancilla)), initial=0.0)
    if residual > tol:
        raise SimulationError(f"counter register did not factor out (residual {residual:.3g})")
    return StateVector(state.layout, main)


# ---------------------------------------------------------------------------
# classical one-sided noisy query


def classical_noisy_query(x: Sequence[int], i: int, alpha: float, rng: np.random.Generator) -> int:
    """Returns 1 with probability ``alpha`` when ``x[i] == 1``, otherwise 0."""
    if not 0 <= i < len(x):
        raise IndexError(f"query index {i} out of range for input of length {len(x)}")
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha={alpha} outside (0, 1]")
    if x[i]:
        return int(rng.random() < alpha)
    return 0
