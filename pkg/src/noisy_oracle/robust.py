"""Robust oracle circuits F and G, and the whole-algorithm rewrite.

F (on index register Z and target S, S starting in |0^m>):
    R(-pi/4) on every S qubit
    t times: faulty oracle on (Z, S), then R(pi/2t) on every S qubit
    R(-pi/4) on every S qubit

G (adds the real target B): F, CNOT S_i -> B_i, X on S, F, X on S.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Union

import numpy as np

from . import kernels
from .oracles import (
    FaultTrace,
    FaultyOracleConfig,
    TruthTable,
    apply_faulty_oracle,
    oracle_permutation,
    sample_faults,
)
from .rng import substream
from .sim import (
    H_MATRIX,
    X_MATRIX,
    Z_MATRIX,
    ControlledX,
    Gate,
    Gate2x2,
    RegisterLayout,
    SimulationError,
    StateVector,
    apply_gate_inplace,
    diffusion_inplace,
    measure_register,
    new_basis_state,
    rotation_gate,
)

LEVELS = ("F", "G", "multi", "algorithm")


def compute_t(level: str, gamma: float, delta: float, m: int = 1, q: int = 1) -> int:
    """Smallest repetition count meeting the concentration bound for ``level``.

    F:          3/2 pi^2 ln(2/delta) / gamma^2
    G:          6 pi^2 ln(4/delta) / gamma^2
    multi:      6 pi^2 m^2 ln(4/delta) / gamma^2
    algorithm:  6 pi^2 q^2 m^2 ln(4q/delta) / gamma^2
    """
    if not 0 < gamma < math.pi / 2:
        raise ValueError(f"gamma={gamma} outside (0, pi/2)")
    if not 0 < delta <= 0.2:
        raise ValueError(f"delta={delta} outside (0, 1/5]")
    if m < 1 or q < 1:
        raise ValueError("m and q must be positive")
    pi2 = math.pi ** 2
    if level == "F":
        value = 1.5 * pi2 * math.log(2 / delta) / gamma ** 2
    elif level == "G":
        value = 6 * pi2 * math.log(4 / delta) / gamma ** 2
    elif level == "multi":
        value = 6 * pi2 * m ** 2 * math.log(4 / delta) / gamma ** 2
    elif level == "algorithm":
        value = 6 * pi2 * q ** 2 * m ** 2 * math.log(4 * q / delta) / gamma ** 2
    else:
        raise ValueError(f"unknown level {level!r}; expected one of {LEVELS}")
    return math.ceil(value)


@dataclass(frozen=True)
class RobustParams:
    gamma: float
    delta: float
    m: int
    q: int
    t: int

    def __post_init__(self):
        if self.t < compute_t("algorithm", self.gamma, self.delta, self.m, self.q):
            raise ValueError(f"t={self.t} is below the algorithm-level bound")


# ---------------------------------------------------------------------------
# F and G


class _Circuit:
    """Precomputed index maps for F/G on one layout and truth table."""

    def __init__(self, layout: RegisterLayout, f: TruthTable, Z: str, S: str, B: str | None = None):
        self.layout = layout
        self.perm = oracle_permutation(layout, f, Z, S)
        m = layout.width(S)
        self.s_masks = np.array([layout.mask(S, i) for i in range(m)], dtype=np.int64)
        idx = np.arange(layout.dim, dtype=np.int64)
        self.x_perm = idx ^ int(self.s_masks.sum())
        if B is not None:
            if layout.width(B) != m:
                raise SimulationError(f"registers {S} and {B} must have equal width")
            cnot = idx.copy()
            for i in range(m):
                smask = layout.mask(S, i)
                bmask = layout.mask(B, i)
                cnot = np.where(cnot & smask, cnot ^ bmask, cnot)
            self.cnot_perm = cnot

    def inner_rounds(self, amps: np.ndarray, draws: np.ndarray) -> None:
        """The t rounds of (faulty oracle, R(pi/2t)) without the outer rotations."""
        t = len(draws)
        theta = math.pi / (2 * t)
        kernels.oracle_rounds(amps, self.perm, draws, self.s_masks, math.cos(theta), math.sin(theta))

    def F(self, amps: np.ndarray, draws: np.ndarray) -> None:
        c4, s4 = math.cos(-math.pi / 4), math.sin(-math.pi / 4)
        for mask in self.s_masks:
            kernels.rotate(amps, int(mask), c4, s4)
        self.inner_rounds(amps, draws)
        for mask in self.s_masks:
            kernels.rotate(amps, int(mask), c4, s4)

    def G(self, amps: np.ndarray, first: np.ndarray, second: np.ndarray) -> None:
        self.F(amps, first)
        kernels.permute(amps, self.cnot_perm)
        kernels.permute(amps, self.x_perm)
        self.F(amps, second)
        kernels.permute(amps, self.x_perm)


def apply_F(
    state: StateVector,
    f: TruthTable,
    t: int,
    config: FaultyOracleConfig,
    trace: FaultTrace,
    Z: str = "Z",
    S: str = "S",
) -> StateVector:
    """Robust ``O_f`` for a target register starting in ``|0^m>``; consumes t draws."""
    if t < 1:
        raise ValueError("t must be positive")
    circuit = _Circuit(state.layout, f, Z, S)
    draws = sample_faults(config, trace, t)
    out = state.copy()
    circuit.F(out.amplitudes, draws)
    return out


def _scratch_is_clean(state: StateVector, S: str) -> bool:
    values = state.layout.register_values(S)
    return bool(np.sum(np.abs(state.amplitudes[values != 0]) ** 2) < 1e-12)


def apply_G(
    state: StateVector,
    f: TruthTable,
    t: int,
    config: FaultyOracleConfig,
    trace: FaultTrace,
    Z: str = "Z",
    S: str = "S",
    B: str = "B",
    check_scratch: bool = False,
) -> StateVector:
    """Robust ``O_f`` on (Z, B) using scratch S in ``|0^m>``; consumes 2t draws.

    ``check_scratch`` asserts the precondition on S (a simulator-only peek).
    """
    if t < 1:
        raise ValueError("t must be positive")
    if check_scratch and not _scratch_is_clean(state, S):
        raise SimulationError(f"scratch register {S} is not in |0...0>")
    circuit = _Circuit(state.layout, f, Z, S, B)
    first = sample_faults(config, trace, t)
    second = sample_faults(config, trace, t)
    out = state.copy()
    circuit.G(out.amplitudes, first, second)
    return out


# ---------------------------------------------------------------------------
# query algorithms


@dataclass(frozen=True)
class Op:
    """Text-level gate: ``name``, float params, and targets like ``Z``, ``B[0]``."""

    name: str
    params: tuple[float, ...] = ()
    targets: tuple[str, ...] = ()


ORACLE = "oracle"
_QUBIT_GATES = {"x": X_MATRIX, "h": H_MATRIX, "z": Z_MATRIX}


def _parse_target(target: str) -> tuple[str, int | None]:
    if target.endswith("]") and "[" in target:
        name, q = target[:-1].split("[", 1)
        return name, int(q)
    return target, None


def _qubits(layout: RegisterLayout, target: str) -> list[tuple[str, int]]:
    name, q = _parse_target(target)
    if q is not None:
        layout.bit_position(name, q)
        return [(name, q)]
    return [(name, i) for i in range(layout.width(name))]


def apply_op_inplace(state: StateVector, op: Union[Op, Gate]) -> None:
    if not isinstance(op, Op):
        apply_gate_inplace(state, op)
        return
    layout = state.layout
    if op.name in _QUBIT_GATES:
        for reg, q in (qq for tgt in op.targets for qq in _qubits(layout, tgt)):
            apply_gate_inplace(state, Gate2x2(_QUBIT_GATES[op.name], reg, q))
    elif op.name == "rot":
        (theta,) = op.params
        for reg, q in (qq for tgt in op.targets for qq in _qubits(layout, tgt)):
            apply_gate_inplace(state, rotation_gate(theta, reg, q))
    elif op.name == "cnot":
        control, target = (_qubits(layout, tgt) for tgt in op.targets)
        if len(control) != 1 or len(target) != 1:
            raise SimulationError("cnot needs single-qubit control and target")
        apply_gate_inplace(state, ControlledX(control[0], target[0]))
    elif op.name == "diffusion":
        for tgt in op.targets:
            diffusion_inplace(state, tgt)
    else:
        raise SimulationError(f"unknown gate {op.name!r}")


@dataclass
class QueryAlgorithm:
    """``U_q O U_{q-1} ... O U_0`` on registers Z, B, T; ``blocks[i]`` is U_i."""

    layout: RegisterLayout
    blocks: list[list[Union[Op, Gate]]]
    measure: str = "Z"

    def __post_init__(self):
        for name in ("Z", "B"):
            self.layout.width(name)
        self.layout.width(self.measure)
        if not self.blocks:
            raise ValueError("an algorithm needs at least the block U_0")

    @property
    def q(self) -> int:
        return len(self.blocks) - 1

    def dumps(self) -> str:
        widths = " ".join(f"{name}={w}" for name, w in self.layout.registers)
        lines = [f"registers {widths}; measure {self.measure}"]
        for i, block in enumerate(self.blocks):
            if i:
                lines.append(ORACLE)
            for op in block:
                if not isinstance(op, Op):
                    raise ValueError("only text-level ops can be serialized")
                params = ",".join(repr(float(p)) for p in op.params) or "-"
                lines.append(" ".join(["gate", op.name, params, *op.targets]))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "QueryAlgorithm":
        lines = [(n, ln.strip()) for n, ln in enumerate(text.splitlines(), 1)]
        lines = [(n, ln) for n, ln in lines if ln and not ln.startswith("#")]
        if not lines:
            raise ValueError("empty algorithm file")
        n0, header = lines[0]
        if not header.startswith("registers ") or "; measure " not in header:
            raise ValueError(f"line {n0}: expected 'registers Z=<w> B=<w> T=<w>; measure <reg>'")
        regs_part, measure = header[len("registers "):].split("; measure ", 1)
        registers = []
        for item in regs_part.split():
            name, w = item.split("=")
            registers.append((name, int(w)))
        blocks: list[list[Union[Op, Gate]]] = [[]]
        for n, line in lines[1:]:
            parts = line.split()
            if parts == [ORACLE]:
                blocks.append([])
            elif parts[0] == "gate" and len(parts) >= 3:
                params = () if parts[2] == "-" else tuple(float(p) for p in parts[2].split(","))
                blocks[-1].append(Op(parts[1], params, tuple(parts[3:])))
            else:
                raise ValueError(f"line {n}: cannot parse {line!r}")
        return cls(RegisterLayout(registers), blocks, measure.strip())

    @classmethod
    def load(cls, path: Union[str, Path]) -> "QueryAlgorithm":
        return cls.loads(Path(path).read_text())

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.dumps())


@dataclass
class RobustAlgorithm:
    """The algorithm with each oracle call replaced by a G block on scratch S."""

    base: QueryAlgorithm
    params: RobustParams
    layout: RegisterLayout = field(init=False)

    def __post_init__(self):
        self.layout = self.base.layout.extend("S", self.params.m)

    @property
    def q(self) -> int:
        return self.base.q

    @property
    def t(self) -> int:
        return self.params.t

    @property
    def measure(self) -> str:
        return self.base.measure

    @property
    def draws_per_run(self) -> int:
        return 2 * self.params.t * self.q


def robustify(algo: QueryAlgorithm, gamma: float = 0.1, delta: float = 0.1) -> Union[QueryAlgorithm, RobustAlgorithm]:
    if algo.q == 0:
        return algo
    m = algo.layout.width("B")
    t = compute_t("algorithm", gamma, delta, m, algo.q)
    return RobustAlgorithm(algo, RobustParams(gamma, delta, m, algo.q, t))


@dataclass
class RunOutcome:
    state: StateVector
    trace: FaultTrace
    outcome: str | None


def _initial_state(layout: RegisterLayout, inputs) -> StateVector:
    if isinstance(inputs, StateVector):
        return inputs
    return new_basis_state(layout, inputs or {})


def evolve(
    algo: Union[QueryAlgorithm, RobustAlgorithm],
    f: TruthTable,
    inputs: Union[Mapping[str, str], StateVector, None] = None,
    config: FaultyOracleConfig | None = None,
    trace: FaultTrace | None = None,
) -> tuple[StateVector, FaultTrace]:
    """Apply the unitary sequence without measuring.

    A plain algorithm uses fault-free oracles unless ``config`` is given, in
    which case every call is a single faulty oracle call.  A robust algorithm
    always draws from ``config`` (default: p=1/2 with reduction).
    """
    trace = trace if trace is not None else FaultTrace(0 if config is None or config.seed is None else config.seed)
    if isinstance(algo, RobustAlgorithm):
        base = algo.base
        config = config or FaultyOracleConfig(f, 0.5)
        state = _initial_state(algo.layout, inputs)
        if state.layout.registers != algo.layout.registers:
            state = lift_to_scratch(state, algo.params.m)
        else:
            state = state.copy()
        circuit = _Circuit(algo.layout, f, "Z", "S", "B")
        t = algo.t
        for i, block in enumerate(base.blocks):
            if i:
                first = sample_faults(config, trace, t)
                second = sample_faults(config, trace, t)
                circuit.G(state.amplitudes, first, second)
            for op in block:
                apply_op_inplace(state, op)
        return state, trace

    state = _initial_state(algo.layout, inputs).copy()
    perm = oracle_permutation(algo.layout, f, "Z", "B")
    for i, block in enumerate(algo.blocks):
        if i:
            if config is None:
                kernels.permute(state.amplitudes, perm)
            else:
                state = apply_faulty_oracle(state, f, "Z", "B", config, trace)
        for op in block:
            apply_op_inplace(state, op)
    return state, trace


def run(
    algo: Union[QueryAlgorithm, RobustAlgorithm],
    f: TruthTable,
    inputs: Union[Mapping[str, str], StateVector, None] = None,
    config: FaultyOracleConfig | None = None,
    seed: int = 0,
    trace: FaultTrace | None = None,
) -> RunOutcome:
    """Evolve, then measure the designated register; S is never measured."""
    trace = trace if trace is not None else FaultTrace(seed, "faults")
    state, trace = evolve(algo, f, inputs, config, trace)
    outcome, _ = measure_register(state, algo.measure, substream(seed, "measure"))
    return RunOutcome(state, trace, outcome)


def grover_algorithm(n: int, iterations: int) -> QueryAlgorithm:
    """Grover search on n index qubits with the bit oracle and B prepared in |->."""
    layout = RegisterLayout([("Z", n), ("B", 1), ("T", 0)])
    prep = [Op("h", (), ("Z",)), Op("x", (), ("B[0]",)), Op("h", (), ("B[0]",))]
    blocks: list[list[Union[Op, Gate]]] = [prep]
    for _ in range(iterations):
        blocks.append([Op("diffusion", (), ("Z",))])
    return QueryAlgorithm(layout, blocks, "Z")


def lift_to_scratch(state: StateVector, m: int, name: str = "S") -> StateVector:
    """``|phi> -> |phi>|0^m>`` with S appended as the last register."""
    layout = state.layout.extend(name, m)
    return StateVector(layout, np.kron(state.amplitudes, np.eye(1, 1 << m, 0).ravel()))
