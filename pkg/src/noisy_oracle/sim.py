"""Dense state-vector engine: registers, gates, measurement and distances.

Bit convention: the first register in a layout holds the most significant
bits of the basis index, and inside a register local qubit 0 is the most
significant bit.  A register holding bitstring ``"011"`` therefore contributes
the integer ``0b011`` shifted by the total width of the registers after it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from . import kernels

MAX_QUBITS = 24
MAX_DENSITY_QUBITS = 10
NORM_TOL = 1e-12
UNITARY_TOL = 1e-12
REAL_TOL = 1e-9
HERMITIAN_TOL = 1e-10


class SimulationError(ValueError):
    """Invalid register, gate or state passed to the simulator."""


@dataclass(frozen=True)
class RegisterLayout:
    registers: tuple[tuple[str, int], ...]
    max_qubits: int = MAX_QUBITS

    def __init__(self, registers: Sequence[tuple[str, int]], max_qubits: int = MAX_QUBITS):
        regs = tuple((str(name), int(width)) for name, width in registers)
        names = [name for name, _ in regs]
        if len(set(names)) != len(names):
            raise SimulationError(f"duplicate register names in {names}")
        for name, width in regs:
            if width < 0:
                raise SimulationError(f"register {name} has negative width {width}")
        total = sum(w for _, w in regs)
        if total > max_qubits:
            raise SimulationError(f"layout needs {total} qubits, cap is {max_qubits}")
        object.__setattr__(self, "registers", regs)
        object.__setattr__(self, "max_qubits", max_qubits)

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.registers]

    @property
    def total(self) -> int:
        return sum(w for _, w in self.registers)

    @property
    def dim(self) -> int:
        return 1 << self.total

    def width(self, register: str) -> int:
        for name, w in self.registers:
            if name == register:
                return w
        raise SimulationError(f"unknown register {register!r}")

    def offset(self, register: str) -> int:
        """Bit position (from the least significant end) of the register's lowest bit."""
        self.width(register)
        off = 0
        for name, w in reversed(self.registers):
            if name == register:
                return off
            off += w
        raise AssertionError("unreachable")

    def bit_position(self, register: str, qubit: int) -> int:
        w = self.width(register)
        if not 0 <= qubit < w:
            raise SimulationError(f"qubit {qubit} out of range for register {register} of width {w}")
        return self.offset(register) + (w - 1 - qubit)

    def mask(self, register: str, qubit: int) -> int:
        return 1 << self.bit_position(register, qubit)

    def register_values(self, register: str) -> np.ndarray:
        """Value of ``register`` at every basis index, as an int64 array."""
        w = self.width(register)
        idx = np.arange(self.dim, dtype=np.int64)
        return (idx >> self.offset(register)) & ((1 << w) - 1)

    def extend(self, name: str, width: int) -> "RegisterLayout":
        return RegisterLayout(list(self.registers) + [(name, width)], self.max_qubits)

    def encode(self, assignments: Mapping[str, Union[str, int]]) -> int:
        index = 0
        for register, value in assignments.items():
            w = self.width(register)
            if isinstance(value, str):
                if len(value) != w or any(ch not in "01" for ch in value):
                    raise SimulationError(
                        f"bitstring {value!r} does not match width {w} of register {register}"
                    )
                v = int(value, 2) if w else 0
            else:
                v = int(value)
                if not 0 <= v < (1 << w):
                    raise SimulationError(f"value {v} does not fit register {register} of width {w}")
            index |= v << self.offset(register)
        return index


@dataclass
class StateVector:
    layout: RegisterLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.layout.dim,):
            raise SimulationError(
                f"amplitude vector of shape {amps.shape} does not match layout dimension {self.layout.dim}"
            )
        self.amplitudes = amps

    def copy(self) -> "StateVector":
        return StateVector(self.layout, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: "StateVector") -> complex:
        """``<self|other>``."""
        _same_layout(self, other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def tensor(self) -> np.ndarray:
        """View the amplitudes as an array with one axis per register."""
        return self.amplitudes.reshape([1 << w for _, w in self.layout.registers])


@dataclass(frozen=True)
class Gate2x2:
    matrix: np.ndarray
    register: str
    qubit: int = 0

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (2, 2):
            raise SimulationError("Gate2x2 needs a 2x2 matrix")
        _check_unitary(m)
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class ControlledX:
    control: tuple[str, int]
    target: tuple[str, int]


@dataclass(frozen=True)
class RegisterUnitary:
    """A unitary acting on the concatenation of whole registers, in the given order."""

    matrix: np.ndarray
    registers: tuple[str, ...]

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        _check_unitary(m)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "registers", tuple(self.registers))


Gate = Union[Gate2x2, ControlledX, RegisterUnitary]


@dataclass
class DensityMatrix:
    layout: RegisterLayout
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.layout.total > MAX_DENSITY_QUBITS:
            raise SimulationError(
                f"density matrices are capped at {MAX_DENSITY_QUBITS} qubits, layout has {self.layout.total}"
            )
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (self.layout.dim, self.layout.dim):
            raise SimulationError("density matrix shape does not match layout")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise SimulationError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > HERMITIAN_TOL:
            raise SimulationError(f"density matrix trace {np.trace(m).real} is not 1")
        self.matrix = m


def _check_unitary(m: np.ndarray, tol: float = UNITARY_TOL) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise SimulationError(f"matrix of shape {m.shape} is not square")
    err = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])), initial=0.0)
    if err > tol:
        raise SimulationError(f"matrix is not unitary (max deviation {err:.3g})")


def _same_layout(a: StateVector, b: StateVector) -> None:
    if a.layout.registers != b.layout.registers:
        raise SimulationError("states have different layouts")


# ---------------------------------------------------------------------------
# construction


def new_basis_state(layout: RegisterLayout, assignments: Mapping[str, Union[str, int]] | None = None) -> StateVector:
    amps = np.zeros(layout.dim, dtype=np.complex128)
    amps[layout.encode(assignments or {})] = 1.0
    return StateVector(layout, amps)


def product_state(layout: RegisterLayout, parts: Mapping[str, np.ndarray]) -> StateVector:
    """Tensor product of per-register vectors; registers not named start in |0...0>."""
    amps = np.ones(1, dtype=np.complex128)
    for name, w in layout.registers:
        if name in parts:
            v = np.asarray(parts[name], dtype=np.complex128)
            if v.shape != (1 << w,):
                raise SimulationError(f"vector for register {name} must have length {1 << w}")
        else:
            v = np.zeros(1 << w, dtype=np.complex128)
            v[0] = 1.0
        amps = np.kron(amps, v)
    return StateVector(layout, amps)


# ---------------------------------------------------------------------------
# gates


def rotation_gate(theta: float, register: str = "S", qubit: int = 0) -> Gate2x2:
    """Clockwise rotation ``[[cos t, sin t], [-sin t, cos t]]``."""
    if not math.isfinite(theta):
        raise SimulationError(f"rotation angle must be finite, got {theta}")
    c, s = math.cos(theta), math.sin(theta)
    return Gate2x2(np.array([[c, s], [-s, c]]), register, qubit)


X_MATRIX = np.array([[0, 1], [1, 0]], dtype=np.complex128)
H_MATRIX = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)
Z_MATRIX = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    out = state.copy()
    apply_gate_inplace(out, gate)
    return out


def apply_gate_inplace(state: StateVector, gate: Gate) -> None:
    layout = state.layout
    amps = state.amplitudes
    if isinstance(gate, Gate2x2):
        mask = layout.mask(gate.register, gate.qubit)
        m = gate.matrix
        if np.all(m.imag == 0) and m[0, 0] == m[1, 1] and m[0, 1] == -m[1, 0]:
            kernels.rotate(amps, mask, m[0, 0].real, m[0, 1].real)
        else:
            _apply_1q_dense(amps, mask, m)
    elif isinstance(gate, ControlledX):
        cmask = layout.mask(*gate.control)
        tmask = layout.mask(*gate.target)
        if cmask == tmask:
            raise SimulationError("control and target of CNOT coincide")
        idx = np.arange(layout.dim, dtype=np.int64)
        perm = np.where(idx & cmask, idx ^ tmask, idx)
        kernels.permute(amps, perm)
    elif isinstance(gate, RegisterUnitary):
        _apply_register_unitary(state, gate)
    else:
        raise SimulationError(f"unsupported gate {gate!r}")


def _apply_1q_dense(amps: np.ndarray, mask: int, m: np.ndarray) -> None:
    idx = np.arange(amps.shape[0])
    lo = idx[(idx & mask) == 0]
    hi = lo | mask
    a = amps[lo]
    b = amps[hi]
    amps[lo] = m[0, 0] * a + m[0, 1] * b
    amps[hi] = m[1, 0] * a + m[1, 1] * b


def _apply_register_unitary(state: StateVector, gate: RegisterUnitary) -> None:
    layout = state.layout
    names = layout.names
    if len(set(gate.registers)) != len(gate.registers):
        raise SimulationError(f"overlapping target registers {gate.registers}")
    dim = 1
    for r in gate.registers:
        dim <<= layout.width(r)
    axes = [names.index(r) for r in gate.registers]
    if gate.matrix.shape != (dim, dim):
        raise SimulationError(
            f"unitary of shape {gate.matrix.shape} does not fit registers {gate.registers} (dimension {dim})"
        )
    t = state.tensor()
    rest = [i for i in range(len(names)) if i not in axes]
    moved = np.transpose(t, axes + rest)
    shape = moved.shape
    res = (gate.matrix @ moved.reshape(dim, -1)).reshape(shape)
    inverse = np.argsort(axes + rest)
    state.amplitudes[:] = np.transpose(res, inverse).reshape(-1)


# ---------------------------------------------------------------------------
# metrics


def l2_distance(a: StateVector, b: StateVector) -> float:
    _same_layout(a, b)
    return float(np.linalg.norm(a.amplitudes - b.amplitudes))


def trace_distance_pure(a: StateVector, b: StateVector) -> float:
    """``sqrt(1 - |<a|b>|^2)`` for normalized pure states."""
    ov = abs(a.inner(b)) ** 2
    return math.sqrt(max(0.0, 1.0 - ov))


def _two_dim_coefficients(state: StateVector, z: str, index_register: str, target: str) -> tuple[np.ndarray, int]:
    layout = state.layout
    if layout.width(target) != 1:
        raise SimulationError(f"target register {target} must be a single qubit")
    t = state.tensor()
    names = layout.names
    zi, ti = names.index(index_register), names.index(target)
    zval = layout.encode({index_register: z}) >> layout.offset(index_register)
    moved = np.moveaxis(t, [zi, ti], [0, 1]).reshape(t.shape[zi], 2, -1)
    outside = np.delete(moved, zval, axis=0)
    if outside.size and np.max(np.abs(outside)) > REAL_TOL:
        raise SimulationError(f"state has support outside index register value {z}")
    block = moved[zval]
    col = int(np.argmax(np.linalg.norm(block, axis=0)))
    others = np.delete(block, col, axis=1)
    if others.size and np.max(np.abs(others)) > REAL_TOL:
        raise SimulationError("state is not supported on the two-dimensional subspace span{|z,0>, |z,1>}")
    coeffs = block[:, col]
    if np.max(np.abs(coeffs.imag)) > REAL_TOL:
        raise SimulationError("angle difference needs real coefficients")
    return coeffs.real, col


def angle_difference(a: StateVector, b: StateVector, z: str, index_register: str = "Z", target: str | None = None) -> float:
    """Absolute angle between the real target-qubit parts of ``|z,a>`` and ``|z,b>``.

    Equal to ``|acos <a|b>|`` for unit vectors, evaluated as
    ``atan2(|a x b|, a . b)`` so the result stays accurate near 0 and pi.
    """
    _same_layout(a, b)
    if target is None:
        others = [n for n, w in a.layout.registers if n != index_register and w > 0]
        if len(others) != 1:
            raise SimulationError("target register is ambiguous; pass target=")
        target = others[0]
    u, cu = _two_dim_coefficients(a, z, index_register, target)
    v, cv = _two_dim_coefficients(b, z, index_register, target)
    if cu != cv:
        raise SimulationError("states differ outside the index and target registers")
    u = u / math.hypot(*u)
    v = v / math.hypot(*v)
    dot = float(u @ v)
    cross = float(u[0] * v[1] - u[1] * v[0])
    return math.atan2(abs(cross), dot)


# ---------------------------------------------------------------------------
# measurement


def register_probabilities(state: StateVector, register: str) -> np.ndarray:
    layout = state.layout
    values = layout.register_values(register)
    probs = np.bincount(values, weights=np.abs(state.amplitudes) ** 2, minlength=1 << layout.width(register))
    return probs


def measure_register(state: StateVector, register: str, rng: np.random.Generator) -> tuple[str, StateVector]:
    """Sample ``register`` by the Born rule and collapse the state onto the outcome."""
    layout = state.layout
    w = layout.width(register)
    probs = register_probabilities(state, register)
    total = probs.sum()
    cdf = np.cumsum(probs) / total
    outcome = int(np.searchsorted(cdf, rng.random(), side="right"))
    outcome = min(outcome, len(probs) - 1)
    if probs[outcome] <= 0.0:
        raise SimulationError(f"sampled outcome {outcome} has zero probability")
    keep = layout.register_values(register) == outcome
    amps = np.where(keep, state.amplitudes, 0.0)
    amps /= math.sqrt(probs[outcome])
    return format(outcome, f"0{w}b") if w else "", StateVector(layout, amps)


# ---------------------------------------------------------------------------
# density matrices


def density_from_trajectories(samples: Sequence[StateVector]) -> DensityMatrix:
    if not samples:
        raise SimulationError("no trajectories given")
    layout = samples[0].layout
    if layout.total > MAX_DENSITY_QUBITS:
        raise SimulationError(f"density matrices are capped at {MAX_DENSITY_QUBITS} qubits")
    for s in samples:
        _same_layout(samples[0], s)
    m = np.stack([s.amplitudes for s in samples])
    rho = m.T @ m.conj() / len(samples)
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(layout, rho)


def pure_density(state: StateVector) -> DensityMatrix:
    return density_from_trajectories([state])


def partial_trace(rho: DensityMatrix, keep: Sequence[str]) -> DensityMatrix:
    """Trace out every register not named in ``keep`` (kept in layout order)."""
    layout = rho.layout
    names = layout.names
    for k in keep:
        layout.width(k)
    kept = [(n, w) for n, w in layout.registers if n in keep]
    dims = [1 << w for _, w in layout.registers]
    k = len(names)
    t = rho.matrix.reshape(dims + dims)
    keep_axes = [i for i, n in enumerate(names) if n in keep]
    drop_axes = [i for i, n in enumerate(names) if n not in keep]
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = [letters[i] for i in range(k)]
    col = [letters[i].upper() for i in range(k)]
    for i in drop_axes:
        col[i] = row[i]
    out = "".join(row[i] for i in keep_axes) + "".join(col[i] for i in keep_axes)
    reduced = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    d = 1
    for _, w in kept:
        d <<= w
    return DensityMatrix(RegisterLayout(kept), reduced.reshape(d, d))


def trace_distance_density(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Half the trace norm of ``rho - sigma``."""
    if rho.layout.registers != sigma.layout.registers:
        raise SimulationError("density matrices have different layouts")
    diff = rho.matrix - sigma.matrix
    if np.max(np.abs(diff - diff.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise SimulationError("difference is not Hermitian")
    eig = np.linalg.eigvalsh((diff + diff.conj().T) / 2)
    return float(0.5 * np.sum(np.abs(eig)))


def diffusion_inplace(state: StateVector, register: str) -> None:
    """Reflect ``register`` about its uniform superposition: ``2|eta><eta| - I``."""
    state.layout.width(register)
    axis = state.layout.names.index(register)
    t = state.tensor()
    mean = t.mean(axis=axis, keepdims=True)
    t[...] = 2 * mean - t
