"""Monte Carlo and exact experiments built from the simulator pieces.

Every function here is deterministic in its ``seed``; trial ``i`` draws only
from substreams keyed by ``(seed, ..., i)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .oracles import FaultTrace, FaultyOracleConfig, TruthTable, oracle_permutation, sample_faults
from .rng import substream
from .robust import (
    Op,
    QueryAlgorithm,
    _Circuit,
    evolve,
    lift_to_scratch,
    robustify,
)
from .sim import (
    RegisterLayout,
    StateVector,
    density_from_trajectories,
    new_basis_state,
    partial_trace,
    pure_density,
    trace_distance_density,
)
from .trials import map_trials


@dataclass
class Frequency:
    hits: int
    trials: int

    @property
    def value(self) -> float:
        return self.hits / self.trials

    def sigma(self, target: float | None = None) -> float:
        """Binomial standard error, at ``target`` if given, else at the estimate."""
        p = self.value if target is None else target
        return math.sqrt(max(p * (1 - p), 0.0) / self.trials)

    def half_width(self) -> float:
        """3-sigma half width, floored at the one-count resolution."""
        return max(3 * self.sigma(), 1 / self.trials) if self.trials > 1 else 0.0


def random_real_state(layout: RegisterLayout, registers: list[str], rng: np.random.Generator) -> StateVector:
    """Random real unit vector on ``registers`` (in layout order), zero elsewhere."""
    dim = 1
    for r in registers:
        dim <<= layout.width(r)
    v = rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    full = np.zeros(layout.dim, dtype=np.complex128)
    rest = layout.dim // dim
    # registers not listed sit in |0...0>, and are assumed to trail the listed ones
    full[::rest] = v
    return StateVector(layout, full)


def f_concentration(
    t: int,
    gamma: float,
    trials: int,
    seed: int,
    n: int = 3,
    superposition: bool = False,
) -> tuple[Frequency, np.ndarray]:
    """How often ``||(F - O_f)|phi,0>|| <= gamma`` at p = 1/2.

    With ``superposition=False`` the input is ``|z,0>`` for the marked z of a
    single-marked f; otherwise f and the real ``|phi>_Z`` are random per trial.
    """
    layout = RegisterLayout([("Z", n), ("S", 1)])
    fixed = TruthTable.marked(n, [(1 << n) - 1])

    def one(trial):
        rng = substream(seed, "f-input", trial)
        if superposition:
            f = TruthTable.random(n, 1, rng)
            state = random_real_state(layout, ["Z"], rng)
        else:
            f = fixed
            state = new_basis_state(layout, {"Z": (1 << n) - 1})
        circuit = _Circuit(layout, f, "Z", "S")
        config = FaultyOracleConfig(f, 0.5)
        ideal = state.amplitudes[circuit.perm]
        amps = state.amplitudes.copy()
        circuit.F(amps, sample_faults(config, FaultTrace(seed, "f-faults", trial), t))
        return float(np.linalg.norm(amps - ideal))

    dist = np.array(map_trials(one, trials))
    return Frequency(int(np.count_nonzero(dist <= gamma)), trials), dist


def g_concentration(
    t: int,
    gamma: float,
    trials: int,
    seed: int,
    n: int = 3,
    m: int = 1,
) -> tuple[Frequency, np.ndarray]:
    """How often ``||(G - O_f (x) I_S)|phi,0^m>|| <= gamma`` for random f and real ``|phi>_ZB``."""
    layout = RegisterLayout([("Z", n), ("B", m), ("S", m)])

    def one(trial):
        rng = substream(seed, "g-input", trial)
        f = TruthTable.random(n, m, rng)
        state = random_real_state(layout, ["Z", "B"], rng)
        ideal = state.amplitudes[oracle_permutation(layout, f, "Z", "B")]
        circuit = _Circuit(layout, f, "Z", "S", "B")
        config = FaultyOracleConfig(f, 0.5)
        trace = FaultTrace(seed, "g-faults", trial)
        first = sample_faults(config, trace, t)
        second = sample_faults(config, trace, t)
        amps = state.amplitudes.copy()
        circuit.G(amps, first, second)
        return float(np.linalg.norm(amps - ideal))

    dist = np.array(map_trials(one, trials))
    return Frequency(int(np.count_nonzero(dist <= gamma)), trials), dist


def multi_bit_symmetry(t: int, trials: int, seed: int, n: int = 3) -> float:
    """Max over trajectories of the change under swapping S_0 and S_1 after F.

    f has two identical output bits and the input is a random real ``|phi>_Z``
    with S in ``|00>``; a shared fault pattern keeps S_0 and S_1 identical.
    """
    layout = RegisterLayout([("Z", n), ("S", 2)])

    def one(trial):
        rng = substream(seed, "multi-input", trial)
        bits = TruthTable.random(n, 1, rng).table
        f = TruthTable(n, 2, tuple(3 * b for b in bits))
        state = random_real_state(layout, ["Z"], rng)
        circuit = _Circuit(layout, f, "Z", "S")
        config = FaultyOracleConfig(f, 0.5)
        amps = state.amplitudes.copy()
        circuit.F(amps, sample_faults(config, FaultTrace(seed, "multi-faults", trial), t))
        tensor = amps.reshape(1 << n, 2, 2)
        return float(np.max(np.abs(tensor - tensor.transpose(0, 2, 1))))

    return max(map_trials(one, trials))


def toy_algorithm(n: int, q: int) -> QueryAlgorithm:
    """Fixed q-query test algorithm on Z(n), B(1): Hadamards, rotations and a diffusion."""
    layout = RegisterLayout([("Z", n), ("B", 1), ("T", 0)])
    blocks = [[Op("h", (), ("Z",)), Op("rot", (0.3,), ("B[0]",))]]
    for i in range(q):
        blocks.append([Op("rot", (0.7 + 0.2 * i,), ("B[0]",)), Op("diffusion", (), ("Z",)), Op("h", (), ("Z[0]",))])
    return QueryAlgorithm(layout, blocks, "Z")


def algorithm_composition(
    gamma: float,
    delta: float,
    trials: int,
    seed: int,
    n: int = 3,
    q: int = 2,
) -> tuple[Frequency, int]:
    """How often ``||(V (x) I_S - V')|phi>|0>|| <= gamma`` for a random f and real ``|phi>_ZB``.

    Returns the frequency and the t used per G block.
    """
    algo = toy_algorithm(n, q)
    robust = robustify(algo, gamma, delta)

    def one(trial):
        rng = substream(seed, "compose-input", trial)
        f = TruthTable.random(n, 1, rng)
        phi = random_real_state(algo.layout, ["Z", "B"], rng)
        ideal, _ = evolve(algo, f, phi)
        noisy, _ = evolve(robust, f, phi, FaultyOracleConfig(f, 0.5), FaultTrace(seed, "compose-faults", trial))
        lifted = lift_to_scratch(ideal, 1)
        return float(np.linalg.norm(noisy.amplitudes - lifted.amplitudes)) <= gamma

    hits = sum(map_trials(one, trials))
    return Frequency(hits, trials), robust.t


def trace_distance_experiment(
    gamma: float,
    delta: float,
    trials: int,
    seed: int,
    n: int = 2,
    marked: int = 1,
) -> tuple[float, int]:
    """Trace distance between the fault-free output of a one-query algorithm and
    the trajectory-averaged robust output with S traced out.

    Returns (distance, t).
    """
    algo = QueryAlgorithm(
        RegisterLayout([("Z", n), ("B", 1), ("T", 0)]),
        [
            [Op("h", (), ("Z",)), Op("x", (), ("B[0]",)), Op("h", (), ("B[0]",))],
            [Op("h", (), ("Z",))],
        ],
        "Z",
    )
    f = TruthTable.marked(n, [marked])
    robust = robustify(algo, gamma, delta)
    ideal, _ = evolve(algo, f)
    config = FaultyOracleConfig(f, 0.5)

    def one(trial):
        state, _ = evolve(robust, f, config=config, trace=FaultTrace(seed, "density-faults", trial))
        return state

    rho = partial_trace(density_from_trajectories(map_trials(one, trials)), ["Z", "B"])
    sigma = partial_trace(pure_density(ideal), ["Z", "B"])
    return trace_distance_density(rho, sigma), robust.t

