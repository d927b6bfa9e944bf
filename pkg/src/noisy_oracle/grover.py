"""Grover search under exact, faulty, robustified and phase-oracle regimes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .oracles import FaultTrace, FaultyOracleConfig, TruthTable, apply_faulty_oracle, sample_faults
from .rng import substream
from .robust import RobustAlgorithm, evolve, grover_algorithm, robustify
from .sim import (
    RegisterLayout,
    StateVector,
    diffusion_inplace,
    measure_register,
    new_basis_state,
    product_state,
    register_probabilities,
)
from .trials import map_trials

MODES = ("exact", "faulty", "robust", "phase")


@dataclass(frozen=True)
class GroverInstance:
    n: int
    k: int
    r: int

    def __post_init__(self):
        if not 0 <= self.k < (1 << self.n):
            raise ValueError(f"marked index {self.k} outside [0, {1 << self.n})")
        if self.r < 0:
            raise ValueError("iteration count must be non-negative")

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def table(self) -> TruthTable:
        return TruthTable.marked(self.n, [self.k])


@dataclass
class GroverResult:
    mode: str
    instance: GroverInstance
    trials: int
    successes: int
    total_queries: int
    p: float | None = None
    gamma: float | None = None
    delta: float | None = None
    r_phase: int | None = None

    @property
    def success_freq(self) -> float:
        return self.successes / self.trials

    @property
    def mean_queries(self) -> float:
        return self.total_queries / self.trials


def diffusion_apply(state: StateVector, Z: str = "Z") -> StateVector:
    out = state.copy()
    diffusion_inplace(out, Z)
    return out


def grover_success_prob(N: int, r: int) -> float:
    """``sin^2((2r + 1) asin(1/sqrt(N)))``."""
    if N < 2 or r < 0:
        raise ValueError("need N >= 2 and r >= 0")
    return math.sin((2 * r + 1) * math.asin(1 / math.sqrt(N))) ** 2


def exact_success_probability(instance: GroverInstance) -> float:
    """Success probability read off the fault-free final amplitudes."""
    state, _ = evolve(grover_algorithm(instance.n, instance.r), instance.table)
    return float(register_probabilities(state, "Z")[instance.k])


def _phase_layout(n: int) -> RegisterLayout:
    return RegisterLayout([("Z", n)])


def phase_round_length(r_phase: int, p: float) -> int:
    """Noisy phase invocations per Grover iteration: ``ceil(r / (1 - p))``."""
    return math.ceil(r_phase / (1 - p))


def _phase_trial(instance: GroverInstance, r_phase: int, p: float, seed: int, trial: int) -> tuple[bool, int]:
    layout = _phase_layout(instance.n)
    state = product_state(layout, {"Z": np.full(instance.N, 1 / math.sqrt(instance.N))})
    config = FaultyOracleConfig(instance.table, p, reduce=False)
    trace = FaultTrace(seed, "phase", trial)
    length = phase_round_length(r_phase, p)
    phase = np.exp(1j * math.pi / r_phase)
    target = np.array([instance.k])
    for _ in range(instance.r):
        kernels.phase_rounds(state.amplitudes, target, sample_faults(config, trace, length), phase)
        diffusion_inplace(state, "Z")
    outcome, _ = measure_register(state, "Z", substream(seed, "measure", trial))
    return int(outcome, 2) == instance.k, instance.r * length


def run_grover(
    instance: GroverInstance,
    mode: str,
    seed: int,
    trials: int,
    p: float = 0.5,
    gamma: float = 0.1,
    delta: float = 0.1,
    r_phase: int = 1,
) -> GroverResult:
    """Empirical success frequency of Grover search over ``trials`` seeded runs.

    exact: fault-free bit oracle.  faulty: each call is the raw faulty oracle
    with error rate p.  robust: each call is a G block (error rate p reduced
    to 1/2).  phase: each marker call is replaced by ceil(r_phase/(1-p))
    noisy ``exp(i pi / r_phase)`` phase-oracle invocations.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    if trials < 1:
        raise ValueError("trials must be positive")
    f = instance.table
    extra = {}

    if mode == "exact":
        algo = grover_algorithm(instance.n, instance.r)
        state, _ = evolve(algo, f)

        def one(trial):
            outcome, _ = measure_register(state, "Z", substream(seed, "measure", trial))
            return int(outcome, 2) == instance.k, instance.r

    elif mode == "faulty":
        algo = grover_algorithm(instance.n, instance.r)
        config = FaultyOracleConfig(f, p, reduce=False)
        extra = dict(p=p)

        def one(trial):
            state, _ = evolve(algo, f, config=config, trace=FaultTrace(seed, "faults", trial))
            outcome, _ = measure_register(state, "Z", substream(seed, "measure", trial))
            return int(outcome, 2) == instance.k, instance.r

    elif mode == "robust":
        algo = robustify(grover_algorithm(instance.n, instance.r), gamma, delta)
        config = FaultyOracleConfig(f, p, reduce=True)
        queries = algo.draws_per_run if isinstance(algo, RobustAlgorithm) else 0
        extra = dict(p=p, gamma=gamma, delta=delta)

        def one(trial):
            state, _ = evolve(algo, f, config=config, trace=FaultTrace(seed, "faults", trial))
            outcome, _ = measure_register(state, "Z", substream(seed, "measure", trial))
            return int(outcome, 2) == instance.k, queries

    else:
        if not 0 <= p < 1:
            raise ValueError("phase mode needs 0 <= p < 1")
        extra = dict(p=p, r_phase=r_phase)

        def one(trial):
            return _phase_trial(instance, r_phase, p, seed, trial)

    results = map_trials(one, trials)
    return GroverResult(
        mode,
        instance,
        trials,
        sum(1 for ok, _ in results if ok),
        sum(q for _, q in results),
        **extra,
    )


# ---------------------------------------------------------------------------
# commutator of diffusion and fractional phase oracle


def _grover_operators(N: int, r_phase: int, k: int = 0, phase: complex | None = None) -> tuple[np.ndarray, np.ndarray]:
    eta = np.full(N, 1 / math.sqrt(N))
    diffusion = 2 * np.outer(eta, eta) - np.eye(N)
    diag = np.ones(N, dtype=np.complex128)
    diag[k] = np.exp(1j * math.pi / r_phase) if phase is None else phase
    return diffusion, np.diag(diag)


def commutator_norm(N: int, r_phase: int) -> tuple[float, float]:
    """(closed form, numeric) operator norm of ``[U_eta, O^{k,1/r}]``.

    Closed form ``2 sqrt(N-1) |1 - exp(i pi / r)| / N``.  The numeric value is
    the largest singular value of the commutator written in the orthonormal
    basis {|k>, |eta'>}, eta' being uniform over the unmarked indices.  Both
    operators are built as dense N x N matrices and then projected.
    """
    if N < 2 or r_phase < 1:
        raise ValueError("need N >= 2 and r_phase >= 1")
    closed = 2 * math.sqrt(N - 1) * abs(1 - np.exp(1j * math.pi / r_phase)) / N
    k = 0
    diffusion, phase = _grover_operators(N, r_phase, k)
    comm = diffusion @ phase - phase @ diffusion
    basis = np.zeros((N, 2))
    basis[k, 0] = 1.0
    basis[:, 1] = 1 / math.sqrt(N - 1)
    basis[k, 1] = 0.0
    small = basis.T @ comm @ basis
    numeric = np.linalg.svd(small, compute_uv=False)[0]
    return float(closed), float(numeric)


def commutator_norm_full(N: int, r_phase: int, phase: complex | None = None) -> float:
    """Spectral norm of the commutator on the full N-dimensional space.

    ``phase`` overrides the marker phase ``exp(i pi / r)``, e.g. to compare
    against the ``-exp(-i pi / r)`` convention.
    """
    diffusion, marker = _grover_operators(N, r_phase, phase=phase)
    return float(np.linalg.norm(diffusion @ marker - marker @ diffusion, 2))


def angle_inequality_gap(thetas: np.ndarray) -> float:
    """Largest value of ``|exp(i theta) + 1| - |theta - pi|`` over ``thetas``."""
    return float(np.max(np.abs(np.exp(1j * thetas) + 1) - np.abs(thetas - math.pi)))


def fractional_phase_power(N: int, k: int, r_phase: int) -> np.ndarray:
    """``(O^{k,1/r})^r`` as a dense matrix."""
    _, phase = _grover_operators(N, r_phase, k)
    return np.linalg.matrix_power(phase, r_phase)


def phase_round_counts(rounds: int, r_phase: int, p: float, trials: int, seed: int) -> np.ndarray:
    """Cumulative applied counts ``sum_{j<=i} X_j`` for i = 1..rounds, one row per trial.

    Each round makes ``ceil(r_phase / (1-p))`` noisy phase invocations; the
    count after i rounds is Binomial(i * ceil(r/(1-p)), 1-p).
    """
    config = FaultyOracleConfig(TruthTable.marked(1, [0]), p, reduce=False)
    length = phase_round_length(r_phase, p)
    out = np.empty((trials, rounds), dtype=np.int64)
    for trial in range(trials):
        trace = FaultTrace(seed, "rounds", trial)
        counts = [int(np.count_nonzero(sample_faults(config, trace, length))) for _ in range(rounds)]
        out[trial] = np.cumsum(counts)
    return out


# ---------------------------------------------------------------------------
# repeated short runs


@dataclass
class ShortRunsResult:
    success: bool
    total_queries: int
    runs: int
    candidate: int | None = None


def short_run_plan(N: int, p: float, c: float = 8.0) -> tuple[int, int]:
    """(number of runs, Grover iterations per run) = (ceil(c p^2 N), ceil(1/p))."""
    return math.ceil(c * p * p * N), math.ceil(1 / p)


def repeat_short_runs(
    N: int,
    k: int,
    p: float,
    seed: int,
    c: float = 8.0,
    verify_queries: int = 7,
    *key,
) -> ShortRunsResult:
    """Independent short faulty Grover runs, each followed by a one-sided check.

    A candidate is accepted on the first faulty query that returns 1; a
    faulty oracle never reports 1 for an unmarked index, so acceptance is
    always correct.
    """
    if not 0 < p <= 0.5:
        raise ValueError("short runs need 0 < p <= 1/2")
    n = int(math.log2(N))
    if 1 << n != N:
        raise ValueError("N must be a power of two")
    f = TruthTable.marked(n, [k])
    runs, iterations = short_run_plan(N, p, c)
    config = FaultyOracleConfig(f, p, reduce=False)
    algo = grover_algorithm(n, iterations)
    check_layout = RegisterLayout([("Z", n), ("B", 1)])
    trace = FaultTrace(seed, "short-runs", *key)
    rng = substream(seed, "short-runs-measure", *key)
    queries = 0
    for run in range(runs):
        state, _ = evolve(algo, f, config=config, trace=trace)
        queries += iterations
        outcome, _ = measure_register(state, "Z", rng)
        for _ in range(verify_queries):
            probe = new_basis_state(check_layout, {"Z": outcome, "B": "0"})
            probe = apply_faulty_oracle(probe, f, "Z", "B", config, trace)
            queries += 1
            bit, _ = measure_register(probe, "B", rng)
            if bit == "1":
                return ShortRunsResult(True, queries, run + 1, int(outcome, 2))
    return ShortRunsResult(False, queries, runs)


def short_runs_batch(N: int, p: float, trials: int, seed: int, c: float = 8.0) -> list[ShortRunsResult]:
    """One :func:`repeat_short_runs` per trial, each with its own random marked index."""

    def one(trial):
        k = int(substream(seed, "short-runs-target", N, trial).integers(N))
        return repeat_short_runs(N, k, p, seed, c, 7, N, trial)

    return map_trials(one, trials)
