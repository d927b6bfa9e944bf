"""Simulation toolkit for quantum query algorithms with faulty oracles.

Hot loops live in :mod:`noisy_oracle.kernels`; set ``NOISY_ORACLE_JIT=0`` to
run them as plain numpy instead of numba.
"""

__version__ = "0.1.0"

from .oracles import (
    FaultTrace,
    FaultyOracleConfig,
    TraceExhausted,
    TruthTable,
    apply_addition_oracle,
    apply_faulty_oracle,
    apply_phase_oracle,
    apply_standard_oracle,
    classical_noisy_query,
    reduce_error_rate,
    sample_fault,
)
from .robust import (
    QueryAlgorithm,
    RobustAlgorithm,
    RobustParams,
    apply_F,
    apply_G,
    compute_t,
    grover_algorithm,
    robustify,
    run,
)
from .sim import (
    RegisterLayout,
    SimulationError,
    StateVector,
    angle_difference,
    apply_gate,
    l2_distance,
    new_basis_state,
    trace_distance_density,
)
