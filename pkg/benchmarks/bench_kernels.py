"""Time the numba and numpy kernel backends on the workloads that dominate runtime.

    python benchmarks/bench_kernels.py [--repeat 5]

Each case is run once per backend to warm up (numba compiles on first call),
then timed with ``timeit``; the best of ``--repeat`` runs is reported.
"""

import argparse
import timeit

import numpy as np

from noisy_oracle import kernels
from noisy_oracle.oracles import FaultTrace, FaultyOracleConfig, TruthTable
from noisy_oracle.robust import _Circuit
from noisy_oracle.sim import RegisterLayout, new_basis_state


def oracle_rounds_case(n_bits, rounds):
    layout = RegisterLayout([("Z", n_bits), ("B", 1), ("S", 1)])
    f = TruthTable.marked(n_bits, [1])
    circuit = _Circuit(layout, f, "Z", "S", "B")
    start = new_basis_state(layout, {"Z": 1}).amplitudes
    draws = np.random.default_rng(0).random(rounds) < 0.5

    def go():
        amps = start.copy()
        circuit.G(amps, draws, draws)

    return go


def phase_rounds_case(n_bits, rounds):
    amps = np.full(1 << n_bits, 1 / np.sqrt(1 << n_bits), dtype=np.complex128)
    draws = np.random.default_rng(0).random(rounds) < 0.5
    index = np.array([3])
    phase = np.exp(1j * np.pi / 7)
    return lambda: kernels.phase_rounds(amps.copy(), index, draws, phase)


def rotate_case(n_bits, reps):
    amps = np.random.default_rng(0).normal(size=1 << n_bits).astype(np.complex128)

    def go():
        for q in range(reps):
            kernels.rotate(amps, 1 << (q % n_bits), 0.6, 0.8)

    return go


CASES = {
    "G block, 64-dim, t=20000": lambda: oracle_rounds_case(4, 20_000),
    "G block, 1024-dim, t=2000": lambda: oracle_rounds_case(8, 2_000),
    "phase rounds, 16-dim, 1e5 draws": lambda: phase_rounds_case(4, 100_000),
    "rotate x 2000, 2^14-dim": lambda: rotate_case(14, 2_000),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = kernels.available_backends()
    previous = kernels.get_backend()
    print(f"{'case':36s}" + "".join(f"{b:>12s}" for b in backends) + "     speedup")
    try:
        for label, make in CASES.items():
            times = {}
            for backend in backends:
                kernels.set_backend(backend)
                fn = make()
                fn()
                times[backend] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
            speedup = times["numpy"] / times["numba"] if "numba" in times else float("nan")
            print(f"{label:36s}" + "".join(f"{times[b] * 1e3:10.2f}ms" for b in backends) + f"  {speedup:8.2f}x")
    finally:
        kernels.set_backend(previous)


if __name__ == "__main__":
    main()
