"""Acceptance criteria, one test per criterion.

Each test records a single PASS/FAIL line (printed in the terminal summary)
with the measured value, the pinned tolerance and the elapsed time.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from noisy_oracle import walk
from noisy_oracle.classical import all_zero_product, noisy_or_lower_experiment, noisy_or_upper
from noisy_oracle.cli import main
from noisy_oracle.experiments import (
    Frequency,
    f_concentration,
    g_concentration,
    multi_bit_symmetry,
    trace_distance_experiment,
)
from noisy_oracle.grover import (
    GroverInstance,
    angle_inequality_gap,
    commutator_norm,
    exact_success_probability,
    run_grover,
    short_runs_batch,
)
from noisy_oracle.oracles import FaultTrace, FaultyOracleConfig, TruthTable
from noisy_oracle.robust import apply_F, compute_t
from noisy_oracle.rng import substream
from noisy_oracle.sim import RegisterLayout, product_state

pytestmark = pytest.mark.acceptance


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def test_criterion_01_walk_equivalence(criterion):
    with Timer() as clock:
        worst = max(walk.circuit_vs_walk_check(t) for t in range(1, 11))
    ok = worst <= 1e-9 and clock.elapsed < 10
    criterion(1, ok, f"max |circuit - walk| = {worst:.2e} (<= 1e-9), {clock.elapsed:.1f}s (< 10s)")


def test_criterion_02_distribution_identity(criterion):
    with Timer() as clock:
        same = all(
            walk.enumerate_distribution(t, "geometric") == walk.enumerate_distribution(t, "walk")
            for t in range(1, 13)
        )
    ok = same and clock.elapsed < 5
    criterion(2, ok, f"exact rational match for t <= 12: {same}, {clock.elapsed:.1f}s (< 5s)")


def test_criterion_03_chernoff(criterion):
    tails = {}
    with Timer() as clock:
        for t in (64, 256, 1024):
            for delta in (0.2, 0.05):
                tails[t, delta] = walk.chernoff_tail(t, delta, 100_000, seed=3)
    ok = all(tail <= delta for (_, delta), tail in tails.items()) and clock.elapsed < 30
    worst = max(tail / delta for (_, delta), tail in tails.items())
    criterion(3, ok, f"max tail/delta = {worst:.3g} (<= 1) over 6 cells x 1e5 trials, {clock.elapsed:.1f}s (< 30s)")


def test_criterion_04_f_concentration(criterion):
    t = compute_t("F", 0.3, 0.1)
    with Timer() as clock:
        freq, _ = f_concentration(t, 0.3, 5000, seed=4, n=3)
    floor = 0.9 - 3 * freq.sigma(0.9)
    ok = t == 493 and freq.value >= floor and clock.elapsed < 60
    criterion(4, ok, f"t={t}, within-gamma freq {freq.value:.4f} (>= {floor:.4f}), {clock.elapsed:.1f}s (< 60s)")


def test_criterion_05_zero_input_identity(criterion):
    rng = np.random.default_rng(5)
    layout = RegisterLayout([("Z", 3), ("S", 1)])
    t = compute_t("F", 0.3, 0.1)
    worst = 0.0
    checked = 0
    with Timer() as clock:
        for table in range(20):
            f = TruthTable.random(3, 1, rng)
            config = FaultyOracleConfig(f, 0.5)
            for z in (z for z in range(8) if f(z) == 0):
                for trial in range(50):
                    s = rng.standard_normal(2) + 1j * rng.standard_normal(2)
                    state = product_state(layout, {"Z": np.eye(8)[z], "S": s / np.linalg.norm(s)})
                    out = apply_F(state, f, t, config, FaultTrace(5, table, z, trial))
                    worst = max(worst, float(np.max(np.abs(out.amplitudes - state.amplitudes))))
                    checked += 1
    ok = checked > 0 and worst <= 1e-12 and clock.elapsed < 10
    criterion(5, ok, f"{checked} states, max deviation {worst:.1e} (<= 1e-12), {clock.elapsed:.1f}s (< 10s)")


def test_criterion_06_g_concentration(criterion):
    t = compute_t("G", 0.5, 0.2)
    with Timer() as clock:
        freq, _ = g_concentration(t, 0.5, 2000, seed=6, n=3, m=1)
    floor = 0.8 - 3 * freq.sigma(0.8)
    ok = t == 710 and freq.value >= floor and clock.elapsed < 120
    criterion(6, ok, f"t={t}, within-gamma freq {freq.value:.4f} (>= {floor:.4f}), {clock.elapsed:.1f}s (< 120s)")


def test_criterion_07_multi_bit(criterion):
    t = compute_t("multi", 0.5, 0.2, 2)
    with Timer() as clock:
        worst = multi_bit_symmetry(t, 500, seed=7)
    ok = worst <= 1e-12 and clock.elapsed < 30
    criterion(7, ok, f"t={t}, max S0/S1 asymmetry {worst:.1e} (<= 1e-12), {clock.elapsed:.1f}s (< 30s)")


def test_criterion_08_robust_grover(criterion):
    inst = GroverInstance(4, 5, 3)
    exact = exact_success_probability(inst)
    target = math.sin(7 * math.asin(0.25)) ** 2
    exact_ok = abs(exact - target) <= 1e-9

    faulty = run_grover(inst, "faulty", seed=8, trials=10_000, p=0.5)
    faulty_ok = faulty.success_freq < 0.86

    t = compute_t("algorithm", 0.1, 0.1, 1, 3)
    with Timer() as clock:
        robust = run_grover(inst, "robust", seed=8, trials=200, p=0.5, gamma=0.1, delta=0.1)
    freq = Frequency(robust.successes, robust.trials)
    floor = 0.7613 - 3 * freq.sigma(0.7613)
    robust_ok = robust.mean_queries == 2 * t * 3 and freq.value >= floor and clock.elapsed < 20 * 60
    ok = exact_ok and faulty_ok and robust_ok
    criterion(
        8,
        ok,
        f"exact {exact:.10f} vs {target:.10f}; faulty freq {faulty.success_freq:.4f} (< 0.86); "
        f"robust t={t} freq {freq.value:.4f} (>= {floor:.4f}) over 200 trials, {clock.elapsed:.0f}s (< 1200s)",
    )


def test_criterion_09_trace_distance(criterion):
    with Timer() as clock:
        dist, t = trace_distance_experiment(0.2, 0.2, 10_000, seed=9, n=2)
    ok = dist <= 0.45 and clock.elapsed < 300
    criterion(9, ok, f"t={t}, trace distance {dist:.3g} (<= 0.45), {clock.elapsed:.1f}s (< 300s)")


def test_criterion_10_commutator(criterion):
    with Timer() as clock:
        worst = 0.0
        for N in range(2, 65):
            for r in range(1, 33):
                closed, numeric = commutator_norm(N, r)
                worst = max(worst, abs(closed - numeric))
        gap = angle_inequality_gap(np.linspace(0, 2 * math.pi, 10_000))
    ok = worst <= 1e-9 and gap <= 1e-12 and clock.elapsed < 5
    criterion(10, ok, f"max |closed - numeric| {worst:.1e} (<= 1e-9), angle gap {gap:.1e} (<= 0), {clock.elapsed:.1f}s (< 5s)")


def test_criterion_11_short_runs(criterion):
    trials = 300
    with Timer() as clock:
        small = short_runs_batch(64, 0.5, trials, seed=11)
        large = short_runs_batch(256, 0.5, trials, seed=11)
    success = sum(r.success for r in small) / trials
    ratio = sum(r.total_queries for r in large) / sum(r.total_queries for r in small)
    ok = success >= 0.8 and 3 <= ratio <= 5.5 and clock.elapsed < 120
    criterion(11, ok, f"N=64 success {success:.3f} (>= 0.8), query ratio {ratio:.2f} (in [3, 5.5]), {clock.elapsed:.1f}s (< 120s)")


def test_criterion_12_classical_or(criterion):
    trials = 10_000
    with Timer() as clock:
        rng = substream(12, "placement")
        errors = 0
        for trial in range(trials):
            x = [0] * 16
            x[int(rng.integers(16))] = 1
            answer, _ = noisy_or_upper(x, 0.3, 12, trial)
            errors += answer != 1
        err = Frequency(errors, trials)
        upper_ok = err.value <= 0.1 + 3 * err.sigma(0.1)

        n, alpha, T = 64, 0.3, 2
        emp, bound = noisy_or_lower_experiment(n, alpha, T, trials, seed=12)
        sigma = math.sqrt(bound * (1 - bound) / trials)
        lower_ok = emp >= bound - 3 * sigma
        product = all_zero_product(n, Fraction(3, 10), T)
        product_ok = abs(emp - float(product)) <= 3 * sigma
    ok = upper_ok and lower_ok and product_ok and clock.elapsed < 30
    criterion(
        12,
        ok,
        f"upper error {err.value:.4f} (<= 0.1 + 3sd); all-zero {emp:.4f} vs bound {bound:.6f} "
        f"and product {float(product):.6f} (3sd = {3 * sigma:.4f}), {clock.elapsed:.1f}s (< 30s)",
    )


DETERMINISM_RUNS = [
    ["concentration", "--trials", "2000"],
    ["chernoff", "--trials", "2000"],
    ["f-check", "--t-max", "6"],
    ["f-check", "--mode", "concentration", "--trials", "50"],
    ["g-check", "--trials", "20"],
    ["robust-run", "--mode", "faulty", "--trials", "200"],
    ["robust-run", "--mode", "robust", "--n", "2", "--iters", "1", "--trials", "3", "--gamma", "1.2", "--delta", "0.2"],
    ["phase-grover", "--trials", "100"],
    ["walk", "enumerate", "--t", "8"],
    ["commutator", "--N", "2,16,64", "--r", "1,5"],
    ["short-runs", "--N", "16", "--trials", "30"],
    ["classical-or", "--trials", "2000"],
    ["trace-distance", "--trials", "30", "--gamma", "0.5", "--delta", "0.2"],
]


def test_criterion_13_determinism(criterion, tmp_path):
    mismatched = []
    codes = []
    for i, args in enumerate(DETERMINISM_RUNS):
        outputs = []
        for rep in range(2):
            out = tmp_path / f"{i}-{rep}.csv"
            codes.append(main([*args, "--seed", "13", "--out", str(out)]))
            outputs.append(out.read_bytes())
        if outputs[0] != outputs[1]:
            mismatched.append(" ".join(args[:2]))
    ok = not mismatched and all(c == 0 for c in codes)
    criterion(13, ok, f"{len(DETERMINISM_RUNS)} experiment configs run twice, mismatches: {mismatched or 'none'}")
