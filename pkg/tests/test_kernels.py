import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from noisy_oracle import kernels
from noisy_oracle.oracles import FaultTrace, FaultyOracleConfig, TruthTable
from noisy_oracle.robust import apply_G, compute_t, evolve, grover_algorithm, robustify
from noisy_oracle.sim import RegisterLayout, new_basis_state

pytestmark = pytest.mark.skipif(
    "numba" not in kernels.available_backends(), reason="numba unavailable"
)


def both(fn, *args):
    out = {}
    previous = kernels.get_backend()
    try:
        for name in ("numba", "numpy"):
            kernels.set_backend(name)
            out[name] = fn(*args)
    finally:
        kernels.set_backend(previous)
    return out["numba"], out["numpy"]


def random_amps(rng, n):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


def random_involution(rng, size):
    perm = np.arange(size)
    order = rng.permutation(size)
    for a, b in zip(order[0::2], order[1::2]):
        if rng.random() < 0.5:
            perm[a], perm[b] = b, a
    return perm


@given(st.integers(1, 6), st.integers(0, 2**31), st.floats(-np.pi, np.pi))
def test_rotate(n, seed, theta):
    rng = np.random.default_rng(seed)
    amps = random_amps(rng, n)
    mask = 1 << int(rng.integers(n))

    def go():
        a = amps.copy()
        kernels.rotate(a, mask, np.cos(theta), np.sin(theta))
        return a

    fast, slow = both(go)
    np.testing.assert_allclose(fast, slow, atol=1e-14)
    assert np.linalg.norm(fast) == pytest.approx(1.0)


@given(st.integers(1, 6), st.integers(0, 2**31))
def test_permute(n, seed):
    rng = np.random.default_rng(seed)
    amps = random_amps(rng, n)
    perm = random_involution(rng, 1 << n)

    def go():
        a = amps.copy()
        kernels.permute(a, perm)
        return a

    fast, slow = both(go)
    np.testing.assert_array_equal(fast, slow)
    np.testing.assert_array_equal(slow, amps[perm])


@given(st.integers(2, 5), st.integers(0, 2**31), st.integers(0, 40))
def test_oracle_rounds(n, seed, rounds):
    rng = np.random.default_rng(seed)
    amps = random_amps(rng, n)
    perm = random_involution(rng, 1 << n)
    draws = rng.random(rounds) < 0.5
    masks = np.array([1 << q for q in range(int(rng.integers(1, n + 1)))])
    theta = rng.uniform(-1, 1)

    def go():
        a = amps.copy()
        kernels.oracle_rounds(a, perm, draws, masks, np.cos(theta), np.sin(theta))
        return a

    fast, slow = both(go)
    np.testing.assert_allclose(fast, slow, atol=1e-12)


@given(st.integers(1, 5), st.integers(0, 2**31), st.integers(1, 8))
def test_phase_rounds(n, seed, r):
    rng = np.random.default_rng(seed)
    amps = random_amps(rng, n)
    index = rng.choice(1 << n, size=int(rng.integers(1, 1 << n)), replace=False)
    draws = rng.random(int(rng.integers(0, 30))) < 0.7
    phase = np.exp(1j * np.pi / r)

    def go():
        a = amps.copy()
        kernels.phase_rounds(a, index, draws, phase)
        return a

    fast, slow = both(go)
    np.testing.assert_allclose(fast, slow, atol=1e-12)


def test_apply_G_backends_agree():
    layout = RegisterLayout([("Z", 2), ("B", 1), ("S", 1)])
    f = TruthTable.marked(2, [1])
    config = FaultyOracleConfig(f, 0.5)
    state = new_basis_state(layout, {"Z": "01", "B": "0"})

    def go():
        return apply_G(state, f, 37, config, FaultTrace(4, "g")).amplitudes

    fast, slow = both(go)
    np.testing.assert_allclose(fast, slow, atol=1e-12)


def test_robust_evolve_backends_agree():
    algo = robustify(grover_algorithm(2, 1), 1.2, 0.2)
    f = TruthTable.marked(2, [3])
    assert algo.t == compute_t("algorithm", 1.2, 0.2, 1, 1)

    def go():
        state, _ = evolve(algo, f, trace=FaultTrace(9, "faults"))
        return state.amplitudes

    fast, slow = both(go)
    np.testing.assert_allclose(fast, slow, atol=1e-10)


def test_set_backend():
    previous = kernels.get_backend()
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")
    assert kernels.get_backend() == previous
    kernels.set_backend("numpy")
    assert kernels.get_backend() == "numpy"
    kernels.set_backend(previous)
