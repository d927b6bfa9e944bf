import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from noisy_oracle.sim import (
    ControlledX,
    DensityMatrix,
    Gate2x2,
    RegisterLayout,
    RegisterUnitary,
    SimulationError,
    StateVector,
    X_MATRIX,
    angle_difference,
    apply_gate,
    density_from_trajectories,
    diffusion_inplace,
    l2_distance,
    measure_register,
    new_basis_state,
    partial_trace,
    product_state,
    pure_density,
    rotation_gate,
    trace_distance_density,
    trace_distance_pure,
)
from noisy_oracle.rng import substream

PLUS = np.array([1, 1]) / math.sqrt(2)
MINUS = np.array([1, -1]) / math.sqrt(2)
ZB = RegisterLayout([("Z", 2), ("B", 1)])


def zb(z, b):
    return new_basis_state(ZB, {"Z": z, "B": b})


def zpart(z, target):
    zvec = np.zeros(4)
    zvec[int(z, 2)] = 1
    return product_state(ZB, {"Z": zvec, "B": target})


def random_state(layout, rng, real=False):
    v = rng.standard_normal(layout.dim)
    if not real:
        v = v + 1j * rng.standard_normal(layout.dim)
    return StateVector(layout, v / np.linalg.norm(v))


class TestLayout:
    def test_most_significant_first(self):
        layout = RegisterLayout([("Z", 2), ("B", 1), ("S", 2)])
        assert layout.offset("S") == 0
        assert layout.offset("B") == 2
        assert layout.offset("Z") == 3
        assert layout.bit_position("Z", 0) == 4
        assert layout.bit_position("Z", 1) == 3

    def test_bit_positions_are_permutation(self):
        layout = RegisterLayout([("Z", 3), ("B", 2), ("T", 0), ("S", 2)])
        pos = [layout.bit_position(n, q) for n, w in layout.registers for q in range(w)]
        assert sorted(pos) == list(range(layout.total))

    def test_rejects_duplicates_and_cap(self):
        with pytest.raises(SimulationError):
            RegisterLayout([("Z", 1), ("Z", 2)])
        with pytest.raises(SimulationError):
            RegisterLayout([("Z", 25)])
        with pytest.raises(SimulationError):
            RegisterLayout([("Z", -1)])


class TestBasisStates:
    def test_examples(self):
        assert zb("00", "0").amplitudes[0] == 1
        s = zb("11", "1")
        assert s.amplitudes[0b111] == 1
        assert np.count_nonzero(s.amplitudes) == 1

    def test_empty_layout(self):
        s = new_basis_state(RegisterLayout([]), {})
        assert s.amplitudes.tolist() == [1]

    def test_errors(self):
        with pytest.raises(SimulationError):
            zb("0", "0")
        with pytest.raises(SimulationError):
            new_basis_state(ZB, {"Q": "0"})


class TestGates:
    def test_rotation_examples(self):
        assert np.allclose(rotation_gate(0).matrix, np.eye(2))
        s = new_basis_state(RegisterLayout([("S", 1)]))
        plus = apply_gate(s, rotation_gate(-math.pi / 4, "S"))
        assert np.allclose(plus.amplitudes, PLUS, atol=1e-12)
        minus = apply_gate(plus, rotation_gate(math.pi / 2, "S"))
        assert np.allclose(minus.amplitudes, MINUS, atol=1e-12)
        with pytest.raises(SimulationError):
            rotation_gate(float("nan"))

    def test_x_and_cnot(self):
        out = apply_gate(zb("10", "0"), Gate2x2(X_MATRIX, "B"))
        assert np.allclose(out.amplitudes, zb("10", "1").amplitudes)
        layout = RegisterLayout([("S", 1), ("B", 1)])
        for b in "01":
            s = new_basis_state(layout, {"S": "1", "B": b})
            out = apply_gate(s, ControlledX(("S", 0), ("B", 0)))
            assert np.allclose(out.amplitudes, new_basis_state(layout, {"S": "1", "B": str(1 - int(b))}).amplitudes)
        with pytest.raises(SimulationError):
            apply_gate(s, ControlledX(("S", 0), ("S", 0)))

    def test_non_unitary_rejected(self):
        with pytest.raises(SimulationError):
            Gate2x2(np.array([[1, 1], [0, 1]]), "B")

    def test_inverse_pair(self, rng, backend):
        s = random_state(ZB, rng)
        out = apply_gate(apply_gate(s, rotation_gate(-math.pi / 4, "B")), rotation_gate(math.pi / 4, "B"))
        assert np.max(np.abs(out.amplitudes - s.amplitudes)) < 1e-12

    def test_register_unitary_matches_kron(self, rng):
        layout = RegisterLayout([("Z", 2), ("B", 1), ("S", 1)])
        s = random_state(layout, rng)
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
        out = apply_gate(s, RegisterUnitary(q, ("Z",)))
        assert np.allclose(out.amplitudes, np.kron(q, np.eye(4)) @ s.amplitudes)
        # registers given out of layout order
        u, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        out = apply_gate(s, RegisterUnitary(u, ("S", "B")))
        # u acts on (S, B) ordering; conjugate by the swap to get the (B, S) layout order
        swap = np.zeros((4, 4))
        for b in range(2):
            for sv in range(2):
                swap[sv * 2 + b, b * 2 + sv] = 1
        full = np.kron(np.eye(4), swap.T @ u @ swap)
        assert np.allclose(out.amplitudes, full @ s.amplitudes)

    @given(st.lists(st.floats(-10, 10), min_size=1, max_size=40), st.integers(0, 2**32 - 1))
    def test_norm_preserved(self, angles, seed):
        s = random_state(ZB, np.random.default_rng(seed))
        for i, a in enumerate(angles):
            s = apply_gate(s, rotation_gate(a, "B") if i % 2 else rotation_gate(a, "Z", i % 2))
        assert abs(s.norm() - 1) <= 1e-12 * len(angles) + 1e-15

    @given(st.floats(-20, 20), st.floats(-20, 20))
    def test_rotation_composition(self, a, b):
        m = rotation_gate(a).matrix @ rotation_gate(b).matrix
        assert np.max(np.abs(m - rotation_gate(a + b).matrix)) < 1e-12


class TestMetrics:
    def test_angle_examples(self):
        assert angle_difference(zpart("01", PLUS), zpart("01", PLUS), "01") == 0
        assert angle_difference(zb("01", "0"), zb("01", "1"), "01") == pytest.approx(math.pi / 2, abs=1e-15)
        assert angle_difference(zpart("01", PLUS), zb("01", "1"), "01") == pytest.approx(math.pi / 4, abs=1e-15)

    def test_angle_errors(self):
        with pytest.raises(SimulationError):
            angle_difference(zpart("01", np.array([1, 1j]) / math.sqrt(2)), zb("01", "0"), "01")
        with pytest.raises(SimulationError):
            angle_difference(zb("10", "0"), zb("01", "0"), "01")

    def test_l2_examples(self):
        assert l2_distance(zb("00", "0"), zb("00", "0")) == 0
        assert l2_distance(zb("00", "0"), zb("00", "1")) == pytest.approx(math.sqrt(2))
        assert l2_distance(zpart("00", PLUS), zb("00", "1")) == pytest.approx(0.76537, abs=1e-5)
        assert l2_distance(zpart("00", PLUS), zb("00", "1")) == pytest.approx(math.sqrt(2 - math.sqrt(2)), abs=1e-15)

    def test_trace_distance_examples(self):
        one = RegisterLayout([("B", 1)])
        zero = new_basis_state(one, {"B": "0"})
        assert trace_distance_pure(zero, zero) == 0
        assert trace_distance_pure(zero, new_basis_state(one, {"B": "1"})) == pytest.approx(1)
        assert trace_distance_pure(zero, StateVector(one, PLUS)) == pytest.approx(1 / math.sqrt(2))

    def test_trace_distance_below_l2(self, rng):
        for _ in range(1000):
            a, b = random_state(ZB, rng), random_state(ZB, rng)
            assert trace_distance_pure(a, b) <= l2_distance(a, b) + 1e-12

    def test_l2_below_angle(self, rng):
        for _ in range(1000):
            u, v = rng.standard_normal(2), rng.standard_normal(2)
            a, b = zpart("10", u / np.linalg.norm(u)), zpart("10", v / np.linalg.norm(v))
            assert l2_distance(a, b) <= angle_difference(a, b, "10") + 1e-12

    @given(st.floats(0, math.pi))
    def test_angle_matches_acos(self, theta):
        a = zpart("11", np.array([1.0, 0.0]))
        b = zpart("11", np.array([math.cos(theta), math.sin(theta)]))
        assert angle_difference(a, b, "11") == pytest.approx(theta, abs=1e-12)


class TestMeasurement:
    def test_deterministic_outcome(self):
        out, post = measure_register(zb("10", "1"), "B", substream(0))
        assert out == "1"
        assert np.allclose(post.amplitudes, zb("10", "1").amplitudes)

    def test_born_frequencies(self):
        s = zpart("00", PLUS)
        rng = substream(4, "born")
        ones = sum(measure_register(s, "B", rng)[0] == "1" for _ in range(10_000))
        assert abs(ones / 10_000 - 0.5) <= 3 * math.sqrt(0.25 / 10_000)

    def test_collapse_renormalizes(self, rng):
        s = random_state(ZB, rng)
        out, post = measure_register(s, "Z", rng)
        assert post.norm() == pytest.approx(1)
        assert np.all(post.layout.register_values("Z")[np.abs(post.amplitudes) > 0] == int(out, 2))

    def test_repeatable(self, rng):
        s = random_state(ZB, rng)
        a = [measure_register(s, "Z", substream(9, i))[0] for i in range(50)]
        b = [measure_register(s, "Z", substream(9, i))[0] for i in range(50)]
        assert a == b


class TestDensity:
    LAYOUT = RegisterLayout([("B", 1)])

    def test_examples(self):
        zero = new_basis_state(self.LAYOUT, {"B": "0"})
        one = new_basis_state(self.LAYOUT, {"B": "1"})
        assert np.allclose(pure_density(zero).matrix, [[1, 0], [0, 0]])
        assert np.allclose(density_from_trajectories([zero, one]).matrix, np.eye(2) / 2)
        rho = density_from_trajectories([zero] * 10_000)
        assert trace_distance_density(rho, pure_density(zero)) <= 1e-12
        assert trace_distance_density(pure_density(zero), pure_density(one)) == pytest.approx(1)
        assert trace_distance_density(rho, rho) == 0

    def test_pure_cross_check(self, rng):
        for _ in range(100):
            a, b = random_state(ZB, rng), random_state(ZB, rng)
            td = trace_distance_density(pure_density(a), pure_density(b))
            assert abs(td - trace_distance_pure(a, b)) < 1e-10

    def test_caps_and_errors(self):
        with pytest.raises(SimulationError):
            density_from_trajectories([])
        big = RegisterLayout([("Z", 11)])
        with pytest.raises(SimulationError):
            DensityMatrix(big, np.eye(big.dim) / big.dim)
        with pytest.raises(SimulationError):
            DensityMatrix(self.LAYOUT, np.array([[1, 1], [0, 0]]))

    def test_partial_trace_of_product(self, rng):
        layout = RegisterLayout([("Z", 2), ("S", 1)])
        zvec = rng.standard_normal(4)
        zvec /= np.linalg.norm(zvec)
        s = product_state(layout, {"Z": zvec, "S": PLUS})
        reduced = partial_trace(pure_density(s), ["Z"])
        assert np.allclose(reduced.matrix, np.outer(zvec, zvec))
        assert np.allclose(partial_trace(pure_density(s), ["S"]).matrix, np.full((2, 2), 0.5))


def test_diffusion(rng, backend):
    layout = RegisterLayout([("Z", 3)])
    eta = StateVector(layout, np.full(8, 1 / math.sqrt(8)))
    out = eta.copy()
    diffusion_inplace(out, "Z")
    assert np.allclose(out.amplitudes, eta.amplitudes, atol=1e-12)
    v = np.zeros(8)
    v[0], v[1] = 1 / math.sqrt(2), -1 / math.sqrt(2)
    orth = StateVector(layout, v)
    out = orth.copy()
    diffusion_inplace(out, "Z")
    assert np.allclose(out.amplitudes, -v, atol=1e-12)
    s = random_state(layout, rng)
    twice = s.copy()
    diffusion_inplace(twice, "Z")
    diffusion_inplace(twice, "Z")
    assert np.max(np.abs(twice.amplitudes - s.amplitudes)) < 1e-12
