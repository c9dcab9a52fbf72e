import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

from shallowpac.compiler import (
    NativeCircuit,
    NativeGate,
    TwoLevel,
    compile_descriptor,
    compile_unitary,
    gate_count_bound,
    lower_to_native,
    lower_two_level,
    max_entry_error,
    multi_controlled,
    native_pmf,
    product_of_factors,
    two_level_decompose,
    zyz_angles,
)
from shallowpac.gates import BlockGateParams, build_C, build_U
from shallowpac.metrics import tv_exact
from shallowpac.numtheory import ProblemParams
from shallowpac.simulator import HADAMARD, CircuitDescriptor, GateOp, circuit_descriptor, q_pmf_dense


def test_trivial_inputs():
    assert two_level_decompose(np.eye(8)) == []
    U = unitary_group.rvs(2, random_state=1)
    f = two_level_decompose(U)
    assert len(f) == 1 and np.allclose(f[0].matrix, U)
    assert lower_to_native([], 3).gates == []
    with pytest.raises(ValueError):
        two_level_decompose(np.array([[1, 1], [0, 1]]))


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_factor_count_and_product(m):
    N = 2**m
    U = unitary_group.rvs(N, random_state=m)
    f = two_level_decompose(U)
    assert len(f) <= N * (N - 1) // 2 + N
    assert np.abs(product_of_factors(f, N) - U).max() <= 1e-10
    assert two_level_decompose(U)[0].matrix.tolist() == f[0].matrix.tolist()


def test_U_small_roundtrip():
    U = build_U(BlockGateParams(2, math.pi / 5))
    assert np.abs(product_of_factors(two_level_decompose(U), 4) - U).max() <= 1e-10


def test_zyz():
    for seed in range(10):
        U = unitary_group.rvs(2, random_state=seed)
        a, b, g, d = zyz_angles(U)
        rz = lambda t: np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])
        ry = lambda t: np.array([[math.cos(t / 2), -math.sin(t / 2)], [math.sin(t / 2), math.cos(t / 2)]])
        assert np.allclose(np.exp(1j * a) * rz(b) @ ry(g) @ rz(d), U)


def test_controlled_gate_budget():
    U = unitary_group.rvs(2, random_state=4)
    gates = multi_controlled([0], 1, U)
    assert sum(g.name == "u1q" for g in gates) <= 5 and sum(g.name == "cnot" for g in gates) == 2
    ref = np.eye(4, dtype=complex)
    ref[2:, 2:] = U
    assert np.abs(NativeCircuit(2, gates).unitary() - ref).max() < 1e-12


def test_gray_adjacent_factor_is_one_controlled_gate():
    U = unitary_group.rvs(2, random_state=2)
    gates = lower_two_level(TwoLevel(0b010, 0b011, U), 3)
    direct = multi_controlled([0, 1], 2, U)
    # controls fire on (0, 1): the zero-control is conjugated by X, nothing else is added
    assert len(gates) == len(direct) + 2
    assert np.abs(NativeCircuit(3, gates).unitary() - TwoLevel(2, 3, U).dense(8)).max() < 1e-12


@pytest.mark.parametrize("m", [2, 3, 4])
@pytest.mark.parametrize("theta", [math.pi / 8, math.pi / 5, math.pi / 3])
def test_U_compiles(m, theta):
    U = build_U(BlockGateParams(m, theta))
    circ = compile_unitary(U)
    assert max_entry_error(U, circ) <= 1e-8
    assert circ.counts()["total"] <= gate_count_bound(m)
    assert {g.name for g in circ.gates} <= {"u1q", "cnot"}


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10**6))
def test_random_unitaries_roundtrip(m, seed):
    U = unitary_group.rvs(2**m, random_state=seed) if m > 1 else unitary_group.rvs(2, random_state=seed)
    circ = compile_unitary(U)
    assert max_entry_error(U, circ) <= 1e-8
    V = circ.unitary()
    assert np.abs(V.conj().T @ V - np.eye(2**m)).max() <= 1e-9


def test_compile_is_deterministic():
    U = build_U(BlockGateParams(3, 0.4))
    a, b = compile_unitary(U), compile_unitary(U)
    assert len(a.gates) == len(b.gates)
    assert all(x.name == y.name and x.qubits == y.qubits for x, y in zip(a.gates, b.gates))


def test_clifford_descriptor_passes_through():
    desc = CircuitDescriptor(3, [GateOp("h", (0,)), GateOp("cnot", (0, 1)), GateOp("cnot", (1, 2), layer=1)])
    circ = compile_descriptor(desc)
    assert [g.name for g in circ.gates] == ["u1q", "cnot", "cnot"]
    assert np.allclose(circ.gates[0].matrix, HADAMARD)


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_cycles_become_swaps(m):
    C = build_C(m).conj().T
    circ = compile_descriptor(CircuitDescriptor(m, [GateOp("cycle", tuple(range(m)), C)]))
    assert circ.counts() == {"u1q": 0, "cnot": 3 * (m - 1), "total": 3 * (m - 1)}
    assert max_entry_error(C, circ) == 0


def test_full_generator_n5():
    for s in range(3):
        pr = ProblemParams(5, 3, s, 2)
        circ = compile_descriptor(circuit_descriptor(pr))
        assert tv_exact(native_pmf(circ, pr), q_pmf_dense(pr)) <= 1e-8


def test_block_cap_and_json():
    big = CircuitDescriptor(7, [GateOp("u", tuple(range(7)), np.eye(128))])
    with pytest.raises(ValueError):
        compile_descriptor(big)
    circ = compile_unitary(build_U(BlockGateParams(2, 0.3)))
    again = NativeCircuit.from_json(circ.to_json())
    assert np.allclose(again.unitary(), circ.unitary())
    with pytest.raises(ValueError):
        NativeCircuit(2, [NativeGate("swap", (0, 1))])
    with pytest.raises(ValueError):
        NativeCircuit(2, [NativeGate("cnot", (0, 2))])
