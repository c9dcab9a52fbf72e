"""Lower block unitaries to one-qubit gates and CNOTs.

Pipeline: Givens two-level factorisation, Gray-code routing of each
two-level factor onto a multi-controlled one-qubit gate, then the standard
recursive expansion of multi-controlled gates (square-root trick) down to
controlled-U, which costs two CNOTs and at most five one-qubit gates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import schur

from .gates import PAULI_X, matrix_from_json, matrix_to_json
from .models import UNITARY_Q, DiscretePMF, outcome_index
from .simulator import CircuitDescriptor, GateOp, STANDARD_GATES
from .statevector import MAX_QUBITS, apply_matrix, zero_state

MAX_COMPILE_BLOCK = 6
UNITARY_ATOL = 1e-10
IDENTITY_ATOL = 1e-13


@dataclass(frozen=True)
class TwoLevel:
    """Unitary acting as ``matrix`` on basis states (i, j), i < j, and as identity elsewhere."""

    i: int
    j: int
    matrix: np.ndarray

    def dense(self, dim: int) -> np.ndarray:
        out = np.eye(dim, dtype=complex)
        idx = [self.i, self.j]
        out[np.ix_(idx, idx)] = self.matrix
        return out


def _check_unitary(U, atol=UNITARY_ATOL) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {U.shape}")
    defect = np.abs(U.conj().T @ U - np.eye(len(U))).max()
    if defect > atol:
        raise ValueError(f"matrix is not unitary (defect {defect:.3g})")
    return U


def two_level_decompose(U) -> list[TwoLevel]:
    """Factors F_1..F_L with U = F_1 F_2 ... F_L.

    Sub-diagonal entries are cleared column by column with Givens rotations
    on rows (c, r); the leftover diagonal becomes phase factors on the pairs
    (2i, 2i+1). Consecutive factors on the same pair are merged and identity
    factors dropped, so a 2x2 input yields at most one factor.
    """
    W = _check_unitary(U).copy()
    N = len(W)
    rotations = []
    for c in range(N - 1):
        for r in range(c + 1, N):
            b = W[r, c]
            if abs(b) < IDENTITY_ATOL:
                continue
            a = W[c, c]
            nrm = math.hypot(abs(a), abs(b))
            G = np.array([[np.conj(a), np.conj(b)], [-b, a]], dtype=complex) / nrm
            W[[c, r], :] = G @ W[[c, r], :]
            rotations.append(TwoLevel(c, r, G.conj().T))
    diag = np.diag(W)
    phases = []
    if N == 1:
        raise ValueError("need at least a 2x2 matrix")
    for k in range(0, N, 2):
        phases.append(TwoLevel(k, k + 1, np.diag([diag[k], diag[k + 1]])))
    return _merge(rotations + phases)


def _merge(factors: list[TwoLevel]) -> list[TwoLevel]:
    out: list[TwoLevel] = []
    for f in factors:
        if out and (out[-1].i, out[-1].j) == (f.i, f.j):
            f = TwoLevel(f.i, f.j, out.pop().matrix @ f.matrix)
        if np.abs(f.matrix - np.eye(2)).max() > IDENTITY_ATOL:
            out.append(f)
    return out


def product_of_factors(factors, dim: int) -> np.ndarray:
    out = np.eye(dim, dtype=complex)
    for f in factors:
        out = out @ f.dense(dim)
    return out


@dataclass(frozen=True)
class NativeGate:
    name: str  # "u1q" or "cnot"
    qubits: tuple
    matrix: np.ndarray | None = None

    def to_json(self) -> dict:
        d = {"name": self.name, "qubits": list(self.qubits)}
        if self.matrix is not None:
            d["matrix"] = matrix_to_json(self.matrix)
        return d


@dataclass
class NativeCircuit:
    qubits: int
    gates: list = field(default_factory=list)

    def __post_init__(self):
        for g in self.gates:
            _check_native(g, self.qubits)

    def append(self, g: NativeGate):
        _check_native(g, self.qubits)
        self.gates.append(g)

    def counts(self) -> dict:
        u = sum(g.name == "u1q" for g in self.gates)
        return {"u1q": u, "cnot": len(self.gates) - u, "total": len(self.gates)}

    def apply(self, psi: np.ndarray) -> np.ndarray:
        for g in self.gates:
            M = g.matrix if g.name == "u1q" else STANDARD_GATES["cnot"]
            psi = apply_matrix(psi, M, g.qubits, self.qubits)
        return psi

    def unitary(self) -> np.ndarray:
        if self.qubits > 12:
            raise ValueError("dense unitary only for up to 12 qubits")
        return self.apply(np.eye(2**self.qubits, dtype=complex))

    def to_descriptor(self) -> CircuitDescriptor:
        return CircuitDescriptor(self.qubits, [GateOp(g.name, g.qubits, g.matrix) for g in self.gates])

    def to_json(self) -> dict:
        return {"qubits": self.qubits, "gates": [g.to_json() for g in self.gates]}

    @classmethod
    def from_json(cls, obj: dict) -> "NativeCircuit":
        gates = [NativeGate(g["name"], tuple(g["qubits"]),
                            matrix_from_json(g["matrix"]) if "matrix" in g else None)
                 for g in obj["gates"]]
        return cls(int(obj["qubits"]), gates)


def _check_native(g: NativeGate, nq: int):
    if g.name == "u1q":
        if len(g.qubits) != 1 or g.matrix is None or np.shape(g.matrix) != (2, 2):
            raise ValueError("u1q needs one qubit and a 2x2 matrix")
    elif g.name == "cnot":
        if len(g.qubits) != 2 or g.qubits[0] == g.qubits[1]:
            raise ValueError("cnot needs distinct control and target")
    else:
        raise ValueError(f"non-native gate {g.name!r}")
    if min(g.qubits) < 0 or max(g.qubits) >= nq:
        raise ValueError(f"gate {g.name} on {g.qubits} outside 0..{nq - 1}")


def _rz(a):
    return np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)])


def _ry(a):
    c, s = math.cos(a / 2), math.sin(a / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def zyz_angles(U) -> tuple[float, float, float, float]:
    """(alpha, beta, gamma, delta) with U = e^{i alpha} Rz(beta) Ry(gamma) Rz(delta)."""
    U = np.asarray(U, dtype=complex)
    alpha = float(np.angle(np.linalg.det(U))) / 2
    V = U * np.exp(-1j * alpha)
    a, b = V[0, 0], V[1, 0]
    gamma = 2 * math.atan2(abs(b), abs(a))
    if abs(b) < 1e-14:
        plus, minus = -2 * float(np.angle(a)), 0.0
    elif abs(a) < 1e-14:
        plus, minus = 0.0, 2 * float(np.angle(b))
    else:
        plus, minus = -2 * float(np.angle(a)), 2 * float(np.angle(b))
    beta, delta = (plus + minus) / 2, (plus - minus) / 2
    return alpha, beta, gamma, delta


def _sqrt_unitary(U) -> np.ndarray:
    T, Z = schur(np.asarray(U, dtype=complex), output="complex")
    return Z @ np.diag(np.sqrt(np.diag(T))) @ Z.conj().T


def _is_identity(M) -> bool:
    return np.abs(M - np.eye(2)).max() < IDENTITY_ATOL


def _controlled(control: int, target: int, U) -> list[NativeGate]:
    """Controlled-U as C, CNOT, B, CNOT, A on the target and a phase on the control."""
    alpha, beta, gamma, delta = zyz_angles(U)
    A = _rz(beta) @ _ry(gamma / 2)
    B = _ry(-gamma / 2) @ _rz(-(delta + beta) / 2)
    C = _rz((delta - beta) / 2)
    out = []
    for M, q in ((C, target), (None, None), (B, target), (None, None), (A, target)):
        if M is None:
            out.append(NativeGate("cnot", (control, target)))
        elif not _is_identity(M):
            out.append(NativeGate("u1q", (q,), M))
    phase = np.diag([1.0, np.exp(1j * alpha)])
    if not _is_identity(phase):
        out.append(NativeGate("u1q", (control,), phase))
    return out


def multi_controlled(controls, target: int, U) -> list[NativeGate]:
    """U on ``target`` when every control qubit is 1."""
    controls = list(controls)
    U = np.asarray(U, dtype=complex)
    if not controls:
        return [] if _is_identity(U) else [NativeGate("u1q", (target,), U)]
    if len(controls) == 1:
        if np.allclose(U, PAULI_X, atol=IDENTITY_ATOL):
            return [NativeGate("cnot", (controls[0], target))]
        return _controlled(controls[0], target, U)
    *rest, last = controls
    V = _sqrt_unitary(U)
    return (
        _controlled(last, target, V)
        + multi_controlled(rest, last, PAULI_X)
        + _controlled(last, target, V.conj().T)
        + multi_controlled(rest, last, PAULI_X)
        + multi_controlled(rest, target, V)
    )


def _with_values(controls: dict, target: int, U) -> list[NativeGate]:
    """Multi-controlled U where each control fires on its listed value (0 or 1)."""
    flips = [NativeGate("u1q", (q,), PAULI_X) for q, v in sorted(controls.items()) if v == 0]
    return flips + multi_controlled(sorted(controls), target, U) + flips


def _gray_path(i: int, j: int, m: int) -> list[int]:
    path, cur = [i], i
    for b in range(m - 1, -1, -1):  # flip differing bits from the most significant down
        mask = 1 << b
        if (cur ^ j) & mask:
            cur ^= mask
            path.append(cur)
    return path


def _bit_values(idx: int, m: int) -> list[int]:
    return [(idx >> (m - 1 - q)) & 1 for q in range(m)]


def lower_two_level(f: TwoLevel, m: int) -> list[NativeGate]:
    """Gray-code route ``f`` to a single multi-controlled gate (qubit 0 = leading bit)."""
    path = _gray_path(f.i, f.j, m)
    swaps = []
    for a, b in zip(path[:-2], path[1:-1]):
        bit = m - 1 - (a ^ b).bit_length() + 1
        vals = _bit_values(a, m)
        swaps += _with_values({q: vals[q] for q in range(m) if q != bit}, bit, PAULI_X)
    a, b = path[-2], path[-1]
    bit = m - 1 - (a ^ b).bit_length() + 1
    vals = _bit_values(a, m)
    M = f.matrix if vals[bit] == 0 else PAULI_X @ f.matrix @ PAULI_X
    core = _with_values({q: vals[q] for q in range(m) if q != bit}, bit, M)
    return swaps + core + inverse_gates(swaps)


def inverse_gates(gates) -> list[NativeGate]:
    return [g if g.name == "cnot" else NativeGate(g.name, g.qubits, g.matrix.conj().T)
            for g in reversed(gates)]


def lower_to_native(factors, m: int) -> NativeCircuit:
    """Native circuit on ``m`` qubits whose unitary is the product F_1 ... F_L.

    Gates act in time order, so the last factor is emitted first.
    """
    circ = NativeCircuit(m)
    for f in reversed(list(factors)):
        for g in lower_two_level(f, m):
            circ.append(g)
    return circ


def compile_unitary(U) -> NativeCircuit:
    U = np.asarray(U, dtype=complex)
    m = int(round(math.log2(len(U))))
    if 2**m != len(U):
        raise ValueError("dimension must be a power of two")
    if m > MAX_COMPILE_BLOCK:
        raise ValueError(f"{m}-qubit block exceeds the compile cap of {MAX_COMPILE_BLOCK}")
    return lower_to_native(two_level_decompose(U), m)


def _qubit_permutation(M) -> list[int] | None:
    """If M only permutes qubits, the source qubit feeding each output position."""
    M = np.asarray(M)
    N = len(M)
    m = int(round(math.log2(N)))
    if not np.allclose(np.abs(M), np.round(np.abs(M)), atol=IDENTITY_ATOL) or not np.allclose(
        M.imag, 0, atol=IDENTITY_ATOL
    ):
        return None
    perm = []
    for pos in range(m):
        col = 1 << (m - 1 - pos)  # basis state with only qubit ``pos`` set
        rows = np.flatnonzero(np.abs(M[:, col]) > 0.5)
        if len(rows) != 1 or bin(int(rows[0])).count("1") != 1:
            return None
        perm.append(m - 1 - int(rows[0]).bit_length() + 1)
    # perm[pos] = output position of input qubit pos; confirm on every basis state
    for idx in range(N):
        bits = _bit_values(idx, m)
        out = 0
        for pos, b in enumerate(bits):
            out |= b << (m - 1 - perm[pos])
        if abs(M[out, idx] - 1) > IDENTITY_ATOL:
            return None
    return perm


def _permutation_swaps(perm: list[int]) -> list[tuple[int, int]]:
    """Transpositions (applied in order) sending input qubit q to position perm[q]."""
    cur = list(range(len(perm)))  # cur[pos] = input qubit sitting at pos
    swaps = []
    for pos in range(len(perm)):
        want = perm.index(pos)
        at = cur.index(want)
        if at != pos:
            swaps.append((pos, at))
            cur[pos], cur[at] = cur[at], cur[pos]
    return swaps


def _swap(a: int, b: int) -> list[NativeGate]:
    return [NativeGate("cnot", (a, b)), NativeGate("cnot", (b, a)), NativeGate("cnot", (a, b))]


def compile_descriptor(desc: CircuitDescriptor, max_block: int = MAX_COMPILE_BLOCK) -> NativeCircuit:
    """Lower every gate of ``desc`` in layer order to u1q / cnot."""
    circ = NativeCircuit(desc.qubits)
    for g in sorted(desc.gates, key=lambda g: g.layer):
        M = desc.gate_matrix(g)
        qs = tuple(g.qubits)
        if len(qs) > max_block:
            raise ValueError(f"gate {g.name} spans {len(qs)} qubits; compile cap is {max_block}")
        if len(qs) == 1:
            circ.append(NativeGate("u1q", qs, np.asarray(M, dtype=complex)))
            continue
        if len(qs) == 2 and np.allclose(M, STANDARD_GATES["cnot"], atol=IDENTITY_ATOL):
            circ.append(NativeGate("cnot", qs))
            continue
        perm = _qubit_permutation(M)
        if perm is not None:
            for a, b in _permutation_swaps(perm):
                for ng in _swap(qs[a], qs[b]):
                    circ.append(ng)
            continue
        for ng in compile_unitary(M).gates:
            circ.append(NativeGate(ng.name, tuple(qs[q] for q in ng.qubits), ng.matrix))
    return circ


def max_entry_error(U, circ: NativeCircuit) -> float:
    return float(np.abs(circ.unitary() - np.asarray(U)).max())


def native_pmf(circ: NativeCircuit, params=None) -> DiscretePMF:
    if circ.qubits > MAX_QUBITS:
        raise ValueError(f"dense simulation capped at {MAX_QUBITS} qubits")
    table = np.abs(circ.apply(zero_state(circ.qubits))) ** 2
    return DiscretePMF(circ.qubits, UNITARY_Q, lambda X: table[outcome_index(np.atleast_2d(X))],
                       params, table=table)


def gate_count_bound(m: int) -> int:
    """Shape of the m^3 4^m count for one m-qubit block (constant fixed at 1)."""
    return m**3 * 4**m
