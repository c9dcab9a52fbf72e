"""Exact simulation of the unitary generator circuit (the "Q" law, i.e. the target D_{n,p,s}).

Register layout (2n - 1 qubits, qubit 0 first):

    0 .. n-2          edge qubits d_1 .. d_{n-1}
    n-1 .. 2n-3       vertex qubits x_1 .. x_{n-1}
    2n-2              root vertex qubit, measured as y

Two independent routes compute the same Born law: ``q_pmf_dense`` builds the
full statevector, while ``q_state`` / ``q_pmf_rank2`` / ``q_samples_rank2``
use the fact that, once ``d`` is fixed, the pre-measurement state is a sum of
two product states over the gate blocks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .gates import HADAMARD, BlockGateParams, build_A, build_C, build_U, final_rotation
from .models import UNITARY_Q, DiscretePMF, Sample, all_outcomes, outcome_index
from .numtheory import ProblemParams, as_bits, balanced_sizes
from .statevector import MAX_QUBITS, apply_matrix
from .tree import build_tree, pathsum
from .validation import check_random_state, check_samples, split_samples

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def block_partition(n: int, m: int) -> list[list[int]]:
    """Split vertex labels 1..n-1 into ``(n-1) // m`` consecutive blocks of near-equal size.

    Every block has at least ``m`` qubits (so each gate error is O(theta^m));
    sizes differ by at most one, with the larger blocks last.
    """
    if not 2 <= m <= n - 1:
        raise ValueError(f"block size m must satisfy 2 <= m <= n-1 = {n - 1}, got {m}")
    return partition_sizes_to_blocks(balanced_sizes(n - 1, m))


def partition_sizes_to_blocks(sizes) -> list[list[int]]:
    blocks, start = [], 1
    for size in sizes:
        blocks.append(list(range(start, start + size)))
        start += size
    return blocks


# The block gate applied after the Hadamard layer is C^-1 U^dagger and the output
# rotation is the adjoint of final_rotation; with these orientations the
# A-gate limit reproduces the cos^2(-pi/4 + pi(k+s)/p) law exactly.


@lru_cache(maxsize=64)
def _block_operator(size: int, theta: float, exact_a: bool = False) -> np.ndarray:
    bp = BlockGateParams(size, theta)
    core = build_A(bp) if exact_a else build_U(bp)
    op = build_C(size).conj().T @ core.conj().T
    op.flags.writeable = False
    return op


def block_operator(size: int, theta: float, *, exact_a: bool = False) -> np.ndarray:
    """Matrix applied to one vertex block (``exact_a`` swaps in the non-unitary A gate)."""
    return _block_operator(size, float(theta), exact_a).copy()


def output_rotation(p: int, s: int) -> np.ndarray:
    return final_rotation(p, s).conj().T


@lru_cache(maxsize=64)
def _hadamard_power(size: int) -> np.ndarray:
    H = np.ones((1, 1), dtype=complex)
    for _ in range(size):
        H = np.kron(H, HADAMARD)
    return H


@lru_cache(maxsize=64)
def _branch_table(size: int, theta: float, exact_a: bool = False) -> np.ndarray:
    """Column ``pat`` = block operator applied to the X-eigenproduct selected by ``pat``.

    ``H^{(x)size} |pat>`` is the product of |+> / |-> with |-> where pat has a 1.
    """
    W = _block_operator(size, theta, exact_a) @ _hadamard_power(size)
    W.flags.writeable = False
    return W


def _bits_to_int(bits: np.ndarray) -> np.ndarray:
    k = bits.shape[-1]
    return bits.astype(np.int64) @ (1 << np.arange(k - 1, -1, -1, dtype=np.int64))


@dataclass
class Rank2State:
    """Vertex-register state for a fixed edge string ``d``.

    ``a_plus * (x)_b v_plus[b] (x) r_plus + a_minus * (x)_b v_minus[b] (x) r_minus``
    """

    blocks: list
    v_plus: list
    v_minus: list
    r_plus: np.ndarray
    r_minus: np.ndarray
    a_plus: complex = 1 / math.sqrt(2)
    a_minus: complex = 1 / math.sqrt(2)

    def amplitude(self, x, y: int) -> complex:
        x = as_bits(x)
        plus, minus = self.a_plus * self.r_plus[y], self.a_minus * self.r_minus[y]
        for blk, vp, vm in zip(self.blocks, self.v_plus, self.v_minus):
            j = int(_bits_to_int(x[np.asarray(blk) - 1]))
            plus *= vp[j]
            minus *= vm[j]
        return complex(plus + minus)

    def branch_overlap(self) -> complex:
        """<branch+|branch-> as a product of per-block overlaps."""
        out = np.vdot(self.r_plus, self.r_minus)
        for vp, vm in zip(self.v_plus, self.v_minus):
            out *= np.vdot(vp, vm)
        return complex(out)

    def norm(self) -> float:
        def sq(vs, r):
            return float(np.prod([np.vdot(v, v).real for v in vs]) * np.vdot(r, r).real)

        cross = np.conj(self.a_plus) * self.a_minus * self.branch_overlap()
        total = abs(self.a_plus) ** 2 * sq(self.v_plus, self.r_plus)
        total += abs(self.a_minus) ** 2 * sq(self.v_minus, self.r_minus) + 2 * cross.real
        return math.sqrt(total)

    def to_vector(self) -> np.ndarray:
        plus = np.ones(1, dtype=complex)
        minus = np.ones(1, dtype=complex)
        for vp, vm in zip(self.v_plus, self.v_minus):
            plus, minus = np.kron(plus, vp), np.kron(minus, vm)
        return self.a_plus * np.kron(plus, self.r_plus) + self.a_minus * np.kron(minus, self.r_minus)


def q_state(params: ProblemParams, d, *, exact_a: bool = False) -> Rank2State:
    d = as_bits(d)
    if d.shape != (params.n - 1,):
        raise ValueError(f"expected {params.n - 1} edge bits")
    h = pathsum(build_tree(params.n), d)
    blocks = block_partition(params.n, params.m)
    v_plus, v_minus = [], []
    for blk in blocks:
        W = _branch_table(len(blk), params.theta, exact_a)
        pat = int(_bits_to_int(h[np.asarray(blk) - 1]))
        v_plus.append(W[:, pat].copy())
        v_minus.append(W[:, pat ^ (2 ** len(blk) - 1)].copy())
    R = output_rotation(params.p, params.s)
    plus, minus = np.array([1, 1]) / math.sqrt(2), np.array([1, -1]) / math.sqrt(2)
    return Rank2State(blocks, v_plus, v_minus, R @ plus, R @ minus)


def _rank2_amplitudes(params, D, Xv, Y, exact_a=False):
    h = pathsum(build_tree(params.n), D)
    R = output_rotation(params.p, params.s)
    r_plus = R @ (np.array([1, 1]) / math.sqrt(2))
    r_minus = R @ (np.array([1, -1]) / math.sqrt(2))
    plus = r_plus[Y] / math.sqrt(2)
    minus = r_minus[Y] / math.sqrt(2)
    for blk in block_partition(params.n, params.m):
        cols = np.asarray(blk) - 1
        W = _branch_table(len(blk), params.theta, exact_a)
        pat = _bits_to_int(h[:, cols])
        xi = _bits_to_int(Xv[:, cols])
        plus = plus * W[xi, pat]
        minus = minus * W[xi, pat ^ (2 ** len(blk) - 1)]
    return plus + minus


def q_pmf_rank2(params: ProblemParams, sample, *, exact_a: bool = False):
    """Born probability of one sample (or an array of rows) via the branch-product form."""
    single = isinstance(sample, Sample)
    X = check_samples([sample] if single else sample, params.n)
    D, Xv, Y = split_samples(X, params.n)
    amp = _rank2_amplitudes(params, D, Xv, Y.astype(np.int64), exact_a)
    probs = np.abs(amp) ** 2 * 2.0 ** (-(params.n - 1))
    return float(probs[0]) if single else probs


def q_conditional_rank2(params: ProblemParams, X) -> np.ndarray:
    """Pr[y | d, x] under the circuit law for each row's own y."""
    X = check_samples(X, params.n)
    D, Xv, Y = split_samples(X, params.n)
    a_own = np.abs(_rank2_amplitudes(params, D, Xv, Y.astype(np.int64))) ** 2
    a_other = np.abs(_rank2_amplitudes(params, D, Xv, 1 - Y.astype(np.int64))) ** 2
    return a_own / (a_own + a_other)


def q_pmf(params: ProblemParams) -> DiscretePMF:
    """Lazily evaluated oracle for the circuit law (rank-2 route)."""
    return DiscretePMF(
        params.n_bits,
        UNITARY_Q,
        lambda X: q_pmf_rank2(params, X),
        params,
        conditional=lambda X: q_conditional_rank2(params, X),
    )


def _categorical(weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    weights = np.clip(weights, 0.0, None)
    cum = np.cumsum(weights, axis=1)
    u = rng.random(weights.shape[0]) * cum[:, -1]
    idx = np.sum(cum < u[:, None], axis=1)
    return np.minimum(idx, weights.shape[1] - 1)


def q_samples_rank2(params: ProblemParams, shots: int, random_state=None, *, exact_a: bool = False):
    """Exact draws from the circuit law, block by block.

    ``d`` is uniform. Each block is then drawn from its exact marginal given
    the blocks already drawn; the marginal keeps one partial amplitude per
    branch plus the product of the remaining blocks' branch overlaps, so the
    cost is O((n/m) 2^m) per shot.
    """
    rng = check_random_state(random_state)
    n = params.n
    out = np.zeros((shots, 2 * n - 1), dtype=np.int8)
    widest = max(len(b) for b in block_partition(n, params.m))
    chunk = max(1, _CHUNK_CELLS >> widest)
    for start in range(0, shots, chunk):
        stop = min(shots, start + chunk)
        out[start:stop] = _q_samples_chunk(params, stop - start, rng, exact_a)
    return out


_CHUNK_CELLS = 1 << 20  # bounds shots * 2^block per working array


def _q_samples_chunk(params, shots, rng, exact_a):
    n = params.n
    out = np.zeros((shots, 2 * n - 1), dtype=np.int8)
    D = rng.integers(0, 2, size=(shots, n - 1), dtype=np.int8)
    out[:, : n - 1] = D
    h = pathsum(build_tree(n), D)
    R = output_rotation(params.p, params.s)
    r_plus = R @ (np.array([1, 1]) / math.sqrt(2))
    r_minus = R @ (np.array([1, -1]) / math.sqrt(2))

    blocks = block_partition(n, params.m)
    tables, pats = [], []
    for blk in blocks:
        W = _branch_table(len(blk), params.theta, exact_a)
        pat = _bits_to_int(h[:, np.asarray(blk) - 1])
        tables.append(W)
        pats.append(pat)
    # suffix[j] = prod_{b >= j} <v_b^+|v_b^-> * <r^+|r^->
    suffix = [None] * (len(blocks) + 1)
    suffix[-1] = np.full(shots, np.vdot(r_plus, r_minus), dtype=complex)
    for j in range(len(blocks) - 1, -1, -1):
        W, pat = tables[j], pats[j]
        full = W.shape[0] - 1
        ov = np.einsum("ij,ij->j", W[:, pat].conj(), W[:, pat ^ full])
        suffix[j] = suffix[j + 1] * ov

    A = np.full(shots, 1 / math.sqrt(2), dtype=complex)
    B = np.full(shots, 1 / math.sqrt(2), dtype=complex)
    for j, blk in enumerate(blocks):
        W, pat = tables[j], pats[j]
        full = W.shape[0] - 1
        alpha = A[:, None] * W[:, pat].T
        beta = B[:, None] * W[:, pat ^ full].T
        w = np.abs(alpha) ** 2 + np.abs(beta) ** 2
        w += 2 * np.real(np.conj(alpha) * beta * suffix[j + 1][:, None])
        xi = _categorical(w, rng)
        rows = np.arange(shots)
        scale = np.sqrt(np.clip(w[rows, xi], 1e-300, None))
        A, B = alpha[rows, xi] / scale, beta[rows, xi] / scale
        k = len(blk)
        bits = (xi[:, None] >> np.arange(k - 1, -1, -1)) & 1
        out[:, n - 2 + np.asarray(blk)] = bits
    wy = np.abs(A[:, None] * r_plus[None, :] + B[:, None] * r_minus[None, :]) ** 2
    out[:, -1] = _categorical(wy, rng)
    return out


def q_sample_rank2(params: ProblemParams, random_state=None) -> Sample:
    return Sample.from_bits(q_samples_rank2(params, 1, random_state)[0], params.n)


def bpm_state(n: int) -> np.ndarray:
    """Binary-tree poor man's GHZ state on 2n - 1 qubits, from its defining superposition."""
    nq = 2 * n - 1
    if nq > MAX_QUBITS:
        raise ValueError(f"dense simulation capped at {MAX_QUBITS} qubits; n={n} needs {nq}")
    D = all_outcomes(n - 1)
    h = pathsum(build_tree(n), D)
    amp = 2.0 ** (-(n - 1) / 2) / math.sqrt(2)
    psi = np.zeros(2**nq, dtype=complex)
    zero = np.zeros((len(D), 1), np.int8)
    psi[outcome_index(np.hstack([D, h, zero]))] = amp
    psi[outcome_index(np.hstack([D, 1 - h, zero + 1]))] = amp
    return psi


def q_statevector_dense(params: ProblemParams, *, exact_a: bool = False) -> np.ndarray:
    n = params.n
    nq = 2 * n - 1
    psi = bpm_state(n)
    for q in range(n - 1, nq):
        psi = apply_matrix(psi, HADAMARD, [q], nq)
    for blk in block_partition(n, params.m):
        psi = apply_matrix(psi, block_operator(len(blk), params.theta, exact_a=exact_a),
                           [n - 2 + i for i in blk], nq)
    return apply_matrix(psi, output_rotation(params.p, params.s), [nq - 1], nq)


def q_pmf_dense(params: ProblemParams, *, exact_a: bool = False) -> DiscretePMF:
    """Dense Born table of the generator circuit (2n - 1 <= 24 qubits)."""
    table = np.abs(q_statevector_dense(params, exact_a=exact_a)) ** 2
    return DiscretePMF(
        params.n_bits,
        UNITARY_Q,
        lambda X: table[outcome_index(np.atleast_2d(X))],
        params,
        table=table,
    )


@dataclass
class GateOp:
    name: str
    qubits: tuple
    matrix: np.ndarray | None = None
    layer: int = 0
    params: dict | None = None  # for parametric gates the matrix is rebuilt from these

    def to_json(self, include_matrix: bool = False) -> dict:
        from .gates import matrix_to_json

        d = {"name": self.name, "qubits": list(self.qubits), "layer": self.layer}
        if self.params is not None:
            d["params"] = dict(self.params)
        if self.matrix is not None and (self.params is None or include_matrix):
            d["matrix"] = matrix_to_json(self.matrix)
        return d


STANDARD_GATES = {"h": HADAMARD, "cnot": CNOT}
PARAMETRIC_GATES = {
    "u_dagger": lambda m, theta: build_U(BlockGateParams(int(m), float(theta))).conj().T,
    "cycle_inverse": lambda m: build_C(int(m)).conj().T,
    "output_rotation": lambda p, s: output_rotation(int(p), int(s)),
}


@dataclass
class CircuitDescriptor:
    qubits: int
    gates: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def gate_matrix(self, g: GateOp) -> np.ndarray:
        if g.matrix is not None:
            return g.matrix
        if g.params is not None and g.name in PARAMETRIC_GATES:
            return PARAMETRIC_GATES[g.name](**g.params)
        try:
            return STANDARD_GATES[g.name]
        except KeyError:
            raise ValueError(f"gate {g.name!r} has no matrix") from None

    def depth(self) -> int:
        return 1 + max((g.layer for g in self.gates), default=-1)

    def to_json(self, include_matrices: bool = False) -> dict:
        out = {"qubits": self.qubits, "gates": [g.to_json(include_matrices) for g in self.gates]}
        if self.meta:
            out["meta"] = self.meta
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "CircuitDescriptor":
        from .gates import matrix_from_json

        gates = []
        for g in obj["gates"]:
            mat = matrix_from_json(g["matrix"]) if "matrix" in g else None
            gates.append(GateOp(g["name"], tuple(g["qubits"]), mat, g.get("layer", 0), g.get("params")))
        desc = cls(int(obj["qubits"]), gates, dict(obj.get("meta", {})))
        for g in desc.gates:
            if not g.qubits or max(g.qubits) >= desc.qubits or min(g.qubits) < 0:
                raise ValueError(f"gate {g.name} references qubits outside 0..{desc.qubits - 1}")
            try:
                M = desc.gate_matrix(g)
            except TypeError as exc:
                raise ValueError(f"gate {g.name}: bad parameters ({exc})") from None
            if np.shape(M) != (2 ** len(g.qubits),) * 2:
                raise ValueError(f"gate {g.name}: matrix does not fit {len(g.qubits)} qubits")
            if g.matrix is None and g.params is not None:
                g.matrix = M
        return desc


def circuit_descriptor(params: ProblemParams) -> CircuitDescriptor:
    """Explicit constant-depth gate list for the generator of ``params``.

    Layers 0-3 prepare the poor man's GHZ state (Hadamards on the vertices,
    then each edge qubit collects the parity of its two endpoint vertices;
    the three CNOT layers are an edge colouring of the tree). Layer 4 is the
    Hadamard layer, layers 5-6 the block gates and the output rotation.
    """
    n = params.n
    nq = 2 * n - 1

    def vq(v):  # tree vertex -> qubit
        return nq - 1 if v == 0 else n - 2 + v

    gates = [GateOp("h", (vq(v),), layer=0) for v in range(n)]
    for i in range(1, n):
        gates.append(GateOp("cnot", (vq(i), i - 1), layer=1))
    for i in range(1, n):
        gates.append(GateOp("cnot", (vq((i - 1) // 2), i - 1), layer=2 if i % 2 else 3))
    gates += [GateOp("h", (vq(v),), layer=4) for v in range(n)]
    for blk in block_partition(n, params.m):
        qs = tuple(n - 2 + i for i in blk)
        bp = BlockGateParams(len(blk), params.theta)
        gates.append(GateOp("u_dagger", qs, build_U(bp).conj().T, layer=5,
                            params={"m": len(blk), "theta": params.theta}))
        gates.append(GateOp("cycle_inverse", qs, build_C(len(blk)).conj().T, layer=6, params={"m": len(blk)}))
    gates.append(GateOp("output_rotation", (nq - 1,), output_rotation(params.p, params.s), layer=5,
                        params={"p": params.p, "s": params.s}))
    return CircuitDescriptor(nq, gates, {"params": params.as_dict()})


def simulate_descriptor(desc: CircuitDescriptor) -> np.ndarray:
    """Final statevector of a descriptor started from |0...0>, gates applied in list order."""
    from .statevector import zero_state

    psi = zero_state(desc.qubits)
    for g in desc.gates:
        psi = apply_matrix(psi, desc.gate_matrix(g), g.qubits, desc.qubits)
    return psi


def descriptor_pmf(desc: CircuitDescriptor, params: ProblemParams | None = None) -> DiscretePMF:
    table = np.abs(simulate_descriptor(desc)) ** 2
    return DiscretePMF(desc.qubits, UNITARY_Q, lambda X: table[outcome_index(np.atleast_2d(X))],
                       params, table=table)
