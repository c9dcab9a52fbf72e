"""Dense block gates: the non-unitary A gate, its Gram-Schmidt unitary U, the cyclic shift C.

Basis convention: qubit 0 is the most significant bit of a basis index, so
column ``idx`` of a 2^m x 2^m matrix is the image of ``|x_1 ... x_m>`` with
``x_1`` the leading bit of ``idx``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .numtheory import MAX_BLOCK, _check_prime_shift

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


@dataclass(frozen=True)
class BlockGateParams:
    m: int
    theta: float

    def __post_init__(self):
        if not 2 <= self.m <= MAX_BLOCK:
            raise ValueError(f"block size m must lie in [2, {MAX_BLOCK}], got {self.m}")
        if not math.isfinite(self.theta):
            raise ValueError("theta must be finite")


def x_rotation(angle: float) -> np.ndarray:
    """exp(i * angle * X)."""
    return math.cos(angle) * np.eye(2, dtype=complex) + 1j * math.sin(angle) * PAULI_X


def _basis_bits(m: int) -> np.ndarray:
    idx = np.arange(2**m)
    return (idx[:, None] >> np.arange(m - 1, -1, -1)) & 1


@lru_cache(maxsize=64)
def _build_A(m: int, theta: float) -> np.ndarray:
    bits = _basis_bits(m)
    c, s = math.cos(theta), 1j * math.sin(theta)
    # exp(i t x_prev X)|x_i> has amplitude cos on |x_i> and i sin on |1-x_i> when x_prev = 1
    out = np.empty((2**m, 2**m), dtype=complex)
    for col, x in enumerate(bits):
        v = np.ones(1, dtype=complex)
        for i in range(m):
            q = np.zeros(2, dtype=complex)
            if x[i - 1]:
                q[x[i]], q[1 - x[i]] = c, s
            else:
                q[x[i]] = 1.0
            v = np.kron(v, q)
        out[:, col] = v
    out.flags.writeable = False
    return out


def build_A(params: BlockGateParams) -> np.ndarray:
    """Column ``|x>`` is the product of exp(i theta x_{i-1} X)|x_i> with cyclic x_0 = x_m."""
    return _build_A(params.m, float(params.theta)).copy()


def in_half_set(idx: int, m: int) -> bool:
    """Membership in the canonical half set B^m (leading bit zero)."""
    return not (idx >> (m - 1)) & 1


@lru_cache(maxsize=64)
def _build_U(m: int, theta: float) -> np.ndarray:
    sm = math.sin(theta) ** m
    norm2 = 1.0 - sm * sm
    if norm2 <= 1e-15:
        raise ValueError(f"sin^(2m)(theta) = 1 at theta={theta}; normaliser vanishes")
    A = _build_A(m, theta)
    U = np.array(A)
    full = 2**m - 1
    cnorm = math.sqrt(norm2)
    for idx in range(2**m):
        if in_half_set(idx, m):
            continue
        w = bin(idx).count("1")
        # Gram-Schmidt projection coefficient -<A xbar|A x>; equals i^(m+2|x|) sin^m for odd m
        coef = (-1) ** (m + 1) * (1j) ** (m + 2 * w) * sm
        U[:, idx] = (A[:, idx] + coef * A[:, full ^ idx]) / cnorm
    U.flags.writeable = False
    return U


def build_U(params: BlockGateParams) -> np.ndarray:
    """Unitary obtained by orthonormalising the columns of A against their complements."""
    return _build_U(params.m, float(params.theta)).copy()


@lru_cache(maxsize=32)
def _build_C(m: int) -> np.ndarray:
    N = 2**m
    C = np.zeros((N, N), dtype=complex)
    top = m - 1
    for idx in range(N):
        rotated = ((idx << 1) & (N - 1)) | (idx >> top)
        C[rotated, idx] = 1.0
    C.flags.writeable = False
    return C


def build_C(m: int) -> np.ndarray:
    """Permutation |x_1, ..., x_m> -> |x_2, ..., x_m, x_1>."""
    if not 2 <= m <= MAX_BLOCK:
        raise ValueError(f"block size m must lie in [2, {MAX_BLOCK}], got {m}")
    return _build_C(m).copy()


def final_rotation(p: int, s: int) -> np.ndarray:
    """exp(i X (-pi/4 + pi s / p))."""
    _check_prime_shift(p, s)
    return x_rotation(-math.pi / 4 + math.pi * s / p)


def gate_distance(A, U, norm: str = "frobenius") -> float:
    A, U = np.asarray(A), np.asarray(U)
    if A.shape != U.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {U.shape}")
    if norm == "frobenius":
        return float(np.linalg.norm(A - U, "fro"))
    if norm == "spectral":
        return float(np.linalg.norm(A - U, 2))
    raise ValueError(f"unknown norm {norm!r}")


def unitarity_defect(U) -> float:
    U = np.asarray(U)
    return float(np.abs(U.conj().T @ U - np.eye(U.shape[0])).max())


def closeness_sweep(m: int, thetas) -> tuple[list[dict], float]:
    """Distances between A and U along ``thetas`` plus the fitted log-log slope."""
    rows = []
    for t in thetas:
        bp = BlockGateParams(m, float(t))
        A, U = build_A(bp), build_U(bp)
        rows.append(
            {
                "theta": float(t),
                "frobenius": gate_distance(A, U, "frobenius"),
                "spectral": gate_distance(A, U, "spectral"),
                "unitarity": unitarity_defect(U),
            }
        )
    slope = fit_loglog_slope([r["theta"] for r in rows], [r["frobenius"] for r in rows])
    return rows, slope


def fit_loglog_slope(xs, ys) -> float:
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def matrix_to_json(M) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(M, dtype=complex)]


def matrix_from_json(rows) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("matrix JSON must be a square array of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]
