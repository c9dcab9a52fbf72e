"""Minimal dense statevector kernel (qubit 0 = most significant bit)."""
from __future__ import annotations

import numpy as np

MAX_QUBITS = 24


def zero_state(n_qubits: int) -> np.ndarray:
    if n_qubits > MAX_QUBITS:
        raise ValueError(f"{n_qubits} qubits exceeds the dense cap of {MAX_QUBITS}")
    psi = np.zeros(2**n_qubits, dtype=complex)
    psi[0] = 1.0
    return psi


def apply_matrix(psi: np.ndarray, M: np.ndarray, qubits, n_qubits: int) -> np.ndarray:
    """Apply a 2^k x 2^k matrix to the listed qubits (first listed = leading bit of M).

    Trailing axes of ``psi`` beyond the first are carried along, so a
    ``(2^n, B)`` array is treated as ``B`` independent columns.
    """
    qubits = list(qubits)
    k = len(qubits)
    if M.shape != (2**k, 2**k):
        raise ValueError(f"matrix shape {M.shape} does not match {k} qubits")
    if len(set(qubits)) != k or min(qubits) < 0 or max(qubits) >= n_qubits:
        raise ValueError(f"bad qubit list {qubits} for a {n_qubits}-qubit register")
    shape = psi.shape
    t = psi.reshape((2,) * n_qubits + shape[1:])
    t = np.tensordot(M.reshape((2,) * (2 * k)), t, axes=(list(range(k, 2 * k)), qubits))
    t = np.moveaxis(t, list(range(k)), qubits)
    return np.ascontiguousarray(t).reshape(shape)


def embed(M: np.ndarray, qubits, n_qubits: int) -> np.ndarray:
    """Full 2^n x 2^n operator of ``M`` acting on ``qubits`` (small n only)."""
    return apply_matrix(np.eye(2**n_qubits, dtype=complex), M, qubits, n_qubits)
