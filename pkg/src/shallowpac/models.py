"""The ideal target law and the analytic cos^2 ("P") law over (d, x, y) outcomes."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .numtheory import ProblemParams, as_bits, bits_to_str, majmod
from .tree import build_tree, pathsum
from .validation import check_random_state, check_samples, split_samples

IDEAL = "IDEAL"
ANALYTIC_P = "ANALYTIC_P"
UNITARY_Q = "UNITARY_Q"

ENUMERATION_CAP = 24  # max outcome bits for dense tables


class EnumerationTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class Sample:
    d: str
    x: str
    y: int

    def to_bits(self) -> np.ndarray:
        return np.concatenate([as_bits(self.d), as_bits(self.x), [self.y]]).astype(np.int8)

    @classmethod
    def from_bits(cls, row, n: int) -> "Sample":
        row = np.asarray(row)
        return cls(bits_to_str(row[: n - 1]), bits_to_str(row[n - 1 : 2 * n - 2]), int(row[-1]))

    def to_json(self) -> dict:
        return {"d": self.d, "x": self.x, "y": int(self.y)}


def all_outcomes(n_bits: int) -> np.ndarray:
    """Every bitstring of length ``n_bits`` in big-endian index order."""
    if n_bits > ENUMERATION_CAP:
        raise EnumerationTooLarge(f"{n_bits}-bit outcome space exceeds the {ENUMERATION_CAP}-bit cap")
    idx = np.arange(2**n_bits, dtype=np.int64)
    shifts = np.arange(n_bits - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(np.int8)


def outcome_index(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.int64)
    weights = 1 << np.arange(X.shape[1] - 1, -1, -1, dtype=np.int64)
    return X @ weights


@dataclass
class DiscretePMF:
    """Probability oracle over fixed-width bitstrings, optionally backed by a dense table.

    ``oracle`` maps an ``(M, n_bits)`` array to ``M`` probabilities.
    ``conditional`` (when available) maps rows to ``Pr[y | d, x]`` for the
    row's own ``y``.
    """

    n_bits: int
    model: str
    oracle: Callable[[np.ndarray], np.ndarray]
    params: ProblemParams | None = None
    table: np.ndarray | None = None
    conditional: Callable[[np.ndarray], np.ndarray] | None = None

    def prob(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X.to_bits() if isinstance(X, Sample) else X, dtype=np.int8))
        if self.table is not None:
            return self.table[outcome_index(X)]
        return np.asarray(self.oracle(X), dtype=float)

    def dense(self) -> np.ndarray:
        if self.table is None:
            self.table = np.asarray(self.oracle(all_outcomes(self.n_bits)), dtype=float)
        return self.table

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["outcome", "probability"])
        for row, pr in zip(all_outcomes(self.n_bits), self.dense()):
            w.writerow([bits_to_str(row), f"{pr:.15g}"])
        return buf.getvalue()


def signed_class(params: ProblemParams, d, x) -> np.ndarray:
    """Signed weight ``sum_i x_i (-1)^{h(d)_i}`` for one or many (d, x) pairs."""
    d, x = as_bits(d), as_bits(x)
    if d.shape != x.shape or d.shape[-1] != params.n - 1:
        raise ValueError(f"d and x must both have {params.n - 1} bits")
    h = pathsum(build_tree(params.n), d)
    return np.sum(x.astype(np.int64) * (1 - 2 * h.astype(np.int64)), axis=-1)


def pmmajmod(params: ProblemParams, d, x):
    """Poor man's majority-mod bit: majmod of the signed weight, XOR parity(x)."""
    k = signed_class(params, d, x)
    out = np.bitwise_xor(majmod(params.p, params.s, k), np.sum(as_bits(x), axis=-1) & 1)
    return int(out) if np.ndim(out) == 0 else out.astype(np.int8)


def standard_pmmajmod(params: ProblemParams, x):
    """The tree-free variant (h identically 0): majmod(|x|) XOR parity(x)."""
    x = as_bits(x)
    w = np.sum(x, axis=-1)
    out = np.bitwise_xor(majmod(params.p, params.s, w), w & 1)
    return int(out) if np.ndim(out) == 0 else out.astype(np.int8)


def analytic_conditional(params: ProblemParams, k):
    """Pr[y = parity(x) | signed class k] under the cos^2 law."""
    val = np.cos(-np.pi / 4 + (np.pi / params.p) * (np.asarray(k) + params.s)) ** 2
    return float(val) if np.ndim(val) == 0 else val


def disagreement(params: ProblemParams, k):
    """Probability that the cos^2 law disagrees with the ideal bit in class ``k``."""
    q = analytic_conditional(params, k)
    return np.where(majmod(params.p, params.s, k) == 0, 1.0 - q, q)


def _uniform_mass(params):
    return 2.0 ** (-(2 * params.n - 2))


def ideal_pmf(params: ProblemParams) -> DiscretePMF:
    def oracle(X):
        D, Xv, Y = split_samples(check_samples(X, params.n), params.n)
        return np.where(Y == pmmajmod(params, D, Xv), _uniform_mass(params), 0.0)

    def conditional(X):
        D, Xv, Y = split_samples(check_samples(X, params.n), params.n)
        return (Y == pmmajmod(params, D, Xv)).astype(float)

    return DiscretePMF(params.n_bits, IDEAL, oracle, params, conditional=conditional)


def _analytic_conditional_rows(params, X):
    D, Xv, Y = split_samples(check_samples(X, params.n), params.n)
    q = analytic_conditional(params, signed_class(params, D, Xv))
    return np.where(Y == (np.sum(Xv, axis=1) & 1), q, 1.0 - q)


def analytic_pmf(params: ProblemParams) -> DiscretePMF:
    return DiscretePMF(
        params.n_bits,
        ANALYTIC_P,
        lambda X: _uniform_mass(params) * _analytic_conditional_rows(params, X),
        params,
        conditional=lambda X: _analytic_conditional_rows(params, X),
    )


def _uniform_dx(params, shots, rng):
    return rng.integers(0, 2, size=(shots, 2 * params.n - 2), dtype=np.int8)


def ideal_samples(params: ProblemParams, shots: int, random_state=None) -> np.ndarray:
    rng = check_random_state(random_state)
    dx = _uniform_dx(params, shots, rng)
    n = params.n
    y = pmmajmod(params, dx[:, : n - 1], dx[:, n - 1 :]) if shots else np.zeros(0, np.int8)
    return np.column_stack([dx, np.asarray(y, np.int8).reshape(-1)]).astype(np.int8)


def analytic_samples(params: ProblemParams, shots: int, random_state=None) -> np.ndarray:
    """Exact draws from the cos^2 law: uniform (d, x), then y from the conditional."""
    rng = check_random_state(random_state)
    dx = _uniform_dx(params, shots, rng)
    n = params.n
    if shots == 0:
        return np.zeros((0, 2 * n - 1), np.int8)
    q = analytic_conditional(params, signed_class(params, dx[:, : n - 1], dx[:, n - 1 :]))
    par = np.sum(dx[:, n - 1 :], axis=1) & 1
    y = np.where(rng.random(shots) < q, par, 1 - par)
    return np.column_stack([dx, y]).astype(np.int8)


def analytic_sample(params: ProblemParams, random_state=None) -> Sample:
    return Sample.from_bits(analytic_samples(params, 1, random_state)[0], params.n)


def ideal_sample(params: ProblemParams, random_state=None) -> Sample:
    return Sample.from_bits(ideal_samples(params, 1, random_state)[0], params.n)
