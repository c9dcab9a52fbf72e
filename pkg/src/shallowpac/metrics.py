"""Total-variation metrology, the residue-class DP and the modular-sum checks."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .models import ENUMERATION_CAP, DiscretePMF, EnumerationTooLarge, disagreement, outcome_index
from .numtheory import ProblemParams, is_prime
from .validation import check_samples

LOCAL_INPUT_CAP = 24


def tv_exact(P: DiscretePMF, Q: DiscretePMF) -> float:
    """Half the l1 distance between two enumerable PMFs on the same bitstrings."""
    if P.n_bits != Q.n_bits:
        raise ValueError(f"outcome spaces differ: {P.n_bits} vs {Q.n_bits} bits")
    if P.n_bits > ENUMERATION_CAP:
        raise EnumerationTooLarge(f"{P.n_bits}-bit outcome space exceeds the {ENUMERATION_CAP}-bit cap")
    return 0.5 * float(np.abs(P.dense() - Q.dense()).sum())


def _step_distribution(coefs, p: int) -> list[np.ndarray]:
    steps = []
    for a in coefs:
        a = int(a) % p
        if a == 0:
            raise ValueError("coefficients must be nonzero modulo p")
        step = np.zeros(p)
        step[0] += 0.5
        step[a] += 0.5
        steps.append(step)
    return steps


def _cyclic_convolve(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    p = len(u)
    out = np.zeros(p)
    for shift in np.flatnonzero(v):
        out += v[shift] * np.roll(u, shift)
    return out


def residue_distribution(t: int, p: int) -> np.ndarray:
    """Law of ``sum_i x_i (-1)^{h_i} mod p`` over ``t`` terms with x and h uniform.

    Each term is 0 w.p. 1/2, +1 w.p. 1/4 and -1 w.p. 1/4, so the law is the
    t-fold cyclic convolution of that step, done by repeated squaring.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    step = np.zeros(p)
    step[0] += 0.5
    step[1 % p] += 0.25
    step[-1 % p] += 0.25
    out = np.zeros(p)
    out[0] = 1.0
    while t:
        if t & 1:
            out = _cyclic_convolve(out, step)
        step = _cyclic_convolve(step, step)
        t >>= 1
    return out


def tv_p_ideal_dp(params: ProblemParams) -> float:
    """Exact TV between the cos^2 law and the ideal law, without enumeration.

    Both laws put uniform mass on (d, x) and the ideal conditional is a point
    mass, so the distance is the expected disagreement probability over the
    residue class of the signed weight.
    """
    dist = residue_distribution(params.n - 1, params.p)
    return float(dist @ disagreement(params, np.arange(params.p)))


def tv_bound(n: int, p: int) -> float:
    """1/2 - 1/pi + 1/(2p) plus the finite-size residual p^{3/2} e^{-(n-1)/(2p^2)}."""
    return 0.5 - 1.0 / math.pi + 1.0 / (2 * p) + p**1.5 * math.exp(-(n - 1) / (2.0 * p * p))


def tv_limit(p: int, s: int = 0) -> float:
    """Large-n value (1/p) * sum_k f_s(k): the residue law becomes uniform."""
    return float(np.mean(disagreement(ProblemParams(3, p, s, 2), np.arange(p))))


def tv_empirical(oracle: DiscretePMF, samples, *, mode: str = "joint") -> float:
    """Plug-in TV between the empirical law of ``samples`` and ``oracle``.

    ``joint`` compares full-outcome frequencies; unobserved outcomes count
    through the oracle mass they leave uncovered. This is biased upward
    until the sample count dwarfs the support.

    ``conditional`` assumes both laws share a uniform (d, x) marginal and
    averages, over observed (d, x), the TV between the empirical and oracle
    conditionals of y. It stays usable when every (d, x) is seen once.
    """
    n = (oracle.n_bits + 1) // 2
    X = check_samples(samples, n)
    if len(X) == 0:
        raise ValueError("empirical TV needs at least one sample")
    M = len(X)
    if mode == "joint":
        uniq, counts = np.unique(X, axis=0, return_counts=True)
        probs = oracle.prob(uniq)
        return float(0.5 * (np.abs(counts / M - probs).sum() + max(0.0, 1.0 - probs.sum())))
    if mode == "conditional":
        if oracle.conditional is None:
            raise ValueError(f"{oracle.model} oracle has no conditional form")
        dx, inverse, counts = np.unique(X[:, :-1], axis=0, return_inverse=True, return_counts=True)
        ones = np.bincount(inverse.ravel(), weights=X[:, -1], minlength=len(dx))
        rows1 = np.column_stack([dx, np.ones(len(dx), np.int8)])
        q1 = oracle.conditional(rows1)
        return float(np.sum(counts / M * np.abs(ones / counts - q1)))
    raise ValueError(f"unknown mode {mode!r}; use 'joint' or 'conditional'")


def modsum_uniformity(signs, p: int) -> float:
    """Exact TV between ``sum_i a_i x_i mod p`` (x uniform bits) and uniform on Z_p."""
    if p < 2 or not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    coefs = list(signs)
    if not coefs:
        raise ValueError("need at least one coefficient")
    dist = np.zeros(p)
    dist[0] = 1.0
    for step in _step_distribution(coefs, p):
        dist = _cyclic_convolve(dist, step)
    return 0.5 * float(np.abs(dist - 1.0 / p).sum())


def modsum_uniformity_bruteforce(signs, p: int) -> float:
    coefs = np.asarray(list(signs), dtype=np.int64)
    t = len(coefs)
    xs = (np.arange(2**t)[:, None] >> np.arange(t)) & 1
    hist = np.bincount((xs @ coefs) % p, minlength=p) / 2.0**t
    return 0.5 * float(np.abs(hist - 1.0 / p).sum())


def modsum_bound(t: int, p: int) -> float:
    return math.sqrt(p) * math.exp(-t / p**2)


def cosine_margin(p: int) -> bool:
    """Whether cos^2(-pi/4 + pi/p) exceeds 1/2 + pi/(3p)."""
    if p < 3:
        raise ValueError(f"p must be at least 3, got {p}")
    # cos^2(-pi/4 + a) = (1 + sin 2a) / 2, which avoids cancellation for large p
    return math.sin(2 * math.pi / p) / 2 > math.pi / (3 * p)


@dataclass(frozen=True)
class LocalOutput:
    deps: tuple
    table: str

    def __post_init__(self):
        if len(self.table) != 2 ** len(self.deps) or set(self.table) - {"0", "1"}:
            raise ValueError(f"truth table must be a bitstring of length 2^{len(self.deps)}")


@dataclass(frozen=True)
class LocalFunction:
    """Classical function whose every output bit reads a few input bits.

    Truth tables are indexed big-endian: the first listed dependency is the
    most significant bit of the row index.
    """

    inputs: int
    outputs: tuple

    def __post_init__(self):
        if self.inputs < 0:
            raise ValueError("input arity must be non-negative")
        for out in self.outputs:
            if any(not 0 <= i < self.inputs for i in out.deps):
                raise ValueError(f"dependency out of range 0..{self.inputs - 1}: {out.deps}")
            if len(set(out.deps)) != len(out.deps):
                raise ValueError(f"repeated dependency in {out.deps}")

    @property
    def locality(self) -> int:
        return max((len(o.deps) for o in self.outputs), default=0)

    def evaluate(self, U) -> np.ndarray:
        U = np.atleast_2d(np.asarray(U, dtype=np.int64))
        cols = []
        for out in self.outputs:
            table = np.frombuffer(out.table.encode(), dtype=np.uint8) - ord("0")
            idx = np.zeros(len(U), dtype=np.int64)
            for i in out.deps:
                idx = (idx << 1) | U[:, i]
            cols.append(table[idx])
        return np.column_stack(cols).astype(np.int8) if cols else np.zeros((len(U), 0), np.int8)

    def to_json(self) -> dict:
        return {
            "inputs": self.inputs,
            "outputs": [{"deps": list(o.deps), "table": o.table} for o in self.outputs],
        }

    @classmethod
    def from_json(cls, obj) -> "LocalFunction":
        if isinstance(obj, str):
            obj = json.loads(obj)
        outs = tuple(LocalOutput(tuple(int(i) for i in o["deps"]), str(o["table"])) for o in obj["outputs"])
        return cls(int(obj["inputs"]), outs)


def local_function_pmf(f: LocalFunction, params: ProblemParams | None = None) -> DiscretePMF:
    """Exact output law of ``f`` on uniform inputs, by enumerating all 2^inputs inputs."""
    if f.inputs > LOCAL_INPUT_CAP:
        raise EnumerationTooLarge(f"{f.inputs} inputs exceed the enumeration cap of {LOCAL_INPUT_CAP}")
    width = len(f.outputs)
    if width > ENUMERATION_CAP:
        raise EnumerationTooLarge(f"{width} output bits exceed the {ENUMERATION_CAP}-bit cap")
    table = np.zeros(2**width)
    block = 1 << 16
    for start in range(0, 2**f.inputs, block):
        idx = np.arange(start, min(2**f.inputs, start + block), dtype=np.int64)
        U = (idx[:, None] >> np.arange(f.inputs - 1, -1, -1)) & 1
        table += np.bincount(outcome_index(f.evaluate(U)), minlength=2**width)
    table /= 2.0**f.inputs
    return DiscretePMF(width, "LOCAL", lambda X: table[outcome_index(np.atleast_2d(X))], params, table=table)
