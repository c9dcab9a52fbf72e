"""Recover the hidden shift s from samples by locating the 1/2-crossing of the class votes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .metrics import residue_distribution
from .models import analytic_conditional, signed_class
from .numtheory import ProblemParams, is_prime
from .sampling import draw_samples
from .simulator import CircuitDescriptor, circuit_descriptor
from .validation import RNG_SCHEME, check_probability, check_samples, split_samples


def default_epsilon(p: int) -> float:
    return 1.0 / (7 * p)


def default_tau(p: int) -> float:
    return 0.99 * math.pi / (6 * p)


def required_samples(p: int, delta: float, epsilon: float | None = None) -> int:
    """Hoeffding budget: ceil(p^2 / (2 eps^2) * ln(2p / delta)); with eps = 1/(7p) this is
    ceil(49 p^4 / 2 * ln(2p / delta))."""
    check_probability("delta", delta)
    if p < 3 or not is_prime(p):
        raise ValueError(f"p must be an odd prime, got {p}")
    eps = default_epsilon(p) if epsilon is None else float(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    return math.ceil(p * p / (2 * eps * eps) * math.log(2 * p / delta))


@dataclass(frozen=True)
class LearnerConfig:
    p: int
    n: int
    delta: float = 0.1
    epsilon: float | None = None
    tau: float | None = None
    M: int | None = None
    m: int | None = None

    def __post_init__(self):
        if self.p < 3 or not is_prime(self.p):
            raise ValueError(f"p must be an odd prime, got {self.p}")
        check_probability("delta", self.delta)
        eps = default_epsilon(self.p) if self.epsilon is None else float(self.epsilon)
        if eps <= 0:
            raise ValueError("epsilon must be positive")
        tau = default_tau(self.p) if self.tau is None else float(self.tau)
        if not 0 < tau < math.pi / (6 * self.p):
            raise ValueError(f"tau must lie in (0, pi/(6p)) = (0, {math.pi / (6 * self.p):.6g}), got {tau}")
        if self.M is not None and self.M < 1:
            raise ValueError("M must be at least 1")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "tau", tau)

    @property
    def budget(self) -> int:
        return required_samples(self.p, self.delta, self.epsilon) if self.M is None else int(self.M)

    def problem(self, s: int = 0) -> ProblemParams:
        return ProblemParams(self.n, self.p, s, self.m)


@dataclass
class VoteVector:
    """Per-class agreement votes; entry k estimates cos^2(-pi/4 + pi(k+s)/p)."""

    values: np.ndarray
    counts: np.ndarray = field(default=None)
    agree: np.ndarray = field(default=None)

    @property
    def p(self) -> int:
        return len(self.values)

    def __getitem__(self, k):
        return self.values[k]


def build_vote_vector(samples, params: ProblemParams, weights=None) -> VoteVector:
    """V_k = (p / M) * #{samples in class k with y = parity(x)}.

    ``weights`` turns the rows into weighted pseudo-samples (total weight
    plays the role of M), which gives exact expectations from enumeration.
    """
    X = check_samples(samples, params.n)
    if len(X) == 0:
        raise ValueError("vote vector needs at least one sample")
    D, Xv, Y = split_samples(X, params.n)
    p = params.p
    k = np.mod(signed_class(params, D, Xv), p)
    agree = (Y == (Xv.sum(axis=1) & 1)).astype(float)
    w = np.ones(len(X)) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (len(X),):
        raise ValueError("weights must have one entry per sample")
    hits = np.bincount(k, weights=w * agree, minlength=p)
    counts = np.bincount(k, weights=w, minlength=p)
    return VoteVector(p * hits / w.sum(), counts, hits)


def expected_vote_vector(params: ProblemParams) -> VoteVector:
    """Exact E[V] under the cos^2 law: p * Pr[class k] * cos^2(-pi/4 + pi(k+s)/p)."""
    pk = residue_distribution(params.n - 1, params.p)
    ks = np.arange(params.p)
    return VoteVector(params.p * pk * analytic_conditional(params, ks), pk, pk * analytic_conditional(params, ks))


def limit_vote_vector(p: int, s: int) -> VoteVector:
    """Large-n expectation, where every class has mass exactly 1/p."""
    ks = np.arange(p)
    return VoteVector(np.cos(-np.pi / 4 + np.pi * (ks + s) / p) ** 2)


def find_crossing(V, tau: float) -> int | None:
    """The unique k with |V_k - 1/2| <= tau and V_{k+1} > 1/2 + tau, else None."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    vals = np.asarray(V.values if isinstance(V, VoteVector) else V, dtype=float)
    nxt = np.roll(vals, -1)
    hits = np.flatnonzero((np.abs(vals - 0.5) <= tau) & (nxt > 0.5 + tau))
    return int(hits[0]) if len(hits) == 1 else None


def recover_s(k_star: int, p: int) -> int:
    if not 0 <= k_star < p:
        raise ValueError(f"k* must lie in [0, {p}), got {k_star}")
    return (p - k_star) % p


@dataclass
class GeneratorDescription:
    params: ProblemParams
    circuit: CircuitDescriptor
    provenance: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"params": self.params.as_dict(), "circuit": self.circuit.to_json(),
                "provenance": self.provenance}


@dataclass
class LearnResult:
    status: str
    M: int
    V: VoteVector
    k_star: int | None = None
    s_hat: int | None = None
    generator: GeneratorDescription | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_json(self) -> dict:
        return {
            "s_hat": self.s_hat,
            "status": self.status,
            "M": self.M,
            "V": [float(v) for v in self.V.values],
            "k_star": self.k_star,
            "circuit": self.generator.circuit.to_json() if self.generator else None,
        }


def learn(source, config: LearnerConfig, *, model: str = "analytic-p", seed: int = 0) -> LearnResult:
    """Run the learner on pre-drawn samples or on a live oracle.

    ``source`` is either an array / iterable of samples, or a
    :class:`ProblemParams` naming the target; in the latter case
    ``config.budget`` samples are drawn from ``model`` with ``seed``.
    """
    probe = config.problem()
    if isinstance(source, ProblemParams):
        if (source.n, source.p) != (config.n, config.p):
            raise ValueError("oracle parameters disagree with the learner configuration")
        M = config.budget
        X = draw_samples(model, source, M, seed)
        provenance = {"source": model, "seed": seed, "rng": RNG_SCHEME}
    else:
        X = check_samples(source, config.n)
        if config.M is not None:
            if len(X) < config.M:
                raise ValueError(f"sample file holds {len(X)} rows but M={config.M} were requested")
            X = X[: config.M]
        M = len(X)
        provenance = {"source": "samples"}
    if M == 0:
        raise ValueError("no samples to learn from")
    V = build_vote_vector(X, probe)
    k_star = find_crossing(V, config.tau)
    if k_star is None:
        return LearnResult("failure", M, V)
    s_hat = recover_s(k_star, config.p)
    params = config.problem(s_hat)
    provenance["M"] = M
    gen = GeneratorDescription(params, circuit_descriptor(params), provenance)
    return LearnResult("ok", M, V, k_star, s_hat, gen)
