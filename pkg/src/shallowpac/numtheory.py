"""Modular arithmetic helpers, the majority-mod family and instance parameters."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_C = 0.25


def is_prime(p: int) -> bool:
    """Deterministic trial division; adequate for p up to ~1e8."""
    p = int(p)
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    for q in range(3, math.isqrt(p) + 1, 2):
        if p % q == 0:
            return False
    return True


def primes_up_to(limit: int) -> list[int]:
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for q in range(2, math.isqrt(limit) + 1):
        if sieve[q]:
            sieve[q * q :: q] = False
    return np.flatnonzero(sieve).tolist()


def _check_prime_shift(p, s):
    if p < 3 or not is_prime(p):
        raise ValueError(f"p must be an odd prime, got {p}")
    if not 0 <= s < p:
        raise ValueError(f"shift s must lie in [0, {p}), got {s}")


def majmod(p: int, s: int, k) -> int | np.ndarray:
    """Majority-mod-p bit of an integer (or integer array) ``k`` shifted by ``s``.

    The residue ``(k + s) mod p`` is compared against ``p/2``; for odd ``p``
    the tie cannot happen.
    """
    _check_prime_shift(p, s)
    r = np.mod(np.asarray(k) + s, p)
    out = (2 * r > p).astype(np.int8)
    return int(out) if out.ndim == 0 else out


def parity(x) -> int:
    return weight(x) & 1


def weight(x) -> int:
    """Hamming weight."""
    return int(np.sum(as_bits(x)))


def signed_weight(x, h) -> int:
    """Sum of ``x_i * (-1)**h_i``; the exact integer, not reduced mod anything."""
    x, h = as_bits(x), as_bits(h)
    if x.shape != h.shape:
        raise ValueError(f"length mismatch: |x|={x.size}, |h|={h.size}")
    return int(np.sum(x * (1 - 2 * h.astype(np.int64))))


def as_bits(x) -> np.ndarray:
    """Accept '0101' strings, sequences or arrays of 0/1 and return an int8 array."""
    if isinstance(x, str):
        if x and set(x) - {"0", "1"}:
            raise ValueError(f"not a bitstring: {x!r}")
        return np.frombuffer(x.encode(), dtype=np.uint8).astype(np.int8) - ord("0")
    arr = np.asarray(x, dtype=np.int8)
    if arr.size and (arr.min() < 0 or arr.max() > 1):
        raise ValueError("bit arrays may contain only 0 and 1")
    return arr


def bits_to_str(x) -> str:
    return "".join("1" if b else "0" for b in np.asarray(x).ravel())


MAX_BLOCK = 10  # largest dense block gate (2^10 x 2^10)


def balanced_sizes(total: int, m: int) -> list[int]:
    """Sizes of ``total // m`` near-equal blocks covering ``total`` qubits, larger ones last."""
    k = total // m
    base, extra = divmod(total, k)
    return [base] * (k - extra) + [base + 1] * extra


def default_block_size(n: int, c: float = DEFAULT_C) -> int:
    """ceil(2/c + 1), lowered until every block of the partition fits in MAX_BLOCK."""
    m = max(2, min(math.ceil(2.0 / c + 1.0), n - 1))
    while m > 2 and max(balanced_sizes(n - 1, m)) > MAX_BLOCK:
        m -= 1
    return m


@dataclass(frozen=True)
class ProblemParams:
    """Instance descriptor for the distribution ``D_{n,p,s}``.

    ``n`` counts tree vertices including the root, so samples carry
    ``n - 1`` edge bits, ``n - 1`` vertex bits and one output bit.
    ``theta`` is derived (``pi / p``) and cannot be passed in.
    """

    n: int
    p: int
    s: int = 0
    m: int | None = None
    c: float = DEFAULT_C
    theta: float = field(init=False, repr=False)

    def __post_init__(self):
        n, p, s = int(self.n), int(self.p), int(self.s)
        if n < 3 or n % 2 == 0:
            raise ValueError(f"n must be odd and >= 3 (full balanced binary tree), got {n}")
        _check_prime_shift(p, s)
        if not 0.0 < self.c < 1.0 / 3.0:
            raise ValueError(f"c must lie in (0, 1/3), got {self.c}")
        m = default_block_size(n, self.c) if self.m is None else int(self.m)
        if not 2 <= m <= n - 1:
            raise ValueError(f"block size m must satisfy 2 <= m <= n-1 = {n - 1}, got {m}")
        if max(balanced_sizes(n - 1, m)) > MAX_BLOCK:
            raise ValueError(
                f"m={m} with n={n} yields a block of {max(balanced_sizes(n - 1, m))} qubits; "
                f"blocks are capped at {MAX_BLOCK}"
            )
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "theta", math.pi / p)

    @property
    def n_bits(self) -> int:
        """Length of one (d, x, y) outcome."""
        return 2 * self.n - 1

    def with_shift(self, s: int) -> "ProblemParams":
        return ProblemParams(self.n, self.p, s, self.m, self.c)

    def as_dict(self) -> dict:
        return {"n": self.n, "p": self.p, "s": self.s, "m": self.m, "c": self.c}
