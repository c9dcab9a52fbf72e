"""Input validation and random-stream helpers shared by the estimators."""
from __future__ import annotations

import numbers

import numpy as np

from .numtheory import as_bits

RNG_SCHEME = "numpy.SeedSequence(seed, spawn_key=(chunk,)) -> Philox"


def check_samples(X, n: int) -> np.ndarray:
    """Validate a batch of (d, x, y) rows and return it as an ``int8`` array.

    ``X`` may be a 2-D 0/1 array of width ``2n - 1``, an iterable of such
    rows, or an iterable of :class:`~shallowpac.models.Sample`.
    """
    if isinstance(X, np.ndarray):
        arr = X
    else:
        rows = list(X)
        if rows and hasattr(rows[0], "to_bits"):
            rows = [r.to_bits() for r in rows]
        arr = np.asarray(rows, dtype=np.int8) if rows else np.zeros((0, 2 * n - 1), np.int8)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != 2 * n - 1:
        raise ValueError(f"samples must have shape (M, {2 * n - 1}), got {arr.shape}")
    return as_bits(arr)


def split_samples(X: np.ndarray, n: int):
    """Return the (d, x, y) views of a validated sample array."""
    return X[:, : n - 1], X[:, n - 1 : 2 * n - 2], X[:, 2 * n - 2]


def check_random_state(seed) -> np.random.Generator:
    """Turn None / int / SeedSequence / Generator into a ``numpy`` Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None or isinstance(seed, (numbers.Integral, np.random.SeedSequence)):
        ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        return np.random.Generator(np.random.Philox(ss))
    raise ValueError(f"cannot build a random generator from {seed!r}")


def substream(seed: int, index: int) -> np.random.Generator:
    """Independent counter-based stream number ``index`` derived from ``seed``.

    The same (seed, index) pair always yields the same stream, whichever worker
    consumes it.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def check_probability(name: str, value: float, *, open_interval=True) -> float:
    value = float(value)
    ok = 0.0 < value < 1.0 if open_interval else 0.0 <= value <= 1.0
    if not ok:
        raise ValueError(f"{name} must lie in (0, 1), got {value}")
    return value
