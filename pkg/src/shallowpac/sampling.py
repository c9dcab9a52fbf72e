"""Model-agnostic sample drawing with deterministic per-chunk random streams."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .models import analytic_samples, ideal_samples
from .numtheory import ProblemParams
from .simulator import q_samples_rank2
from .validation import RNG_SCHEME, substream

MODELS = {
    "ideal": ideal_samples,
    "analytic-p": analytic_samples,
    "unitary-q": q_samples_rank2,
}
DEFAULT_CHUNK = 1 << 14


def draw_samples(model: str, params: ProblemParams, shots: int, seed: int = 0, *,
                 chunk: int = DEFAULT_CHUNK, n_jobs: int = 1) -> np.ndarray:
    """``shots`` rows of (d, x, y) from ``model``.

    Shot ``i`` belongs to chunk ``i // chunk`` and chunk ``j`` consumes only
    substream ``j`` of ``seed``, so the output depends on (seed, chunk) and
    never on ``n_jobs``.
    """
    try:
        sampler = MODELS[model]
    except KeyError:
        raise ValueError(f"unknown model {model!r}; choose from {sorted(MODELS)}") from None
    if shots < 0:
        raise ValueError("shots must be non-negative")
    if chunk < 1:
        raise ValueError("chunk must be positive")
    bounds = [(j, min(chunk, shots - start)) for j, start in enumerate(range(0, shots, chunk))]
    if not bounds:
        return np.zeros((0, params.n_bits), dtype=np.int8)

    def work(job):
        j, size = job
        return sampler(params, size, substream(seed, j))

    if n_jobs == 1 or len(bounds) == 1:
        parts = [work(b) for b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(work, bounds))
    return np.concatenate(parts, axis=0)


def sampling_metadata(model: str, params: ProblemParams, shots: int, seed: int, chunk: int) -> dict:
    return {"model": model, "params": params.as_dict(), "shots": shots, "seed": seed,
            "chunk": chunk, "rng": RNG_SCHEME}
