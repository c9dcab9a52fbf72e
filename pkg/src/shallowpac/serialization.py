"""JSONL sample files and CSV tables."""
from __future__ import annotations

import json

import numpy as np

from .models import Sample
from .numtheory import as_bits, bits_to_str


def format_float(x: float) -> float:
    """Round to 15 significant digits so JSON output is reproducible."""
    return float(f"{float(x):.15g}")


def round_floats(obj):
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, dict):
        return {k: round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return round_floats(obj.tolist())
    return obj


def dumps(obj, **kw) -> str:
    return json.dumps(round_floats(obj), **kw)


def write_samples_jsonl(X: np.ndarray, n: int, fh) -> int:
    X = np.asarray(X)
    for row in X:
        fh.write(json.dumps({"d": bits_to_str(row[: n - 1]), "x": bits_to_str(row[n - 1 : 2 * n - 2]),
                             "y": int(row[-1])}))
        fh.write("\n")
    return len(X)


def read_samples_jsonl(fh, n: int | None = None) -> np.ndarray:
    """Parse JSONL rows ``{"d":..., "x":..., "y":...}`` into an (M, 2n-1) int8 array."""
    rows = []
    for lineno, line in enumerate(fh, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            s = Sample(str(obj["d"]), str(obj["x"]), int(obj["y"]))
            d, x = as_bits(s.d), as_bits(s.x)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"line {lineno}: malformed sample ({exc})") from None
        if s.y not in (0, 1):
            raise ValueError(f"line {lineno}: y must be 0 or 1")
        if n is None:
            n = len(d) + 1
        if len(d) != n - 1 or len(x) != n - 1:
            raise ValueError(f"line {lineno}: expected {n - 1}-bit d and x")
        rows.append(np.concatenate([d, x, [s.y]]))
    if not rows:
        width = 2 * n - 1 if n else 0
        return np.zeros((0, width), dtype=np.int8)
    return np.asarray(rows, dtype=np.int8)
