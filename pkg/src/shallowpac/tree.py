"""Balanced binary tree geometry and the edge-to-vertex path parity map.

Vertices are labelled in level order with the root at 0; vertex ``i`` has
children ``2i+1`` and ``2i+2``. Non-root vertex ``i`` (1-based, matching
``x_i``) owns its parent edge ``d_i``, so both bitstrings are indexed by the
same positions ``0 .. n-2`` in arrays.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .numtheory import as_bits


@dataclass(frozen=True)
class BalancedTree:
    n: int
    parent: tuple  # parent[i] for vertex i in 1..n-1 stored at index i-1; 0 is the root

    @property
    def depth(self) -> int:
        return int(np.floor(np.log2(self.n))) + 1

    def children(self, i: int) -> list[int]:
        return [c for c in (2 * i + 1, 2 * i + 2) if c < self.n]

    def path_edges(self, i: int) -> list[int]:
        """Edges (labelled by their child vertex) on the root -> ``i`` path."""
        out = []
        while i > 0:
            out.append(i)
            i = (i - 1) // 2
        return out[::-1]

    def leaves(self) -> list[int]:
        return [i for i in range(self.n) if 2 * i + 1 >= self.n]


@lru_cache(maxsize=None)
def build_tree(n: int) -> BalancedTree:
    """Level-order full binary tree on ``n`` vertices.

    Every internal vertex has exactly two children, which forces ``n`` odd.
    """
    n = int(n)
    if n < 3 or n % 2 == 0:
        raise ValueError(f"a full balanced binary tree needs odd n >= 3, got {n}")
    return BalancedTree(n=n, parent=tuple((i - 1) // 2 for i in range(1, n)))


def pathsum(tree: BalancedTree, d) -> np.ndarray:
    """Per-vertex parity of the edge bits on the path from the root.

    Accepts a single bitstring or a 2-D array with one edge string per row.
    """
    d = as_bits(d)
    if d.shape[-1] != tree.n - 1:
        raise ValueError(f"expected {tree.n - 1} edge bits, got {d.shape[-1]}")
    h = d.copy()
    # parent index precedes child in level order, so one forward pass suffices
    for i in range(3, tree.n):
        h[..., i - 1] ^= h[..., (i - 1) // 2 - 1]
    return h
