"""Independent reference implementations used to check the engine.

These deliberately avoid the production code paths: the edit-distance
oracle is a plain dynamic program (the engine uses bit-parallel LCS), and
the retrieval oracle reduces scores row-by-row and sorts in Python (the
engine uses a matrix product and lexsort).
"""

from __future__ import annotations

import numpy as np


def indel_distance_dp(a: str, b: str) -> int:
    """Insert/delete edit distance by the textbook O(len(a)*len(b)) DP."""
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            if ca == cb:
                cur.append(prev[j - 1])
            else:
                cur.append(min(prev[j], cur[j - 1]) + 1)
        prev = cur
    return prev[-1]


def indel_similarity_oracle(a: str, b: str) -> float:
    la, lb = a.lower(), b.lower()
    if la == lb:
        return 100.0
    return 100.0 * (1.0 - indel_distance_dp(la, lb) / (len(la) + len(lb)))


def exhaustive_top_k(
    matrix: np.ndarray, ids: np.ndarray, query: np.ndarray, k: int
) -> list[tuple[int, float]]:
    """Full-scan argmax-k with the engine's tie rule, computed independently.

    Scores come from an element-wise multiply-and-sum per row rather than a
    matrix product, and ordering comes from Python's sort.
    """
    scores = (matrix * query).sum(axis=1)
    order = sorted(range(len(ids)), key=lambda i: (-scores[i], int(ids[i])))
    return [(int(ids[i]), float(scores[i])) for i in order[: min(k, len(ids))]]
