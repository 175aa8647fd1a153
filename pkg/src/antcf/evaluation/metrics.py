"""Accuracy and top-N metrics."""

from __future__ import annotations

import math
from typing import Iterable, Sequence, Set, Tuple

from ..recommend import RankedList


def rmse(pairs: Sequence[Tuple[float, float]]) -> float:
    """Root mean squared error over (truth, prediction) pairs."""
    if len(pairs) == 0:
        raise ValueError("rmse of an empty list")
    return math.sqrt(sum((t - p) ** 2 for t, p in pairs) / len(pairs))


def hitting(recommended: RankedList, relevant: Set[str]) -> Set[str]:
    return {v for v in recommended.items if v in relevant}


def precision_at_n(recommended: RankedList, relevant: Set[str], n: int) -> float:
    """Hits over N.  The denominator stays N even when fewer items were recommended."""
    return len(hitting(recommended, relevant)) / n


def ranking_accumulation(recommended: RankedList, relevant: Set[str], n: int) -> float:
    """Rank-position penalty over the N recommendation slots; lower is better.

    A hit at rank p costs p/N, every other slot (including unfilled ones)
    costs (N+1)/N, so the value lies in [(N+1)/2, N+1].
    """
    if len(recommended) > n:
        raise ValueError(f"recommended list has {len(recommended)} entries, more than N={n}")
    hit_cost = 0.0
    hits = 0
    for p, v in enumerate(recommended.items, start=1):
        if v in relevant:
            hit_cost += p / n
            hits += 1
    return hit_cost + (n - hits) * (n + 1) / n
