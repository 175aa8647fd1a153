"""Pheromone vectors, entity state and the sparse vector algebra shared by all modules.

A pheromone vector is a plain ``dict`` mapping a pheromone type (a string)
to a signed amount.  Absent types are zero and no entry ever stores 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Dict, Optional

PheromoneVector = Dict[str, float]


def max_magnitude(ph: PheromoneVector) -> float:
    """Largest absolute amount in ``ph`` (0 for the empty vector)."""
    if not ph:
        return 0.0
    return max(abs(a) for a in ph.values())


def dot(a: PheromoneVector, b: PheromoneVector) -> float:
    if len(a) > len(b):
        a, b = b, a
    return sum(x * b[k] for k, x in a.items() if k in b)


def norm(a: PheromoneVector) -> float:
    return math.sqrt(sum(x * x for x in a.values()))


def cosine_similarity(a: PheromoneVector, b: PheromoneVector) -> float:
    """Cosine of two sparse vectors; 0 when either has zero norm."""
    na, nb = norm(a), norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    s = dot(a, b) / (na * nb)
    # rounding can push |s| a hair past 1
    return max(-1.0, min(1.0, s))


def cutoff(ph: PheromoneVector, sigma: float, type_cap: Optional[int] = None) -> PheromoneVector:
    """Drop entries with ``|amount| < sigma``; optionally keep only the ``type_cap`` largest.

    Ties under the cap are broken by type id, ascending.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    out = {k: a for k, a in ph.items() if abs(a) >= sigma and a != 0.0}
    if type_cap is not None and len(out) > type_cap:
        keep = sorted(out, key=lambda k: (-abs(out[k]), k))[:type_cap]
        out = {k: out[k] for k in keep}
    return out


@dataclass
class EntityState:
    """A user's or item's pheromones plus running rating statistics."""

    id: str
    pheromones: PheromoneVector = field(default_factory=dict)
    rating_count: int = 0
    rating_sum: float = 0.0

    @property
    def mean(self) -> Optional[float]:
        if self.rating_count == 0:
            return None
        return self.rating_sum / self.rating_count


@dataclass
class GlobalStats:
    total_count: int = 0
    total_sum: float = 0.0

    def mean(self, params: "ModelParams") -> float:
        """Global mean rating, or the scale midpoint before any rating."""
        if self.total_count == 0:
            return params.midpoint
        return self.total_sum / self.total_count


@dataclass(frozen=True)
class ModelParams:
    """Model hyper-parameters.

    ``cluster_count=None`` selects ACF mode (one unique pheromone type per user);
    an integer selects IACF with that many cluster types.
    """

    gamma: float = 0.2
    lambda_: float = 1.0
    sigma: float = 0.01
    cluster_count: Optional[int] = 20
    neighborhood_size: int = 20
    top_n: int = 20
    rating_min: float = 1.0
    rating_max: float = 5.0
    type_cap: Optional[int] = None
    signed_weighting: bool = False

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if not self.lambda_ > 0:
            raise ValueError(f"lambda must be > 0, got {self.lambda_}")
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.cluster_count is not None and self.cluster_count < 1:
            raise ValueError(f"cluster_count must be >= 1, got {self.cluster_count}")
        if self.neighborhood_size < 1:
            raise ValueError(f"neighborhood_size must be >= 1, got {self.neighborhood_size}")
        if self.top_n < 1:
            raise ValueError(f"top_n must be >= 1, got {self.top_n}")
        if not self.rating_min < self.rating_max:
            raise ValueError(f"rating_min ({self.rating_min}) must be < rating_max ({self.rating_max})")
        if self.type_cap is not None and self.type_cap < 1:
            raise ValueError(f"type_cap must be >= 1, got {self.type_cap}")

    @property
    def midpoint(self) -> float:
        return (self.rating_min + self.rating_max) / 2.0

    def to_items(self):
        """(name, value) pairs in declaration order, for serialization."""
        return [(f.name, getattr(self, f.name)) for f in fields(self)]
