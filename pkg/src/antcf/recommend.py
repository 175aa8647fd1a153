"""Read-only recommendation over a model: neighbors, rating prediction, top-N ranking.

:class:`SimilarityIndex` packs the pheromone vectors of a model into
row-normalized sparse matrices so that one anchor is compared against every
user or item with a single sparse product.  The module-level functions build
a throwaway index per call; use the index directly for bulk work.

Orderings sort by similarity rounded to ``SIM_DECIMALS`` places, descending,
then by id ascending, so that float reassociation noise cannot reorder
mathematically tied entries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from .training import EXPLICIT, Model

SIM_DECIMALS = 12


class UnknownEntityError(LookupError):
    pass


@dataclass
class NeighborList:
    anchor: str
    neighbors: List[Tuple[str, float]] = field(default_factory=list)

    @property
    def ids(self) -> List[str]:
        return [n for n, _ in self.neighbors]


@dataclass
class RankedList:
    user: str
    entries: List[Tuple[str, float]] = field(default_factory=list)

    @property
    def items(self) -> List[str]:
        return [v for v, _ in self.entries]

    def rank(self, item: str) -> Optional[int]:
        """1-based position of ``item``, None if absent."""
        for p, (v, _) in enumerate(self.entries):
            if v == item:
                return p + 1
        return None

    def __len__(self):
        return len(self.entries)


def top_order(sims: np.ndarray, n: int, allowed: Optional[np.ndarray] = None) -> np.ndarray:
    """Indices of the ``n`` best entries: rounded similarity descending, index ascending.

    Indices follow sorted-id order, so index ascending is id ascending.
    """
    keys = np.round(sims, SIM_DECIMALS)
    idx = np.arange(len(sims)) if allowed is None else np.flatnonzero(allowed)
    if n <= 0 or len(idx) == 0:
        return idx[:0]
    k = keys[idx]
    if n < len(idx):
        # keep everything tied with the n-th best, then order exactly
        thresh = np.partition(-k, n - 1)[n - 1]
        sel = -k <= thresh
        idx, k = idx[sel], k[sel]
    order = np.lexsort((idx, -k))
    return idx[order[:n]]


class _Side:
    def __init__(self, states: Dict, type_index: Dict[str, int]):
        self.ids = sorted(states)
        self.pos = {e: i for i, e in enumerate(self.ids)}
        indptr, indices, data = [0], [], []
        for e in self.ids:
            ph = states[e].pheromones
            for t, a in ph.items():
                indices.append(type_index[t])
                data.append(a)
            indptr.append(len(indices))
        M = sp.csr_matrix(
            (np.array(data, dtype=float), np.array(indices, dtype=np.int64), np.array(indptr, dtype=np.int64)),
            shape=(len(self.ids), len(type_index)),
        )
        norms = np.sqrt(np.asarray(M.multiply(M).sum(axis=1)).ravel())
        inv = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
        self.normed = sp.csr_matrix(sp.diags(inv) @ M)
        self.normed_t = sp.csr_matrix(self.normed.T)

    def sims(self, row: int, other: "_Side") -> np.ndarray:
        s = (self.normed[row] @ other.normed_t).toarray().ravel()
        return np.clip(s, -1.0, 1.0)

    def sims_block(self, rows: Sequence[int], other: "_Side") -> np.ndarray:
        s = (self.normed[list(rows)] @ other.normed_t).toarray()
        return np.clip(s, -1.0, 1.0)


class SimilarityIndex:
    """Similarity, neighbor and ranking queries over one (unchanging) model state.

    The index reads the model once at construction; train a snapshot
    (:meth:`Model.snapshot`) if the model must keep learning meanwhile.
    """

    def __init__(self, model: Model):
        self.model = model
        types = sorted({t for s in model.users.values() for t in s.pheromones}
                       | {t for s in model.items.values() for t in s.pheromones})
        type_index = {t: i for i, t in enumerate(types)}
        self.users = _Side(model.users, type_index)
        self.items = _Side(model.items, type_index)
        self._user_nbrs: Dict[str, NeighborList] = {}
        self._item_nbrs: Dict[str, NeighborList] = {}

    def _neighbors(self, side: _Side, anchor: str, n: int, sims: Optional[np.ndarray] = None) -> NeighborList:
        row = side.pos.get(anchor)
        if row is None:
            raise UnknownEntityError(f"unknown id {anchor!r}")
        if sims is None:
            sims = side.sims(row, side)
        allowed = np.ones(len(side.ids), dtype=bool)
        allowed[row] = False
        order = top_order(sims, n, allowed)
        return NeighborList(anchor, [(side.ids[i], float(sims[i])) for i in order])

    def user_neighbors(self, user: str, n: Optional[int] = None) -> NeighborList:
        n = self.model.params.neighborhood_size if n is None else n
        return self._neighbors(self.users, user, n)

    def item_neighbors(self, item: str, n: Optional[int] = None) -> NeighborList:
        n = self.model.params.neighborhood_size if n is None else n
        return self._neighbors(self.items, item, n)

    def precompute_neighbors(self, users: Sequence[str] = (), items: Sequence[str] = (), chunk: int = 256) -> None:
        """Fill the neighbor caches used by :meth:`predict` in blocks of rows."""
        n = self.model.params.neighborhood_size
        for side, ids, cache in ((self.users, users, self._user_nbrs), (self.items, items, self._item_nbrs)):
            todo = sorted({e for e in ids if e in side.pos and e not in cache})
            for lo in range(0, len(todo), chunk):
                block = todo[lo:lo + chunk]
                S = side.sims_block([side.pos[e] for e in block], side)
                for e, sims in zip(block, S):
                    cache[e] = self._neighbors(side, e, n, sims)

    def _cached(self, side, cache, anchor):
        nl = cache.get(anchor)
        if nl is None:
            nl = cache[anchor] = self._neighbors(side, anchor, self.model.params.neighborhood_size)
        return nl

    def predict(self, user: str, item: str) -> float:
        """Global mean plus weighted neighbor deviations from both sides, clamped to the scale."""
        m = self.model
        p = m.params
        if m.mode != EXPLICIT:
            raise ValueError("rating prediction needs an explicit-mode model")
        base = m.stats.mean(p)
        if user not in m.users or item not in m.items:
            return base

        num = den = 0.0
        for nb, s in self._cached(self.users, self._user_nbrs, user).neighbors:
            r = m.rated(nb).get(item)
            if r is None:
                continue
            w = abs(s)
            num += (s if p.signed_weighting else w) * (r - m.users[nb].mean)
            den += w
        user_term = num / den if den > 0 else 0.0

        mine = m.rated(user)
        num = den = 0.0
        for nb, s in self._cached(self.items, self._item_nbrs, item).neighbors:
            r = mine.get(nb)
            if r is None:
                continue
            w = abs(s)
            num += (s if p.signed_weighting else w) * (r - m.items[nb].mean)
            den += w
        item_term = num / den if den > 0 else 0.0

        return min(p.rating_max, max(p.rating_min, base + user_term + item_term))

    def item_scores(self, user: str) -> np.ndarray:
        """Cosine between ``user`` and every item, in sorted item-id order."""
        return self.users.sims(self.users.pos[user], self.items)

    def rank(self, user: str, n: Optional[int] = None, exclude_rated: bool = True) -> RankedList:
        n = self.model.params.top_n if n is None else n
        row = self.users.pos.get(user)
        if row is None:
            return RankedList(user)
        sims = self.users.sims(row, self.items)
        allowed = None
        if exclude_rated:
            allowed = np.ones(len(self.items.ids), dtype=bool)
            for v in self.model.rated(user):
                j = self.items.pos.get(v)
                if j is not None:
                    allowed[j] = False
        order = top_order(sims, n, allowed)
        return RankedList(user, [(self.items.ids[j], float(sims[j])) for j in order])


def user_neighbors(user: str, model: Model, n: Optional[int] = None) -> NeighborList:
    return SimilarityIndex(model).user_neighbors(user, n)


def item_neighbors(item: str, model: Model, n: Optional[int] = None) -> NeighborList:
    return SimilarityIndex(model).item_neighbors(item, n)


def predict_rating(user: str, item: str, model: Model) -> float:
    return SimilarityIndex(model).predict(user, item)


def rank_items(user: str, model: Model, n: Optional[int] = None, exclude_rated: bool = True) -> RankedList:
    return SimilarityIndex(model).rank(user, n, exclude_rated)
