"""IACF initialization: k-means over users' rating patterns, one pheromone type per cluster."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, TextIO

import numpy as np
import scipy.sparse as sp

from .core import ModelParams
from .training import EXPLICIT, Model, RatingEvent

log = logging.getLogger(__name__)

FRESH_TYPE = "fresh-type"


class ClusteringError(ValueError):
    pass


@dataclass
class RatingPatternVector:
    user_id: str
    pattern: Dict[str, float]


@dataclass
class Clustering:
    """k-means result.  ``centroids[k]`` is sparse over item ids; ``history`` holds per-iteration inertia."""

    assignments: Dict[str, int]
    centroids: List[Dict[str, float]]
    inertia: float
    history: List[float] = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.centroids)

    def export(self, out: TextIO) -> None:
        for u in sorted(self.assignments):
            out.write(f"{u}\t{self.assignments[u]}\n")


def cluster_type(k: int) -> str:
    return f"c{k}"


def build_pattern_vectors(events: Iterable[RatingEvent]) -> List[RatingPatternVector]:
    """One pattern per user; implicit events count as 1.0 and the latest timestamp wins."""
    latest: Dict[str, Dict[str, tuple]] = {}
    for i, ev in enumerate(events):
        value = 1.0 if ev.value is None else float(ev.value)
        row = latest.setdefault(ev.user, {})
        prev = row.get(ev.item)
        # ties on timestamp go to the later input position
        if prev is None or (ev.timestamp, i) >= prev[0]:
            row[ev.item] = ((ev.timestamp, i), value)
    return [
        RatingPatternVector(u, {v: val for v, (_, val) in row.items()})
        for u, row in latest.items()
    ]


def _to_matrix(vectors: Sequence[RatingPatternVector], center: bool):
    cols = sorted({v for pv in vectors for v in pv.pattern})
    col_index = {v: j for j, v in enumerate(cols)}
    indptr, indices, data = [0], [], []
    for pv in vectors:
        vals = pv.pattern
        mu = sum(vals.values()) / len(vals) if (center and vals) else 0.0
        for v, x in vals.items():
            indices.append(col_index[v])
            data.append(x - mu)
        indptr.append(len(indices))
    X = sp.csr_matrix((np.array(data, dtype=float), indices, indptr), shape=(len(vectors), len(cols)))
    X.sum_duplicates()
    X.sort_indices()
    return X, cols


def _count_distinct(X: sp.csr_matrix) -> int:
    rows = set()
    for i in range(X.shape[0]):
        lo, hi = X.indptr[i], X.indptr[i + 1]
        nz = X.data[lo:hi] != 0
        rows.add((tuple(X.indices[lo:hi][nz]), tuple(X.data[lo:hi][nz])))
    return len(rows)


def _sq_dists(X, x_sq, C):
    # ||x||^2 - 2 x.c + ||c||^2, clipped at 0 against cancellation
    d = x_sq[:, None] - 2.0 * np.asarray(X @ C.T) + (C * C).sum(axis=1)[None, :]
    return np.maximum(d, 0.0)


def _plusplus(X, x_sq, k, rng):
    n = X.shape[0]
    centers = [int(rng.integers(n))]
    C = X[centers].toarray()
    closest = _sq_dists(X, x_sq, C)[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = int(rng.choice(n, p=closest / total))
        else:
            # only reachable through cancellation between near-identical rows
            order = np.argsort(-closest, kind="stable")
            idx = int(next(i for i in order if i not in centers))
        centers.append(idx)
        closest = np.minimum(closest, _sq_dists(X, x_sq, X[[idx]].toarray())[:, 0])
    return X[centers].toarray()


def kmeans(
    vectors: Sequence[RatingPatternVector],
    k: int,
    max_iters: int = 100,
    seed: int = 0,
    tol: float = 1e-6,
    center: bool = False,
) -> Clustering:
    """Lloyd's algorithm with k-means++ seeding, Euclidean distance, missing entries as zero.

    Empty clusters are re-seeded with the point farthest from its centroid.
    Stops when assignments are stable, inertia improves by less than ``tol``
    (relative), or after ``max_iters`` iterations.
    """
    if k < 1:
        raise ClusteringError(f"k must be >= 1, got {k}")
    if not vectors:
        raise ClusteringError("kmeans needs at least one vector")
    X, cols = _to_matrix(vectors, center)
    distinct = _count_distinct(X)
    if k > distinct:
        raise ClusteringError(f"k={k} exceeds the number of distinct vectors ({distinct})")

    rng = np.random.default_rng(seed)
    x_sq = np.asarray(X.multiply(X).sum(axis=1)).ravel()
    C = _plusplus(X, x_sq, k, rng)
    n = X.shape[0]
    labels = None
    history: List[float] = []
    for it in range(max_iters):
        D = _sq_dists(X, x_sq, C)
        new_labels = D.argmin(axis=1)
        dist = D[np.arange(n), new_labels]
        inertia = float(dist.sum())
        stable = labels is not None and np.array_equal(labels, new_labels)
        labels = new_labels
        history.append(inertia)
        if stable:
            break
        if len(history) > 1 and history[-2] - inertia <= tol * max(history[-2], 1e-300):
            break
        C = _update_centroids(X, labels, k, dist)
    assignments = {pv.user_id: int(labels[i]) for i, pv in enumerate(vectors)}
    inertia = _exact_inertia(X, C, labels)
    centroids = [{cols[j]: float(C[c, j]) for j in np.flatnonzero(C[c])} for c in range(k)]
    log.info("kmeans k=%d: %d iterations, inertia %.4f", k, len(history), inertia)
    return Clustering(assignments, centroids, inertia, history)


def _exact_inertia(X, C, labels, chunk=1024):
    total = 0.0
    for lo in range(0, X.shape[0], chunk):
        block = X[lo:lo + chunk].toarray() - C[labels[lo:lo + chunk]]
        total += float((block * block).sum())
    return total


def _update_centroids(X, labels, k, dist):
    n = X.shape[0]
    Z = sp.csr_matrix((np.ones(n), (labels, np.arange(n))), shape=(k, n))
    counts = np.asarray(Z.sum(axis=1)).ravel()
    C = np.asarray((Z @ X).todense())
    dist = dist.copy()
    for c in np.flatnonzero(counts == 0):
        far = int(dist.argmax())
        C[c] = X[far].toarray().ravel()
        labels[far] = c
        dist[far] = -1.0
        counts[c] = 1
    nz = counts > 0
    C[nz] /= counts[nz, None]
    return C


def init_iacf(
    user_ids: Iterable[str],
    item_ids: Iterable[str],
    clustering: Clustering,
    params: ModelParams,
    mode: str = EXPLICIT,
) -> Model:
    """Seed every user with its cluster's pheromone type; items start empty."""
    if params.cluster_count != clustering.k:
        params = replace(params, cluster_count=clustering.k)
    model = Model(params, mode)
    # reserve all cluster types so minted fresh types never collide
    model._taken_types.update(cluster_type(c) for c in range(clustering.k))
    for u in user_ids:
        c = clustering.assignments.get(u)
        if c is None:
            raise ClusteringError(f"user {u!r} has no cluster assignment")
        model.add_user(u, cluster_type(c))
    for v in item_ids:
        model.add_item(v)
    return model


def assign_new_user(pattern: Optional[RatingPatternVector], clustering: Clustering):
    """Nearest centroid index for ``pattern`` (ties to the lowest index), or FRESH_TYPE without one."""
    if pattern is None:
        return FRESH_TYPE
    best, best_d = 0, None
    for c, cen in enumerate(clustering.centroids):
        keys = pattern.pattern.keys() | cen.keys()
        d = sum((pattern.pattern.get(k, 0.0) - cen.get(k, 0.0)) ** 2 for k in keys)
        if best_d is None or d < best_d:
            best, best_d = c, d
    return best


def register_user(model: Model, user_id: str, clustering: Clustering, pattern: Optional[RatingPatternVector] = None):
    """Add a late-arriving user to an IACF model using :func:`assign_new_user`."""
    c = assign_new_user(pattern, clustering)
    return model.add_user(user_id, None if c == FRESH_TYPE else cluster_type(c))


def cluster_users(events: Sequence[RatingEvent], k: int, seed: int = 0, max_iters: int = 100,
                  center: bool = False) -> Clustering:
    """k-means over the users of ``events``; ``k`` shrinks to the number of distinct patterns if needed."""
    patterns = build_pattern_vectors(events)
    if not patterns:
        raise ClusteringError("no events to cluster")
    X, _ = _to_matrix(patterns, center)
    k = min(k, _count_distinct(X))
    return kmeans(patterns, k, max_iters=max_iters, seed=seed, center=center)


def fit_iacf(events: Sequence[RatingEvent], params: ModelParams, mode: str = EXPLICIT, seed: int = 0,
             max_iters: int = 100, center: bool = False):
    """Cluster the users of ``events`` and return an untrained IACF model plus the clustering."""
    clustering = cluster_users(events, params.cluster_count or 20, seed, max_iters, center)
    users = list(dict.fromkeys(ev.user for ev in events))
    items = list(dict.fromkeys(ev.item for ev in events))
    return init_iacf(users, items, clustering, params, mode), clustering
