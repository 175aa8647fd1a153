"""Synthetic event streams: implicit feedback with drifting interests, and explicit ratings."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Set

import numpy as np

from ..training import RatingEvent

EPOCH = 1136073600  # 2006-01-01
SPAN = 3 * 365 * 86400


@dataclass
class DriftData:
    """Generated stream plus the ground truth needed to check it.

    Items are split into ``groups`` contiguous blocks.  A user with base group
    ``b`` is interested in groups ``b + shift, ..., b + shift + groups_per_user - 1``
    (mod ``groups``), where ``shift = floor(drift_rate * groups * progress)`` and
    progress runs from 0 to 1 across the stream.
    """

    events: List[RatingEvent]
    users: int
    items: int
    groups: int
    groups_per_user: int
    drift_rate: float
    base_group: np.ndarray
    start: int
    span: int

    def item_group(self, item: int) -> int:
        return item * self.groups // self.items

    def group_items(self, g: int) -> range:
        lo = -(-g * self.items // self.groups)
        hi = -(-(g + 1) * self.items // self.groups)
        return range(lo, hi)

    def shift_at(self, ts: int) -> int:
        progress = min(max((ts - self.start) / self.span, 0.0), 1.0 - 1e-12)
        return int(np.floor(self.drift_rate * self.groups * progress))

    def active_groups(self, user: int, ts: int) -> Set[int]:
        b = int(self.base_group[user]) + self.shift_at(ts)
        return {(b + j) % self.groups for j in range(self.groups_per_user)}

    def relevant_items(self, user: int, t0: int, t1: int) -> Set[str]:
        """Items the user may pick at any time in ``[t0, t1]``."""
        groups = set()
        for s in range(self.shift_at(t0), self.shift_at(t1) + 1):
            b = int(self.base_group[user]) + s
            groups.update((b + j) % self.groups for j in range(self.groups_per_user))
        return {str(v) for g in groups for v in self.group_items(g)}


def generate_drift(
    users: int,
    items: int,
    events_per_user: int,
    drift_rate: float,
    seed: int,
    groups: int = 10,
    groups_per_user: int = 1,
    popularity: float = 1.0,
    start: int = EPOCH,
    span: int = SPAN,
) -> DriftData:
    """Implicit events whose per-user interests rotate over item groups at ``drift_rate`` cycles per stream.

    ``drift_rate = 0`` gives stationary preferences.  Within a group, items are
    drawn with Zipf-like weights ``1 / (rank + 1) ** popularity``.
    """
    if users <= 0 or items <= 0 or events_per_user <= 0 or groups <= 0:
        raise ValueError("users, items, events_per_user and groups must be positive")
    if drift_rate < 0:
        raise ValueError(f"drift_rate must be >= 0, got {drift_rate}")
    if items < groups:
        raise ValueError(f"need at least one item per group ({items} items, {groups} groups)")
    groups_per_user = min(groups_per_user, groups)
    rng = np.random.default_rng(seed)
    data = DriftData([], users, items, groups, groups_per_user, drift_rate,
                     rng.integers(groups, size=users), start, span)
    members = [np.array(data.group_items(g)) for g in range(groups)]
    weights = []
    for m in members:
        w = 1.0 / (np.arange(len(m)) + 1.0) ** popularity
        weights.append(w / w.sum())
    # per-user preference over its groups_per_user active slots
    slot_pref = rng.dirichlet(np.ones(groups_per_user), size=users)

    raw = []
    for u in range(users):
        stamps = np.sort(rng.integers(0, span, size=events_per_user)) + start
        slots = rng.choice(groups_per_user, size=events_per_user, p=slot_pref[u])
        for ts, slot in zip(stamps, slots):
            g = (int(data.base_group[u]) + data.shift_at(int(ts)) + int(slot)) % groups
            v = members[g][rng.choice(len(members[g]), p=weights[g])]
            raw.append((int(ts), u, int(v)))
    raw.sort()
    data.events = [RatingEvent(str(u), str(v), None, ts) for ts, u, v in raw]
    return data


def generate_ratings(users: int, items: int, events: int, seed: int, factors: int = 5,
                     start: int = EPOCH, span: int = SPAN) -> List[RatingEvent]:
    """Explicit 1-5 ratings from a low-rank model with user/item biases and noise.

    Item choice is popularity-skewed; timestamps are spread uniformly.
    """
    rng = np.random.default_rng(seed)
    pop = 1.0 / (np.arange(items) + 10.0)
    pop /= pop.sum()
    u = rng.integers(users, size=events)
    v = rng.choice(items, size=events, p=pop)
    uf = rng.normal(0, 0.5, size=(users, factors))
    vf = rng.normal(0, 0.5, size=(items, factors))
    ub = rng.normal(0, 0.4, size=users)
    vb = rng.normal(0, 0.4, size=items)
    score = 3.6 + ub[u] + vb[v] + (uf[u] * vf[v]).sum(axis=1) + rng.normal(0, 0.7, size=events)
    r = np.clip(np.rint(score), 1, 5)
    ts = np.sort(rng.integers(0, span, size=events)) + start
    return [RatingEvent(str(a), str(b), float(c), int(t)) for a, b, c, t in zip(u, v, r, ts)]
