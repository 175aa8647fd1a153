"""Incremental pheromone training: evaporation, transmission and cutoff per rating event."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .core import EntityState, GlobalStats, ModelParams, PheromoneVector, cutoff, max_magnitude

log = logging.getLogger(__name__)

EXPLICIT = "explicit"
IMPLICIT = "implicit"
MODES = (EXPLICIT, IMPLICIT)


class TrainingError(ValueError):
    pass


@dataclass(frozen=True)
class RatingEvent:
    """One preference observation.  ``value`` is None for implicit (0/1) data."""

    user: str
    item: str
    value: Optional[float]
    timestamp: int

    @property
    def implicit(self) -> bool:
        return self.value is None


class Model:
    """All user and item state for one ACF/IACF model.

    ``ratings`` keeps each user's latest value per item (None for implicit
    events); the rating-based predictor needs it.  ``seed_types`` records the
    pheromone type each user was seeded with, so that fresh types minted for
    new users never collide with an existing one.
    """

    def __init__(self, params: ModelParams, mode: str = EXPLICIT):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        self.params = params
        self.mode = mode
        self.users: Dict[str, EntityState] = {}
        self.items: Dict[str, EntityState] = {}
        self.stats = GlobalStats()
        self.ratings: Dict[str, Dict[str, Optional[float]]] = {}
        self.seed_types: Dict[str, str] = {}
        self._taken_types: Set[str] = set()
        # last apply_* call: distinct (entity, type) entries read or written
        self.last_touched = 0

    def __eq__(self, other):
        if not isinstance(other, Model):
            return NotImplemented
        return (
            self.params == other.params
            and self.mode == other.mode
            and self.users == other.users
            and self.items == other.items
            and self.stats == other.stats
            and self.ratings == other.ratings
            and self.seed_types == other.seed_types
        )

    def __repr__(self):
        return f"Model(mode={self.mode!r}, users={len(self.users)}, items={len(self.items)}, ratings={self.stats.total_count})"

    def add_user(self, user_id: str, pheromone_type: Optional[str] = None) -> EntityState:
        """Register a user seeded with ``{pheromone_type: 1.0}``.

        Without a type a fresh one is minted (the user id itself unless taken).
        """
        if user_id in self.users:
            raise TrainingError(f"duplicate user id {user_id!r}")
        if pheromone_type is None:
            pheromone_type = self._mint_type(user_id)
        state = EntityState(user_id, {pheromone_type: 1.0})
        self.users[user_id] = state
        self.seed_types[user_id] = pheromone_type
        self._taken_types.add(pheromone_type)
        return state

    def add_item(self, item_id: str) -> EntityState:
        if item_id in self.items:
            raise TrainingError(f"duplicate item id {item_id!r}")
        state = EntityState(item_id)
        self.items[item_id] = state
        return state

    def _mint_type(self, user_id: str) -> str:
        t = user_id
        while t in self._taken_types:
            t = "~" + t
        return t

    def rated(self, user_id: str) -> Dict[str, Optional[float]]:
        return self.ratings.get(user_id, {})

    def snapshot(self) -> "Model":
        """Independent copy that later training will not affect.

        Pheromone dicts are replaced, never mutated, by training, so they are shared.
        """
        m = Model(self.params, self.mode)
        m.users = {k: replace(s) for k, s in self.users.items()}
        m.items = {k: replace(s) for k, s in self.items.items()}
        m.stats = replace(self.stats)
        m.ratings = {u: dict(r) for u, r in self.ratings.items()}
        m.seed_types = dict(self.seed_types)
        m._taken_types = set(self._taken_types)
        return m


def init_acf(user_ids: Iterable[str], item_ids: Iterable[str], params: ModelParams, mode: str = EXPLICIT) -> Model:
    """Seed each user with its own pheromone type; items start empty."""
    if params.cluster_count is not None:
        params = replace(params, cluster_count=None)
    model = Model(params, mode)
    for u in user_ids:
        model.add_user(u)
    for v in item_ids:
        model.add_item(v)
    return model


def evaporate(ph: PheromoneVector, lambda_: float) -> PheromoneVector:
    """Scale each amount by ``exp((|a| + lambda) / (M + lambda) - 1)``, M the largest magnitude."""
    if not lambda_ > 0:
        raise ValueError(f"lambda must be > 0, got {lambda_}")
    if not ph:
        return {}
    denom = max_magnitude(ph) + lambda_
    return {k: a * math.exp((abs(a) + lambda_) / denom - 1.0) for k, a in ph.items()}


def _transmit(own, other, coef, params):
    merged = evaporate(own, params.lambda_)
    for k, a in other.items():
        merged[k] = merged.get(k, 0.0) + coef * a
    return cutoff(merged, params.sigma, params.type_cap), len(merged)


def transmit(own: PheromoneVector, other: PheromoneVector, coef: float, params: ModelParams) -> PheromoneVector:
    """``cutoff(evaporate(own) + coef * other)`` without mutating either input."""
    return _transmit(own, other, coef, params)[0]


def _prior_mean(state: EntityState, model: Model) -> float:
    m = state.mean
    return model.stats.mean(model.params) if m is None else m


def _ensure_entities(model: Model, event: RatingEvent) -> Tuple[EntityState, EntityState]:
    user = model.users.get(event.user)
    if user is None:
        user = model.add_user(event.user)
    item = model.items.get(event.item)
    if item is None:
        item = model.add_item(event.item)
    return user, item


def _exchange(model: Model, user: EntityState, item: EntityState, user_coef: float, item_coef: float):
    U, V = user.pheromones, item.pheromones
    p = model.params
    # both sides read the pre-event snapshots U and V
    item.pheromones, n_item = _transmit(V, U, item_coef, p)
    user.pheromones, n_user = _transmit(U, V, user_coef, p)
    model.last_touched = n_item + n_user


def apply_explicit(model: Model, event: RatingEvent) -> None:
    """Apply one explicit rating in place (evaporate, transmit, cut off, update stats)."""
    if model.mode != EXPLICIT:
        raise TrainingError(f"explicit event applied to {model.mode} model: {event}")
    if event.value is None:
        raise TrainingError(f"explicit model received implicit event {event}")
    p = model.params
    r = float(event.value)
    if not p.rating_min <= r <= p.rating_max:
        raise TrainingError(f"rating {r} outside [{p.rating_min}, {p.rating_max}] in event {event}")
    user, item = _ensure_entities(model, event)
    user_dev = r - _prior_mean(item, model)
    item_dev = r - _prior_mean(user, model)
    _exchange(model, user, item, user_dev * p.gamma, item_dev * p.gamma)

    user.rating_count += 1
    user.rating_sum += r
    item.rating_count += 1
    item.rating_sum += r
    model.stats.total_count += 1
    model.stats.total_sum += r
    model.ratings.setdefault(event.user, {})[event.item] = r


def apply_implicit(model: Model, event: RatingEvent) -> None:
    """Apply one 0/1 preference event in place."""
    if model.mode != IMPLICIT:
        raise TrainingError(f"implicit event applied to {model.mode} model: {event}")
    if event.value is not None:
        raise TrainingError(f"implicit model received explicit event {event}")
    user, item = _ensure_entities(model, event)
    g = model.params.gamma
    _exchange(model, user, item, g, g)

    user.rating_count += 1
    item.rating_count += 1
    model.stats.total_count += 1
    model.ratings.setdefault(event.user, {})[event.item] = None


def apply_event(model: Model, event: RatingEvent) -> None:
    if model.mode == EXPLICIT:
        apply_explicit(model, event)
    else:
        apply_implicit(model, event)


@dataclass
class TrainReport:
    events: int
    seconds: float
    touched: int

    @property
    def events_per_second(self) -> float:
        return self.events / self.seconds if self.seconds > 0 else float("inf")

    @property
    def mean_touched_entries(self) -> float:
        return self.touched / self.events if self.events else 0.0

    def __str__(self):
        return (
            f"events={self.events}\n"
            f"seconds={self.seconds:.6f}\n"
            f"events_per_second={self.events_per_second:.1f}\n"
            f"mean_touched_entries={self.mean_touched_entries:.3f}"
        )


def check_order(events: Sequence[RatingEvent]) -> None:
    for i in range(1, len(events)):
        if events[i].timestamp < events[i - 1].timestamp:
            raise TrainingError(
                f"events out of order at positions {i - 1},{i}: "
                f"{events[i - 1]} then {events[i]}"
            )


def train_stream(model: Model, events: Sequence[RatingEvent], require_sorted: bool = True) -> TrainReport:
    """Fold the events into ``model`` in sequence order.

    ``require_sorted=False`` skips the timestamp check; the shuffled
    ("timeless") training runs use it.
    """
    if require_sorted:
        check_order(events)
    apply = apply_explicit if model.mode == EXPLICIT else apply_implicit
    touched = 0
    t0 = time.perf_counter()
    for ev in events:
        apply(model, ev)
        touched += model.last_touched
    report = TrainReport(len(events), time.perf_counter() - t0, touched)
    log.info("trained %d events in %.2fs (%.0f ev/s)", report.events, report.seconds, report.events_per_second)
    return report
