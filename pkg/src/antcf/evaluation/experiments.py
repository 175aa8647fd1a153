"""Rating and ranking evaluation runs, the time-vs-timeless experiment, and report writers."""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, TextIO, Union

import numpy as np

from ..clustering import cluster_users, fit_iacf, init_iacf
from ..core import ModelParams
from ..recommend import SimilarityIndex
from ..training import EXPLICIT, IMPLICIT, Model, RatingEvent, init_acf, train_stream
from .metrics import precision_at_n, ranking_accumulation, rmse
from .splits import HoldoutSplit, random_split

log = logging.getLogger(__name__)

RUN_SEEDS = (1, 2, 3, 4, 5)


class BiasBaseline:
    """Global mean plus item offset plus user offset, fitted in one pass each."""

    def __init__(self, params: ModelParams):
        self.params = params

    def fit(self, events: Sequence[RatingEvent]) -> "BiasBaseline":
        vals = [e.value for e in events]
        self.mean = float(np.mean(vals)) if vals else self.params.midpoint
        acc: Dict[str, list] = {}
        for e in events:
            acc.setdefault(e.item, []).append(e.value - self.mean)
        self.item_offset = {v: sum(d) / len(d) for v, d in acc.items()}
        acc = {}
        for e in events:
            acc.setdefault(e.user, []).append(e.value - self.mean - self.item_offset[e.item])
        self.user_offset = {u: sum(d) / len(d) for u, d in acc.items()}
        return self

    def predict(self, user: str, item: str) -> float:
        p = self.params
        r = self.mean + self.user_offset.get(user, 0.0) + self.item_offset.get(item, 0.0)
        return min(p.rating_max, max(p.rating_min, r))


class _PheromonePredictor:
    def __init__(self, model: Model):
        self.model = model
        self.index = SimilarityIndex(model)

    def prepare(self, pairs):
        self.index.precompute_neighbors([u for u, _ in pairs], [v for _, v in pairs])

    def predict(self, user, item):
        return self.index.predict(user, item)


def build_model(scheme: str, train: Sequence[RatingEvent], params: ModelParams, mode: str = EXPLICIT,
                seed: int = 0) -> Model:
    """Initialize an ACF or IACF model for ``train`` and train it in event order.

    IACF clusters users on the whole of ``train``.
    """
    if scheme == "acf":
        users = list(dict.fromkeys(e.user for e in train))
        items = list(dict.fromkeys(e.item for e in train))
        model = init_acf(users, items, params, mode)
    elif scheme == "iacf":
        model, _ = fit_iacf(train, params, mode, seed=seed)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    train_stream(model, train)
    return model


Builder = Union[str, Callable[[Sequence[RatingEvent], ModelParams, int], object]]


def _make_predictor(builder: Builder, train, params, seed):
    if callable(builder):
        return builder(train, params, seed)
    if builder == "bias":
        return BiasBaseline(params).fit(train)
    return _PheromonePredictor(build_model(builder, train, params, EXPLICIT, seed))


@dataclass
class RatingReport:
    name: str
    rmse: float
    train_seconds: float
    predict_seconds: float
    n_train: int
    n_test: int

    def __str__(self):
        return (f"model={self.name}\nrmse={self.rmse:.6f}\ntrain_seconds={self.train_seconds:.3f}\n"
                f"predict_seconds={self.predict_seconds:.3f}\nn_train={self.n_train}\nn_test={self.n_test}")


def evaluate_rating(builder: Builder, split: HoldoutSplit, params: ModelParams, seed: int = 0) -> RatingReport:
    """Train on ``split.train`` and report RMSE over ``split.test`` with timings."""
    t0 = time.perf_counter()
    predictor = _make_predictor(builder, split.train, params, seed)
    t1 = time.perf_counter()
    pairs = [(e.user, e.item) for e in split.test]
    if hasattr(predictor, "prepare"):
        predictor.prepare(pairs)
    scored = [(e.value, predictor.predict(e.user, e.item)) for e in split.test]
    t2 = time.perf_counter()
    name = builder if isinstance(builder, str) else getattr(builder, "__name__", "custom")
    return RatingReport(name, rmse(scored), t1 - t0, t2 - t1, len(split.train), len(split.test))


@dataclass
class RankingScores:
    precision: float
    ra: float
    users: int


def ranking_scores(model: Model, test: Sequence[RatingEvent], n: int, exclude_rated: bool = True) -> RankingScores:
    """Mean precision@n and ranking accumulation over the distinct users of ``test``.

    Every test item of a user counts as relevant; users unknown to the model
    get an empty list.
    """
    relevant: Dict[str, set] = {}
    for e in test:
        relevant.setdefault(e.user, set()).add(e.item)
    if not relevant:
        return RankingScores(0.0, n + 1.0, 0)
    index = SimilarityIndex(model)
    prec, ra = [], []
    for u in sorted(relevant):
        ranked = index.rank(u, n, exclude_rated)
        prec.append(precision_at_n(ranked, relevant[u], n))
        ra.append(ranking_accumulation(ranked, relevant[u], n))
    return RankingScores(float(np.mean(prec)), float(np.mean(ra)), len(relevant))


@dataclass
class RankingReport:
    name: str
    n: int
    precision: List[float] = field(default_factory=list)
    ra: List[float] = field(default_factory=list)
    train_seconds: List[float] = field(default_factory=list)

    @property
    def mean_precision(self) -> float:
        return float(np.mean(self.precision)) if self.precision else 0.0

    @property
    def mean_ra(self) -> float:
        return float(np.mean(self.ra)) if self.ra else self.n + 1.0

    def rows(self):
        for run, (p, r) in enumerate(zip(self.precision, self.ra), start=1):
            yield ("precision", p, run, "")
            yield ("ra", r, run, "")

    def __str__(self):
        return (f"model={self.name}\nn={self.n}\nruns={len(self.precision)}\n"
                f"precision={self.mean_precision:.6f}\nra={self.mean_ra:.6f}\n"
                f"train_seconds={float(np.mean(self.train_seconds or [0])):.3f}")


def evaluate_ranking(scheme: str, events: Sequence[RatingEvent], params: ModelParams, fraction: float = 0.1,
                     seeds: Sequence[int] = RUN_SEEDS, n: Optional[int] = None, split=None) -> RankingReport:
    """Average precision@N and RA over one seeded random split per run."""
    n = params.top_n if n is None else n
    report = RankingReport(scheme, n)
    for s in seeds:
        sp = split(events, s) if split is not None else random_split(events, fraction, s)
        t0 = time.perf_counter()
        model = build_model(scheme, sp.train, params, IMPLICIT, seed=s)
        report.train_seconds.append(time.perf_counter() - t0)
        scores = ranking_scores(model, sp.test, n)
        report.precision.append(scores.precision)
        report.ra.append(scores.ra)
    return report


@dataclass
class TemporalResult:
    checkpoints: List[int]
    time: List[float]
    timeless: List[float]
    users_evaluated: List[int]

    def rows(self, run=""):
        for k, (a, b) in enumerate(zip(self.time, self.timeless), start=1):
            yield ("precision_time", a, run, k)
            yield ("precision_timeless", b, run, k)

    @property
    def slope(self) -> float:
        """Least-squares slope of the time variant's precision against checkpoint number."""
        if len(self.time) < 2:
            return 0.0
        return float(np.polyfit(np.arange(1, len(self.time) + 1), self.time, 1)[0])


def checkpoint_times(events: Sequence[RatingEvent], count: int) -> List[int]:
    """``count`` evenly spaced interior points of the stream's time span."""
    t0, t1 = events[0].timestamp, events[-1].timestamp
    return [t0 + (t1 - t0) * k // (count + 1) for k in range(1, count + 1)]


def _window_precision(model: Model, window: Sequence[RatingEvent], n: int) -> (float, int):
    relevant: Dict[str, set] = {}
    for e in window:
        if e.user in model.users and e.item not in model.rated(e.user):
            relevant.setdefault(e.user, set()).add(e.item)
    if not relevant:
        return 0.0, 0
    index = SimilarityIndex(model)
    vals = [precision_at_n(index.rank(u, n), relevant[u], n) for u in sorted(relevant)]
    return float(np.mean(vals)), len(vals)


def _initial_model(scheme, bootstrap, params, seed):
    if scheme == "acf":
        return init_acf([], [], params, IMPLICIT)
    if not bootstrap:
        return init_acf([], [], params, IMPLICIT)
    clus = cluster_users(bootstrap, params.cluster_count or 20, seed)
    users = list(dict.fromkeys(e.user for e in bootstrap))
    return init_iacf(users, [], clus, params, IMPLICIT)


def temporal_experiment(events: Sequence[RatingEvent], checkpoint_count: int = 15,
                        params: Optional[ModelParams] = None, scheme: str = "iacf", seed: int = 0,
                        n: Optional[int] = None) -> TemporalResult:
    """Precision at each checkpoint for in-order ("time") and shuffled ("timeless") training.

    At checkpoint k both variants have seen the events up to it; the time
    variant learned them incrementally in timestamp order, the timeless one
    from scratch in a fixed seeded shuffle.  Both are scored on the events of
    the following window.  IACF clusters users on the events before the first
    checkpoint; later arrivals get fresh pheromone types.
    """
    params = params or ModelParams()
    n = params.top_n if n is None else n
    events = sorted(events, key=lambda e: e.timestamp)
    if checkpoint_count < 1:
        raise ValueError("checkpoint_count must be >= 1")
    if len(events) < checkpoint_count:
        raise ValueError(f"{len(events)} events cannot fill {checkpoint_count} checkpoints")
    cps = checkpoint_times(events, checkpoint_count)
    stamps = np.array([e.timestamp for e in events])
    cut = [int(np.searchsorted(stamps, t, side="right")) for t in cps] + [len(events)]

    base = _initial_model(scheme, events[:cut[0]], params, seed)
    order = np.random.default_rng(seed).permutation(len(events))
    live = base.snapshot()
    done = 0
    result = TemporalResult(cps, [], [], [])
    for k, t in enumerate(cps):
        train_stream(live, events[done:cut[k]])
        done = cut[k]
        window = events[cut[k]:cut[k + 1]]
        p_time, users = _window_precision(live, window, n)

        shuffled = base.snapshot()
        train_stream(shuffled, [events[i] for i in order if i < cut[k]], require_sorted=False)
        p_timeless, _ = _window_precision(shuffled, window, n)
        result.time.append(p_time)
        result.timeless.append(p_timeless)
        result.users_evaluated.append(users)
        log.info("checkpoint %d: time %.4f timeless %.4f (%d users)", k + 1, p_time, p_timeless, users)
    return result


def write_csv(rows, out: TextIO) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["metric", "value", "run", "checkpoint"])
    for metric, value, run, checkpoint in rows:
        w.writerow([metric, repr(float(value)), run, checkpoint])
