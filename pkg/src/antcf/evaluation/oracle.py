"""Brute-force dense re-implementation used to cross-check the engine on tiny instances.

Everything here works on dense numpy rows indexed by sorted pheromone type
and recomputes similarities from scratch; it shares no code with the
training or recommendation modules beyond the event and parameter types.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..core import ModelParams
from ..training import EXPLICIT, IMPLICIT, Model, RatingEvent, init_acf, train_stream

MAX_USERS = 5
MAX_ITEMS = 5
MAX_EVENTS = 20
AMOUNT_TOL = 1e-9
PREDICTION_TOL = 1e-9
_DECIMALS = 12


@dataclass
class TinyInstance:
    users: List[str]
    items: List[str]
    events: List[RatingEvent]
    params: ModelParams
    mode: str = EXPLICIT
    # user -> cluster index for IACF; None means ACF
    assignment: Optional[Dict[str, int]] = None


@dataclass
class OracleReport:
    ok: bool
    checked: int = 0
    divergence: Optional[str] = None

    def __str__(self):
        return f"PASS ({self.checked} quantities)" if self.ok else f"FAIL: {self.divergence}"


class DenseOracle:
    def __init__(self, inst: TinyInstance):
        self.inst = inst
        p = inst.params
        if inst.assignment is None:
            seed = {u: u for u in inst.users}
        else:
            seed = {u: f"c{inst.assignment[u]}" for u in inst.users}
        self.types = sorted(set(seed.values()))
        col = {t: i for i, t in enumerate(self.types)}
        self.uidx = {u: i for i, u in enumerate(inst.users)}
        self.iidx = {v: i for i, v in enumerate(inst.items)}
        self.PU = np.zeros((len(inst.users), len(self.types)))
        self.PV = np.zeros((len(inst.items), len(self.types)))
        for u in inst.users:
            self.PU[self.uidx[u], col[seed[u]]] = 1.0
        self.ucount = np.zeros(len(inst.users))
        self.usum = np.zeros(len(inst.users))
        self.icount = np.zeros(len(inst.items))
        self.isum = np.zeros(len(inst.items))
        self.R: Dict[tuple, Optional[float]] = {}
        self.p = p

    def _evap(self, row):
        M = np.abs(row).max() if row.size else 0.0
        if M == 0:
            return row.copy()
        lam = self.p.lambda_
        return row * np.exp((np.abs(row) + lam) / (M + lam) - 1.0)

    def _cut(self, row):
        row = np.where(np.abs(row) < self.p.sigma, 0.0, row)
        cap = self.p.type_cap
        if cap is not None and np.count_nonzero(row) > cap:
            nz = [j for j in range(len(row)) if row[j] != 0]
            nz.sort(key=lambda j: (-abs(row[j]), j))
            keep = set(nz[:cap])
            row = np.array([row[j] if j in keep else 0.0 for j in range(len(row))])
        return row

    def _mean(self, count, total):
        if count > 0:
            return total / count
        n = self.ucount.sum()
        return self.usum.sum() / n if n > 0 else (self.p.rating_min + self.p.rating_max) / 2

    def replay(self):
        for ev in self.inst.events:
            i, j = self.uidx[ev.user], self.iidx[ev.item]
            U, V = self.PU[i].copy(), self.PV[j].copy()
            if self.inst.mode == EXPLICIT:
                ru = self._mean(self.ucount[i], self.usum[i])
                rv = self._mean(self.icount[j], self.isum[j])
                cu = self.p.gamma * (ev.value - rv)
                cv = self.p.gamma * (ev.value - ru)
            else:
                cu = cv = self.p.gamma
            self.PV[j] = self._cut(self._evap(V) + cv * U)
            self.PU[i] = self._cut(self._evap(U) + cu * V)
            val = 0.0 if ev.value is None else ev.value
            self.ucount[i] += 1
            self.usum[i] += val
            self.icount[j] += 1
            self.isum[j] += val
            self.R[(ev.user, ev.item)] = ev.value
        return self

    @staticmethod
    def _cos(a, b):
        na, nb = math.sqrt(float(a @ a)), math.sqrt(float(b @ b))
        if na == 0 or nb == 0:
            return 0.0
        return min(1.0, max(-1.0, float(a @ b) / (na * nb)))

    def _top(self, scored, n):
        scored.sort(key=lambda x: (-round(x[1], _DECIMALS), x[0]))
        return scored[:n]

    def user_neighbors(self, u):
        ids = sorted(self.inst.users)
        a = self.PU[self.uidx[u]]
        return self._top([(w, self._cos(a, self.PU[self.uidx[w]])) for w in ids if w != u],
                         self.p.neighborhood_size)

    def item_neighbors(self, v):
        ids = sorted(self.inst.items)
        a = self.PV[self.iidx[v]]
        return self._top([(x, self._cos(a, self.PV[self.iidx[x]])) for x in ids if x != v],
                         self.p.neighborhood_size)

    def predict(self, u, v):
        n = self.ucount.sum()
        gmean = self.usum.sum() / n if n > 0 else (self.p.rating_min + self.p.rating_max) / 2
        up = us = 0.0
        for w, s in self.user_neighbors(u):
            if (w, v) in self.R:
                k = self.uidx[w]
                wt = s if self.p.signed_weighting else abs(s)
                up += wt * (self.R[(w, v)] - self.usum[k] / self.ucount[k])
                us += abs(s)
        ip = isim = 0.0
        for x, s in self.item_neighbors(v):
            if (u, x) in self.R:
                k = self.iidx[x]
                wt = s if self.p.signed_weighting else abs(s)
                ip += wt * (self.R[(u, x)] - self.isum[k] / self.icount[k])
                isim += abs(s)
        pred = gmean + (up / us if us else 0.0) + (ip / isim if isim else 0.0)
        return min(self.p.rating_max, max(self.p.rating_min, pred))

    def rank(self, u, exclude_rated=True):
        a = self.PU[self.uidx[u]]
        scored = [(v, self._cos(a, self.PV[self.iidx[v]])) for v in sorted(self.inst.items)
                  if not (exclude_rated and (u, v) in self.R)]
        return [v for v, _ in self._top(scored, self.p.top_n)]


def engine_model(inst: TinyInstance) -> Model:
    """Train the production engine on ``inst``."""
    if inst.assignment is None:
        model = init_acf(inst.users, inst.items, inst.params, inst.mode)
    else:
        from ..clustering import Clustering, init_iacf

        k = max(inst.assignment.values()) + 1
        model = init_iacf(inst.users, inst.items, Clustering(dict(inst.assignment), [{}] * k, 0.0),
                          inst.params, inst.mode)
    train_stream(model, inst.events)
    return model


def oracle_check(inst: TinyInstance, model: Optional[Model] = None) -> OracleReport:
    """Compare every pheromone amount, prediction and ranking of the engine against the oracle."""
    from ..recommend import SimilarityIndex

    if len(inst.users) > MAX_USERS or len(inst.items) > MAX_ITEMS or len(inst.events) > MAX_EVENTS:
        raise ValueError("instance exceeds the oracle size bound "
                         f"({MAX_USERS} users, {MAX_ITEMS} items, {MAX_EVENTS} events)")
    if model is None:
        model = engine_model(inst)
    oracle = DenseOracle(inst).replay()
    checked = 0

    for kind, states, P, index in (("user", model.users, oracle.PU, oracle.uidx),
                                   ("item", model.items, oracle.PV, oracle.iidx)):
        for e, row in index.items():
            ph = states[e].pheromones
            extra = set(ph) - set(oracle.types)
            if extra:
                return OracleReport(False, checked, f"{kind} {e} holds unknown types {sorted(extra)}")
            for t, col in zip(oracle.types, range(len(oracle.types))):
                got, want = ph.get(t, 0.0), P[row, col]
                checked += 1
                if abs(got - want) > AMOUNT_TOL:
                    return OracleReport(False, checked, f"{kind} {e} type {t}: engine {got!r} oracle {want!r}")

    index = SimilarityIndex(model)
    for u in inst.users:
        if inst.mode == EXPLICIT:
            for v in inst.items:
                got, want = index.predict(u, v), oracle.predict(u, v)
                checked += 1
                if abs(got - want) > PREDICTION_TOL:
                    return OracleReport(False, checked, f"prediction ({u}, {v}): engine {got!r} oracle {want!r}")
        got_rank, want_rank = index.rank(u).items, oracle.rank(u)
        checked += 1
        if got_rank != want_rank:
            return OracleReport(False, checked, f"ranking for {u}: engine {got_rank} oracle {want_rank}")
    return OracleReport(True, checked)


def random_instance(rng: np.random.Generator, mode: str = EXPLICIT, iacf: bool = False,
                    params: Optional[ModelParams] = None) -> TinyInstance:
    """A random instance within the oracle bound (1-5 users, 1-5 items, 0-20 events)."""
    params = params or ModelParams()
    nu, ni = int(rng.integers(1, MAX_USERS + 1)), int(rng.integers(1, MAX_ITEMS + 1))
    users = [f"u{i}" for i in range(nu)]
    items = [f"v{i}" for i in range(ni)]
    n = int(rng.integers(0, MAX_EVENTS + 1))
    stamps = np.sort(rng.integers(0, 1000, size=n))
    events = []
    for t in stamps:
        value = None if mode == IMPLICIT else float(rng.integers(1, 6))
        events.append(RatingEvent(users[rng.integers(nu)], items[rng.integers(ni)], value, int(t)))
    assignment = None
    if iacf:
        k = int(rng.integers(1, nu + 1))
        assignment = {u: int(rng.integers(k)) for u in users}
        # keep cluster indices contiguous
        used = sorted(set(assignment.values()))
        assignment = {u: used.index(c) for u, c in assignment.items()}
    return TinyInstance(users, items, events, params, mode, assignment)
