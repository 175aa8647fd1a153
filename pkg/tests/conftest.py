import numpy as np
import pytest

from antcf.core import ModelParams
from antcf.training import EXPLICIT, Model, RatingEvent


def ev(user, item, value=None, ts=0):
    return RatingEvent(user, item, value, ts)


def random_stream(rng, n_users, n_items, n_events, explicit=True, t_max=10_000):
    stamps = np.sort(rng.integers(0, t_max, size=n_events))
    out = []
    for t in stamps:
        value = float(rng.integers(1, 6)) if explicit else None
        out.append(RatingEvent(f"u{rng.integers(n_users)}", f"v{rng.integers(n_items)}", value, int(t)))
    return out


def hand_model(users, items, ratings=(), params=None, mode=EXPLICIT):
    """Model with pheromones set directly.

    ``users``/``items`` map id -> pheromone dict; ``ratings`` is a list of
    (user, item, value) whose statistics are booked without any transmission.
    """
    m = Model(params or ModelParams(cluster_count=None), mode)
    for u, ph in users.items():
        m.add_user(u, u)
        m.users[u].pheromones = dict(ph)
    for v, ph in items.items():
        m.add_item(v)
        m.items[v].pheromones = dict(ph)
    for u, v, r in ratings:
        for s in (m.users[u], m.items[v]):
            s.rating_count += 1
            s.rating_sum += r
        m.stats.total_count += 1
        m.stats.total_sum += r
        m.ratings.setdefault(u, {})[v] = r
    return m


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
