"""Hold-out splits of an event stream."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from ..training import RatingEvent


@dataclass
class HoldoutSplit:
    train: List[RatingEvent]
    test: List[RatingEvent]
    strategy: str


def _sorted(events):
    return sorted(events, key=lambda e: e.timestamp)


def random_split(events: Sequence[RatingEvent], fraction: float = 0.1, seed: int = 0) -> HoldoutSplit:
    """Hold out a seeded random ``fraction`` of events; both parts stay in time order."""
    if not 0 <= fraction <= 1:
        raise ValueError(f"test fraction must be in [0, 1], got {fraction}")
    n = len(events)
    n_test = int(round(n * fraction))
    rng = np.random.default_rng(seed)
    test_mask = np.zeros(n, dtype=bool)
    test_mask[rng.permutation(n)[:n_test]] = True
    train = [e for e, t in zip(events, test_mask) if not t]
    test = [e for e, t in zip(events, test_mask) if t]
    return HoldoutSplit(_sorted(train), _sorted(test), f"random:{fraction}:{seed}")


def chronological_split(events: Sequence[RatingEvent], fraction: float = 0.1) -> HoldoutSplit:
    """Earliest ``1 - fraction`` of events train, the rest test (stable on timestamp ties)."""
    if not 0 <= fraction <= 1:
        raise ValueError(f"test fraction must be in [0, 1], got {fraction}")
    ordered = _sorted(events)
    cut = len(ordered) - int(round(len(ordered) * fraction))
    return HoldoutSplit(ordered[:cut], ordered[cut:], f"chrono:{fraction}")


def checkpoint_splits(events: Sequence[RatingEvent], checkpoints: Sequence[int]) -> List[HoldoutSplit]:
    """One split per checkpoint: train is everything up to it, test the window to the next one.

    The last window runs to the end of the stream.  These splits are windows,
    not partitions of the whole input.
    """
    ordered = _sorted(events)
    cps = sorted(checkpoints)
    out = []
    for k, t in enumerate(cps):
        end = cps[k + 1] if k + 1 < len(cps) else None
        train = [e for e in ordered if e.timestamp <= t]
        test = [e for e in ordered if e.timestamp > t and (end is None or e.timestamp <= end)]
        out.append(HoldoutSplit(train, test, f"checkpoint:{t}"))
    return out


def parse_split(spec: str):
    """Parse ``random:0.1:SEED`` or ``chrono:0.1`` into a splitting callable."""
    parts = spec.split(":")
    try:
        if parts[0] == "random" and len(parts) in (2, 3):
            fraction = float(parts[1])
            seed = int(parts[2]) if len(parts) == 3 else 0
            return lambda ev, s=None: random_split(ev, fraction, seed if s is None else s)
        if parts[0] == "chrono" and len(parts) == 2:
            fraction = float(parts[1])
            return lambda ev, s=None: chronological_split(ev, fraction)
    except ValueError:
        pass
    raise ValueError(f"bad split spec {spec!r}; expected random:FRACTION[:SEED] or chrono:FRACTION")
