"""Dataset loaders and the versioned text snapshot format."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, fields
from typing import Dict, List, Optional

from .clustering import cluster_type
from .core import EntityState, ModelParams
from .training import EXPLICIT, IMPLICIT, MODES, Model, RatingEvent

SNAPSHOT_VERSION = "1"
FORMATS = ("movielens-dat", "csv-explicit", "csv-implicit")
_TS_SCALE = {"s": 1, "ms": 1000}


class DatasetError(ValueError):
    pass


class SnapshotError(ValueError):
    pass


@dataclass
class DatasetDescriptor:
    path: str
    format: str = "movielens-dat"
    delimiter: str = ","
    timestamp_unit: str = "s"

    def __post_init__(self):
        if self.format not in FORMATS:
            raise DatasetError(f"unknown format {self.format!r}; expected one of {', '.join(FORMATS)}")
        if self.timestamp_unit not in _TS_SCALE:
            raise DatasetError(f"unknown timestamp unit {self.timestamp_unit!r}")

    @property
    def mode(self) -> str:
        return IMPLICIT if self.format == "csv-implicit" else EXPLICIT


def _sorted(events: List[RatingEvent]) -> List[RatingEvent]:
    # stable: equal timestamps keep file order
    return sorted(events, key=lambda e: e.timestamp)


def load_movielens(path: str, rating_min: float = 1.0, rating_max: float = 5.0) -> List[RatingEvent]:
    """Parse ``UserID::MovieID::Rating::Timestamp`` lines into explicit events sorted by time."""
    events = []
    with open(path, encoding="latin-1") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split("::")
            if len(parts) != 4:
                raise DatasetError(f"{path}:{lineno}: expected 4 '::'-separated fields, got {len(parts)}")
            user, item, value, ts = parts
            try:
                r = float(value)
                t = int(ts)
            except ValueError:
                raise DatasetError(f"{path}:{lineno}: unparseable rating or timestamp in {line!r}") from None
            if not rating_min <= r <= rating_max:
                raise DatasetError(f"{path}:{lineno}: rating {value} outside [{rating_min:g}, {rating_max:g}]")
            events.append(RatingEvent(user, item, r, t))
    return _sorted(events)


def load_csv(desc: DatasetDescriptor) -> List[RatingEvent]:
    """Read a headed CSV (``user,item[,value],timestamp``) as explicit or implicit events."""
    if desc.format == "movielens-dat":
        raise DatasetError("load_csv called with a movielens-dat descriptor")
    implicit = desc.mode == IMPLICIT
    scale = _TS_SCALE[desc.timestamp_unit]
    events = []
    with open(desc.path, newline="") as f:
        reader = csv.reader(f, delimiter=desc.delimiter)
        header = next(reader, None)
        if header is None:
            return []
        header = [h.strip() for h in header]
        col = {h: i for i, h in enumerate(header)}
        need = ["user", "item", "timestamp"] + ([] if implicit else ["value"])
        missing = [c for c in need if c not in col]
        if missing:
            raise DatasetError(f"{desc.path}:1: missing column(s) {', '.join(missing)}")
        vcol = col.get("value")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < len(header):
                raise DatasetError(f"{desc.path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            user, item = row[col["user"]].strip(), row[col["item"]].strip()
            if not user or not item:
                raise DatasetError(f"{desc.path}:{lineno}: empty user or item")
            try:
                ts = int(float(row[col["timestamp"]])) // scale
            except ValueError:
                raise DatasetError(f"{desc.path}:{lineno}: unparseable timestamp {row[col['timestamp']]!r}") from None
            raw = row[vcol].strip() if vcol is not None else ""
            if implicit:
                if raw:
                    raise DatasetError(f"{desc.path}:{lineno}: implicit data has a value ({raw!r})")
                value = None
            else:
                try:
                    value = float(raw)
                except ValueError:
                    raise DatasetError(f"{desc.path}:{lineno}: unparseable value {raw!r}") from None
            events.append(RatingEvent(user, item, value, ts))
    return _sorted(events)


def load_dataset(desc: DatasetDescriptor) -> List[RatingEvent]:
    if desc.format == "movielens-dat":
        return load_movielens(desc.path)
    return load_csv(desc)


def write_csv_events(events, path: str) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["user", "item", "value", "timestamp"])
        for e in events:
            w.writerow([e.user, e.item, "" if e.value is None else repr(e.value), e.timestamp])


# -- snapshots ---------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v)


def _check_token(s: str, what: str) -> str:
    if not s or any(c.isspace() for c in s):
        raise SnapshotError(f"{what} {s!r} cannot be written (empty or contains whitespace)")
    return s


def save_model(model: Model, path: str) -> None:
    """Write ``model`` as a line-oriented text snapshot.  Floats use repr, so loading is bit-exact."""
    lines = [f"version {SNAPSHOT_VERSION}", f"mode {model.mode}"]
    lines += [f"param {name} {_fmt(value)}" for name, value in model.params.to_items()]
    lines.append(f"G {model.stats.total_count} {model.stats.total_sum!r}")
    for u, t in model.seed_types.items():
        lines.append(f"S {_check_token(u, 'user id')} {_check_token(t, 'pheromone type')}")
    for tag, states in (("U", model.users), ("V", model.items)):
        for e, s in states.items():
            ph = " ".join(f"{_check_token(t, 'pheromone type')}:{a!r}" for t, a in s.pheromones.items())
            lines.append(f"{tag} {_check_token(e, 'id')} {s.rating_count} {s.rating_sum!r} {ph}".rstrip())
    for u, row in model.ratings.items():
        for v, r in row.items():
            lines.append(f"R {u} {v} {'-' if r is None else repr(r)}")
    lines.append("end")
    tmp = path + ".tmp"
    with open(tmp, "w") as f:
        f.write("\n".join(lines) + "\n")
    os.replace(tmp, path)


def _parse_param(name: str, raw: str, lineno: int):
    types = {f.name: f.type for f in fields(ModelParams)}
    if name not in types:
        raise SnapshotError(f"line {lineno}: unknown parameter {name!r}")
    kind = str(types[name])
    if raw == "none":
        if "Optional" not in kind:
            raise SnapshotError(f"line {lineno}: parameter {name} cannot be none")
        return None
    try:
        if "bool" in kind:
            if raw not in ("true", "false"):
                raise ValueError
            return raw == "true"
        if "int" in kind:
            return int(raw)
        return float(raw)
    except ValueError:
        raise SnapshotError(f"line {lineno}: bad value {raw!r} for parameter {name}") from None


def load_model(path: str) -> Model:
    """Read a snapshot written by :func:`save_model`."""
    with open(path) as f:
        lines = f.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0].split() != ["version", SNAPSHOT_VERSION]:
        found = lines[0] if lines else "<empty file>"
        raise SnapshotError(f"line 1: unsupported snapshot version line {found!r} (expected 'version {SNAPSHOT_VERSION}')")
    if lines[-1] != "end":
        raise SnapshotError(f"truncated snapshot: no 'end' line after line {len(lines)}")

    mode, params, stats = None, {}, None
    users: Dict[str, EntityState] = {}
    items: Dict[str, EntityState] = {}
    seeds: Dict[str, str] = {}
    ratings: Dict[str, Dict[str, Optional[float]]] = {}
    for lineno, line in enumerate(lines[1:-1], start=2):
        tok = line.split()
        if not tok:
            raise SnapshotError(f"line {lineno}: empty line")
        tag = tok[0]
        try:
            if tag == "mode":
                if tok[1] not in MODES:
                    raise SnapshotError(f"line {lineno}: unknown mode {tok[1]!r}")
                mode = tok[1]
            elif tag == "param":
                params[tok[1]] = _parse_param(tok[1], tok[2], lineno)
            elif tag == "G":
                stats = (int(tok[1]), float(tok[2]))
            elif tag == "S":
                if tok[1] in seeds:
                    raise SnapshotError(f"line {lineno}: duplicate seed line for user {tok[1]!r}")
                seeds[tok[1]] = tok[2]
            elif tag in ("U", "V"):
                target = users if tag == "U" else items
                eid = tok[1]
                if eid in target:
                    kind = "user" if tag == "U" else "item"
                    raise SnapshotError(f"line {lineno}: duplicate {kind} line for {eid!r}")
                ph = {}
                for pair in tok[4:]:
                    t, _, a = pair.rpartition(":")
                    if not t:
                        raise SnapshotError(f"line {lineno}: bad pheromone entry {pair!r}")
                    ph[t] = float(a)
                target[eid] = EntityState(eid, ph, int(tok[2]), float(tok[3]))
            elif tag == "R":
                ratings.setdefault(tok[1], {})[tok[2]] = None if tok[3] == "-" else float(tok[3])
            else:
                raise SnapshotError(f"line {lineno}: unknown record tag {tag!r}")
        except (IndexError, ValueError) as exc:
            if isinstance(exc, SnapshotError):
                raise
            raise SnapshotError(f"line {lineno}: malformed record {line!r}") from None
    if mode is None or stats is None:
        raise SnapshotError("snapshot lacks a mode or G line")
    try:
        p = ModelParams(**params)
    except (TypeError, ValueError) as exc:
        raise SnapshotError(f"invalid parameters: {exc}") from None

    model = Model(p, mode)
    model.users, model.items = users, items
    model.stats.total_count, model.stats.total_sum = stats
    model.seed_types = seeds
    model.ratings = ratings
    model._taken_types = set(seeds.values())
    if p.cluster_count is not None:
        model._taken_types.update(cluster_type(k) for k in range(p.cluster_count))
    return model
