import numpy as np
import pytest

from antcf.clustering import fit_iacf
from antcf.core import ModelParams
from antcf.io import (
    DatasetDescriptor,
    DatasetError,
    SnapshotError,
    load_csv,
    load_dataset,
    load_model,
    load_movielens,
    save_model,
    write_csv_events,
)
from antcf.training import EXPLICIT, IMPLICIT, RatingEvent, init_acf, train_stream

from conftest import random_stream


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_movielens_line(tmp_path):
    path = write(tmp_path, "r.dat", "1::1193::5::978300760\n")
    assert load_movielens(path) == [RatingEvent("1", "1193", 5.0, 978300760)]


def test_movielens_empty_and_sorted(tmp_path):
    assert load_movielens(write(tmp_path, "e.dat", "")) == []
    path = write(tmp_path, "r.dat", "1::2::3::50\n2::2::4::10\n1::3::1::50\n")
    assert [e.timestamp for e in load_movielens(path)] == [10, 50, 50]
    assert [e.item for e in load_movielens(path)] == ["2", "2", "3"]


@pytest.mark.parametrize("text,msg", [
    ("1::1193::9::978300760\n", ":1: rating 9"),
    ("1::1::4::5\n1::1193::5\n", ":2: expected 4"),
    ("1::1::x::5\n", ":1: unparseable"),
])
def test_movielens_errors(tmp_path, text, msg):
    with pytest.raises(DatasetError, match=msg):
        load_movielens(write(tmp_path, "bad.dat", text))


def test_csv_implicit_and_explicit(tmp_path):
    imp = write(tmp_path, "i.csv", "user,item,value,timestamp\nu1,v7,,1136073600\n")
    assert load_csv(DatasetDescriptor(imp, "csv-implicit")) == [RatingEvent("u1", "v7", None, 1136073600)]
    exp = write(tmp_path, "e.csv", "user,item,value,timestamp\nu1,v7,4,1136073600\n")
    assert load_csv(DatasetDescriptor(exp, "csv-explicit")) == [RatingEvent("u1", "v7", 4.0, 1136073600)]
    no_value_col = write(tmp_path, "n.csv", "user,item,timestamp\nu1,v7,5\n")
    assert load_dataset(DatasetDescriptor(no_value_col, "csv-implicit"))[0].value is None


def test_csv_ms_and_delimiter(tmp_path):
    p = write(tmp_path, "t.tsv", "timestamp\tuser\titem\tvalue\n1136073600123\tu\tv\t2.5\n")
    (e,) = load_csv(DatasetDescriptor(p, "csv-explicit", "\t", "ms"))
    assert e == RatingEvent("u", "v", 2.5, 1136073600)


@pytest.mark.parametrize("fmt,text,msg", [
    ("csv-implicit", "user,item,value,timestamp\nu1,v7,4,1\n", "implicit data has a value"),
    ("csv-explicit", "user,item,timestamp\nu1,v7,1\n", "missing column"),
    ("csv-explicit", "user,item,value,timestamp\nu1,v7,abc,1\n", ":2: unparseable value"),
    ("csv-explicit", "user,item,value,timestamp\nu1,v7,3,zz\n", ":2: unparseable timestamp"),
    ("csv-explicit", "user,item,value,timestamp\nu1,v7\n", ":2: expected 4 fields"),
])
def test_csv_errors(tmp_path, fmt, text, msg):
    with pytest.raises(DatasetError, match=msg):
        load_csv(DatasetDescriptor(write(tmp_path, "bad.csv", text), fmt))


def test_descriptor_validation():
    with pytest.raises(DatasetError):
        DatasetDescriptor("x", "parquet")
    with pytest.raises(DatasetError):
        DatasetDescriptor("x", "csv-explicit", timestamp_unit="h")
    assert DatasetDescriptor("x", "csv-implicit").mode == IMPLICIT


def test_write_csv_events_roundtrip(tmp_path, rng):
    events = random_stream(rng, 5, 5, 30, explicit=False)
    path = str(tmp_path / "e.csv")
    write_csv_events(events, path)
    assert load_csv(DatasetDescriptor(path, "csv-implicit")) == events


def test_snapshot_fresh_model(tmp_path):
    m = init_acf(["u1", "u2"], ["v"], ModelParams(cluster_count=None))
    path = str(tmp_path / "m.txt")
    save_model(m, path)
    assert load_model(path) == m
    text = open(path).read().splitlines()
    assert text[0] == "version 1" and text[1] == "mode explicit"
    assert "param gamma 0.2" in text and "G 0 0.0" in text
    assert "U u1 0 0.0 u1:1.0" in text and "V v 0 0.0" in text


def test_snapshot_after_training_bit_exact(tmp_path, rng):
    m = init_acf([], [], ModelParams(cluster_count=None))
    train_stream(m, random_stream(rng, 8, 8, 100))
    path = str(tmp_path / "m.txt")
    save_model(m, path)
    back = load_model(path)
    assert back == m
    for u, s in m.users.items():
        for t, a in s.pheromones.items():
            assert back.users[u].pheromones[t].hex() == a.hex()


def test_snapshot_iacf_keeps_cluster_types_reserved(tmp_path, rng):
    events = random_stream(rng, 10, 6, 60)
    m, _ = fit_iacf(events, ModelParams(cluster_count=3), EXPLICIT)
    train_stream(m, events)
    path = str(tmp_path / "m.txt")
    save_model(m, path)
    back = load_model(path)
    assert back == m
    back.add_user("c1")
    assert back.seed_types["c1"] == "~c1"


@pytest.mark.parametrize("edit,msg", [
    (lambda t: t.replace("version 1", "version 9"), "version"),
    (lambda t: t.replace("end\n", ""), "truncated"),
    (lambda t: t + "", None),
    (lambda t: t.replace("U u1 ", "U u2 "), "duplicate user"),
    (lambda t: t.replace("param sigma 0.01", "param sigma -1.0"), "invalid parameters"),
    (lambda t: t.replace("param gamma 0.2", "param gamma abc"), "bad value"),
    (lambda t: t.replace("G 0 0.0", "Q 1"), "unknown record"),
    (lambda t: "", "version"),
])
def test_snapshot_defects(tmp_path, edit, msg):
    m = init_acf(["u1", "u2"], ["v"], ModelParams(cluster_count=None))
    path = str(tmp_path / "m.txt")
    save_model(m, path)
    with open(path) as f:
        text = edit(f.read())
    with open(path, "w") as f:
        f.write(text)
    if msg is None:
        assert load_model(path) == m
    else:
        with pytest.raises(SnapshotError, match=msg):
            load_model(path)


def test_snapshot_rejects_whitespace_ids(tmp_path):
    m = init_acf(["a b"], [], ModelParams(cluster_count=None))
    with pytest.raises(SnapshotError):
        save_model(m, str(tmp_path / "m.txt"))
