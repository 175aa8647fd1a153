import io
import subprocess
import sys

import pytest

from antcf.cli import main
from antcf.evaluation import generate_ratings
from antcf.io import load_model, write_csv_events


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    ratings = str(d / "r.csv")
    write_csv_events(generate_ratings(40, 60, 1200, seed=3), ratings)
    drift = str(d / "d.csv")
    assert run("generate-drift", "--users", "40", "--items", "100", "--events-per-user", "12",
               "--seed", "2", "--out", drift)[0] == 0
    return d, ratings, drift


def test_train_predict_recommend(data):
    d, ratings, _ = data
    model = str(d / "m.txt")
    code, out = run("train", "--data", ratings, "--format", "csv-explicit", "--mode", "iacf",
                    "--out-model", model, "--clusters", "4", "--seed", "1")
    assert code == 0 and "events=1200" in out
    assert load_model(model).params.cluster_count == 4
    code, out = run("predict", "--model", model, "--user", "3", "--item", "5")
    assert code == 0 and 1.0 <= float(out) <= 5.0
    code, out = run("recommend", "--model", model, "--user", "3", "--n", "5")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 5 and lines[0].startswith("1\t")
    code, out = run("recommend", "--model", model, "--user", "3", "--n", "100", "--include-rated")
    assert len(out.splitlines()) == 60


def test_predict_unknown_user_falls_back(data):
    d, ratings, _ = data
    model = str(d / "acf.txt")
    assert run("train", "--data", ratings, "--format", "csv-explicit", "--mode", "acf", "--out-model", model)[0] == 0
    m = load_model(model)
    code, out = run("predict", "--model", model, "--user", "nobody", "--item", "5")
    assert code == 0
    assert float(out) == pytest.approx(m.stats.total_sum / m.stats.total_count, abs=1e-6)


def test_invalid_sigma_rejected(data, capsys):
    d, ratings, _ = data
    code, _ = run("train", "--data", ratings, "--format", "csv-explicit", "--out-model", str(d / "x"), "--sigma", "-1")
    assert code != 0
    assert "sigma" in capsys.readouterr().err


def test_missing_file_and_bad_split(data, capsys):
    d, ratings, _ = data
    assert run("evaluate-rating", "--data", str(d / "nope.dat"))[0] != 0
    assert run("evaluate-rating", "--data", ratings, "--format", "csv-explicit", "--split", "half")[0] != 0
    err = capsys.readouterr().err
    assert "error" in err


def test_unknown_subcommand_and_flag():
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code != 0
    with pytest.raises(SystemExit) as e:
        main(["predict", "--model", "m", "--user", "u", "--item", "i", "--bogus"])
    assert e.value.code != 0


def test_evaluate_rating_reports_and_determinism(data):
    d, ratings, _ = data
    outs = []
    for k in range(2):
        csv_path = str(d / f"rating{k}.csv")
        code, out = run("evaluate-rating", "--data", ratings, "--format", "csv-explicit", "--mode", "iacf",
                        "--split", "random:0.1:1", "--clusters", "4", "--csv", csv_path)
        assert code == 0 and "rmse=" in out
        outs.append(([l for l in out.splitlines() if "seconds" not in l], open(csv_path).read()))
    assert outs[0] == outs[1]
    assert outs[0][1].startswith("metric,value,run,checkpoint\nrmse,")
    code, out = run("evaluate-rating", "--data", ratings, "--format", "csv-explicit", "--mode", "bias",
                    "--split", "chrono:0.1")
    assert code == 0 and "model=bias" in out


def test_evaluate_ranking_and_temporal(data):
    d, _, drift = data
    reports = []
    for k in range(2):
        path = str(d / f"rank{k}.csv")
        code, out = run("evaluate-ranking", "--data", drift, "--n", "10", "--runs", "2", "--clusters", "4", "--csv", path)
        assert code == 0 and "precision=" in out and "ra=" in out
        reports.append(open(path).read())
    assert reports[0] == reports[1]
    code, out = run("temporal", "--data", drift, "--checkpoints", "3", "--clusters", "4")
    assert code == 0
    assert len(out.splitlines()) == 5 and out.splitlines()[-1].startswith("slope_time=")


def test_cluster_command(data):
    d, _, drift = data
    path = str(d / "clusters.tsv")
    code, out = run("cluster", "--data", drift, "--format", "csv-implicit", "--k", "3", "--out", path)
    assert code == 0 and "clusters=3" in out
    rows = [l.split("\t") for l in open(path).read().splitlines()]
    assert len(rows) == 40 and {c for _, c in rows} <= {"0", "1", "2"}


def test_generate_drift_deterministic(tmp_path):
    a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    for p in (a, b):
        assert run("generate-drift", "--users", "10", "--items", "50", "--events-per-user", "5",
                   "--drift-rate", "0.5", "--seed", "9", "--out", p)[0] == 0
    assert open(a).read() == open(b).read()


def test_module_entry_point(data):
    d, ratings, _ = data
    proc = subprocess.run([sys.executable, "-m", "antcf", "train", "--data", ratings, "--format", "csv-explicit",
                           "--out-model", str(d / "y"), "--sigma", "-1"], capture_output=True, text=True)
    assert proc.returncode == 1
    assert "sigma must be >= 0" in proc.stderr
