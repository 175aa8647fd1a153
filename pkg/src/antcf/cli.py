"""Command-line interface: ``antcf <subcommand> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import List, Optional

from . import io
from .clustering import ClusteringError, cluster_users, fit_iacf
from .core import ModelParams
from .evaluation import (
    evaluate_ranking,
    evaluate_rating,
    generate_drift,
    parse_split,
    temporal_experiment,
    write_csv,
)
from .recommend import SimilarityIndex
from .training import TrainingError, init_acf, train_stream

log = logging.getLogger("antcf")

FORMAT_ALIASES = {"movielens": "movielens-dat", "movielens-dat": "movielens-dat",
                  "csv-explicit": "csv-explicit", "csv-implicit": "csv-implicit"}


class CliError(Exception):
    pass


def _add_data(p, default_format="movielens"):
    p.add_argument("--data", required=True, help="ratings file")
    p.add_argument("--format", default=default_format, choices=sorted(FORMAT_ALIASES))
    p.add_argument("--delimiter", default=",", help="CSV field delimiter")
    p.add_argument("--timestamp-unit", default="s", choices=["s", "ms"])


def _add_params(p):
    p.add_argument("--gamma", type=float, default=0.2, help="transmission rate")
    p.add_argument("--lambda", dest="lambda_", type=float, default=1.0, help="evaporation control")
    p.add_argument("--sigma", type=float, default=0.01, help="cutoff threshold")
    p.add_argument("--clusters", type=int, default=20, help="IACF cluster count")
    p.add_argument("--neighbors", type=int, default=20, help="neighborhood size")
    p.add_argument("--type-cap", type=int, default=None, help="max pheromone types per entity")
    p.add_argument("--signed-weighting", action="store_true", help="weight neighbor deviations by signed similarity")
    p.add_argument("--seed", type=int, default=0)


def _params(args, top_n: int = 20) -> ModelParams:
    try:
        return ModelParams(
            gamma=args.gamma, lambda_=args.lambda_, sigma=args.sigma,
            cluster_count=args.clusters if getattr(args, "mode", "iacf") != "acf" else None,
            neighborhood_size=args.neighbors, top_n=top_n, type_cap=args.type_cap,
            signed_weighting=args.signed_weighting,
        )
    except ValueError as exc:
        raise CliError(f"invalid parameter: {exc}") from None


def _load(args):
    desc = io.DatasetDescriptor(args.data, FORMAT_ALIASES[args.format], args.delimiter, args.timestamp_unit)
    return desc, io.load_dataset(desc)


def cmd_train(args, out):
    params = _params(args)
    desc, events = _load(args)
    users = list(dict.fromkeys(e.user for e in events))
    items = list(dict.fromkeys(e.item for e in events))
    if args.mode == "acf":
        model = init_acf(users, items, params, desc.mode)
    else:
        model, _ = fit_iacf(events, params, desc.mode, seed=args.seed)
    report = train_stream(model, events)
    io.save_model(model, args.out_model)
    print(report, file=out)


def cmd_predict(args, out):
    model = io.load_model(args.model)
    print(f"{SimilarityIndex(model).predict(args.user, args.item):.6f}", file=out)


def cmd_recommend(args, out):
    model = io.load_model(args.model)
    ranked = SimilarityIndex(model).rank(args.user, args.n, exclude_rated=not args.include_rated)
    for p, (item, s) in enumerate(ranked.entries, start=1):
        print(f"{p}\t{item}\t{s:.6f}", file=out)


def _write_report(args, rows):
    if args.csv:
        with open(args.csv, "w") as f:
            write_csv(rows, f)


def cmd_evaluate_rating(args, out):
    params = _params(args)
    _, events = _load(args)
    split = parse_split(args.split)(events)
    report = evaluate_rating(args.mode, split, params, seed=args.seed)
    print(f"split={split.strategy}\n{report}", file=out)
    # timings stay out of the CSV so reports are reproducible byte for byte
    _write_report(args, [("rmse", report.rmse, 1, "")])


def cmd_evaluate_ranking(args, out):
    params = _params(args, top_n=args.n)
    _, events = _load(args)
    splitter = parse_split(args.split)
    seeds = list(range(1, args.runs + 1))
    report = evaluate_ranking(args.mode, events, params, seeds=seeds, n=args.n, split=splitter)
    print(report, file=out)
    _write_report(args, report.rows())


def cmd_temporal(args, out):
    params = _params(args, top_n=args.n)
    _, events = _load(args)
    res = temporal_experiment(events, args.checkpoints, params, scheme=args.mode, seed=args.seed, n=args.n)
    print("checkpoint\ttimestamp\tprecision_time\tprecision_timeless\tusers", file=out)
    for k, (t, a, b, n) in enumerate(zip(res.checkpoints, res.time, res.timeless, res.users_evaluated), start=1):
        print(f"{k}\t{t}\t{a:.6f}\t{b:.6f}\t{n}", file=out)
    print(f"slope_time={res.slope:.6g}", file=out)
    _write_report(args, res.rows())


def cmd_cluster(args, out):
    _, events = _load(args)
    clus = cluster_users(events, args.k, seed=args.seed)
    with open(args.out, "w") as f:
        clus.export(f)
    print(f"users={len(clus.assignments)}\nclusters={clus.k}\ninertia={clus.inertia:.6f}", file=out)


def cmd_generate_drift(args, out):
    data = generate_drift(args.users, args.items, args.events_per_user, args.drift_rate, args.seed,
                          groups=args.groups, groups_per_user=args.groups_per_user)
    io.write_csv_events(data.events, args.out)
    print(f"events={len(data.events)}", file=out)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="antcf", description="Ant collaborative filtering")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model and write a snapshot")
    _add_data(p)
    p.add_argument("--mode", choices=["acf", "iacf"], default="iacf")
    p.add_argument("--out-model", required=True)
    _add_params(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict one rating from a snapshot")
    p.add_argument("--model", required=True)
    p.add_argument("--user", required=True)
    p.add_argument("--item", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("recommend", help="top-N items for a user from a snapshot")
    p.add_argument("--model", required=True)
    p.add_argument("--user", required=True)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--include-rated", action="store_true")
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("evaluate-rating", help="RMSE on a hold-out split")
    _add_data(p)
    p.add_argument("--mode", choices=["acf", "iacf", "bias"], default="iacf")
    p.add_argument("--split", default="random:0.1:1")
    p.add_argument("--csv", help="write a metric,value,run,checkpoint report here")
    _add_params(p)
    p.set_defaults(func=cmd_evaluate_rating)

    p = sub.add_parser("evaluate-ranking", help="precision@N and ranking accumulation")
    _add_data(p, default_format="csv-implicit")
    p.add_argument("--mode", choices=["acf", "iacf"], default="iacf")
    p.add_argument("--split", default="random:0.1")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--csv")
    _add_params(p)
    p.set_defaults(func=cmd_evaluate_ranking)

    p = sub.add_parser("temporal", help="time vs timeless precision at checkpoints")
    _add_data(p, default_format="csv-implicit")
    p.add_argument("--mode", choices=["acf", "iacf"], default="iacf")
    p.add_argument("--checkpoints", type=int, default=15)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--csv")
    _add_params(p)
    p.set_defaults(func=cmd_temporal)

    p = sub.add_parser("cluster", help="k-means user clustering, written as user<TAB>cluster")
    _add_data(p)
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("generate-drift", help="write a synthetic drifting implicit dataset as CSV")
    p.add_argument("--users", type=int, default=500)
    p.add_argument("--items", type=int, default=2000)
    p.add_argument("--events-per-user", type=int, default=40)
    p.add_argument("--drift-rate", type=float, default=0.2)
    p.add_argument("--groups", type=int, default=10)
    p.add_argument("--groups-per-user", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate_drift)
    return ap


def main(argv: Optional[List[str]] = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args, out)
    except (CliError, io.DatasetError, io.SnapshotError, TrainingError, ClusteringError, ValueError, OSError) as exc:
        print(f"antcf {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
