"""Metrics, splits, synthetic data, the brute-force oracle and experiment drivers."""

from .experiments import (
    BiasBaseline,
    RankingReport,
    RatingReport,
    TemporalResult,
    build_model,
    evaluate_ranking,
    evaluate_rating,
    ranking_scores,
    temporal_experiment,
    write_csv,
)
from .metrics import hitting, precision_at_n, ranking_accumulation, rmse
from .oracle import OracleReport, TinyInstance, oracle_check, random_instance
from .splits import HoldoutSplit, checkpoint_splits, chronological_split, parse_split, random_split
from .synthetic import DriftData, generate_drift, generate_ratings
