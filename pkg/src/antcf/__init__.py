"""Incremental collaborative filtering with pheromone vectors (ACF and IACF)."""

from .clustering import Clustering, assign_new_user, cluster_users, fit_iacf, init_iacf, kmeans
from .core import EntityState, GlobalStats, ModelParams, cosine_similarity, cutoff
from .io import DatasetDescriptor, load_dataset, load_model, save_model
from .recommend import SimilarityIndex, item_neighbors, predict_rating, rank_items, user_neighbors
from .training import (
    EXPLICIT,
    IMPLICIT,
    Model,
    RatingEvent,
    TrainingError,
    apply_event,
    apply_explicit,
    apply_implicit,
    evaporate,
    init_acf,
    train_stream,
    transmit,
)

__version__ = "0.1.0"
