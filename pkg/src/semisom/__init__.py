"""Semi-supervised self-organizing map with per-dimension relevance weights.

The map grows, prunes, and labels prototype nodes from a mix of labeled and
unlabeled samples, trained in mini-batches. See README.md for a tour.
"""
from .core import (
    MapSnapshot,
    Node,
    SomMap,
    activation,
    labels_compatible,
    relevance_distance,
    relevance_from_dispersion,
    update_node,
    weighted_distance,
)
from .dataio import Dataset, apply_mask, load_dataset, normalize_minmax
from .errors import (
    InputError,
    MapFormatError,
    ParameterError,
    SemisomError,
    StateError,
)
from .mapfile import dumps_map, load_map, loads_map, save_map
from .metrics import Prediction, accuracy, clustering_error, evaluate, predict, predict_many
from .params import Params, default_params
from .search import ParamRanges, SearchRun, best_run, lhs_sample, rank_runs, run_search
from .synthetic import gaussian_blobs
from .training import (
    CONVERGENCE,
    ORGANIZATION,
    MiniBatch,
    WinnerGroup,
    fit,
    split_batch,
    train_batch,
    train_map,
)

__version__ = "0.1.0"

__all__ = [
    "CONVERGENCE",
    "Dataset",
    "InputError",
    "MapFormatError",
    "MapSnapshot",
    "MiniBatch",
    "Node",
    "ORGANIZATION",
    "ParamRanges",
    "ParameterError",
    "Params",
    "Prediction",
    "SearchRun",
    "SemisomError",
    "SomMap",
    "StateError",
    "WinnerGroup",
    "accuracy",
    "activation",
    "apply_mask",
    "best_run",
    "clustering_error",
    "default_params",
    "dumps_map",
    "evaluate",
    "fit",
    "gaussian_blobs",
    "labels_compatible",
    "lhs_sample",
    "load_dataset",
    "load_map",
    "loads_map",
    "normalize_minmax",
    "predict",
    "predict_many",
    "rank_runs",
    "relevance_distance",
    "relevance_from_dispersion",
    "run_search",
    "save_map",
    "split_batch",
    "train_batch",
    "train_map",
    "update_node",
    "weighted_distance",
]
