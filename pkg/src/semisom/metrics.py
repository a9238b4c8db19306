"""Prediction over a trained map and the evaluation measures."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import UNLABELED, SomMap, weighted_distances
from .errors import InputError, StateError


@dataclass(frozen=True)
class Prediction:
    """Outcome for one sample: the winning node, the cluster it defines, and
    a class label when the map can provide one."""

    node_id: int
    cluster: int
    label: int | None


def predict(som: SomMap, x: np.ndarray) -> Prediction:
    """Classify and cluster a single sample. See predict_many for the rules."""
    return predict_many(som, np.asarray(x, dtype=np.float64)[None, :])[0]


def predict_many(som: SomMap, X: np.ndarray, chunk_size: int = 512) -> list[Prediction]:
    """Winner search without an acceptance threshold, plus label resolution.

    The winner is the node with the highest activation (ties go to the lowest
    id) and doubles as the cluster index. The label is the winner's own when
    it has one. An unlabeled winner borrows the label of the nearest labeled
    node, measured by weighted distance under that node's relevance profile.
    A map with no labeled nodes yields no labels at all.

    Work proceeds in chunks of rows to keep the samples x nodes x dimensions
    intermediate small.
    """
    if len(som) == 0:
        raise StateError("cannot predict with an empty map")
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != som.dim:
        raise InputError(f"expected shape (n, {som.dim}), got {X.shape}")
    snap = som.snapshot()
    eps = som.params.eps if som.params is not None else 1e-8
    labeled = snap.labels != UNLABELED
    out: list[Prediction] = []
    for start in range(0, X.shape[0], chunk_size):
        chunk = X[start:start + chunk_size]
        dist = weighted_distances(chunk, snap.centers, snap.relevances)
        act = 1.0 / (1.0 + dist / (snap.relevance_sums[None, :] + eps))
        winner_pos = np.argmax(act, axis=1)
        winner_labels = snap.labels[winner_pos]
        if labeled.any():
            need = winner_labels == UNLABELED
            if need.any():
                fallback = weighted_distances(
                    chunk[need], snap.centers[labeled], snap.relevances[labeled]
                )
                nearest = np.argmin(fallback, axis=1)
                winner_labels = winner_labels.copy()
                winner_labels[need] = snap.labels[labeled][nearest]
        for pos, lab in zip(winner_pos, winner_labels):
            nid = int(snap.ids[pos])
            out.append(Prediction(node_id=nid, cluster=nid, label=None if lab == UNLABELED else int(lab)))
    return out


def clustering_error(clusters: np.ndarray, labels: np.ndarray) -> float:
    """Majority-label purity, higher is better.

    Each cluster is tagged with its most frequent true label; the score is the
    fraction of samples whose label matches their cluster's tag. Invariant
    under renaming of clusters or classes, and never below the largest class
    prior.
    """
    clusters = np.asarray(clusters)
    labels = np.asarray(labels)
    if clusters.ndim != 1 or clusters.shape != labels.shape:
        raise InputError(f"shape mismatch: clusters {clusters.shape}, labels {labels.shape}")
    if clusters.size == 0:
        raise InputError("need at least one sample")
    _, ci = np.unique(clusters, return_inverse=True)
    _, li = np.unique(labels, return_inverse=True)
    table = np.zeros((int(ci.max()) + 1, int(li.max()) + 1), dtype=np.int64)
    np.add.at(table, (ci, li), 1)
    return float(table.max(axis=1).sum()) / clusters.size


def accuracy(predicted, labels) -> float:
    """Fraction of exact label matches; every prediction must carry a label."""
    pred = list(predicted)
    labels = np.asarray(labels)
    if len(pred) != labels.shape[0]:
        raise InputError(f"length mismatch: {len(pred)} predictions, {labels.shape[0]} labels")
    if labels.size == 0:
        raise InputError("need at least one sample")
    if any(p is None for p in pred):
        raise StateError("a prediction has no label; the map has no labeled nodes")
    return float(np.mean(np.asarray(pred, dtype=np.int64) == labels.astype(np.int64)))


def evaluate(som: SomMap, X: np.ndarray, labels: np.ndarray | None = None) -> dict:
    """Run prediction over a dataset and collect the standard measures.

    Returns a dict with node counts, and, when true labels are supplied, the
    clustering error plus (if the map has labeled nodes) the accuracy.
    """
    preds = predict_many(som, X)
    out: dict = {
        "n_samples": int(np.asarray(X).shape[0]),
        "n_nodes": len(som),
        "n_labeled_nodes": som.labeled_node_count(),
    }
    if labels is not None:
        clusters = np.array([p.cluster for p in preds], dtype=np.int64)
        out["ce"] = clustering_error(clusters, labels)
        if preds and preds[0].label is not None:
            out["accuracy"] = accuracy([p.label for p in preds], labels)
        else:
            out["accuracy"] = None
    return out
