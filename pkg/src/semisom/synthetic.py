"""Synthetic Gaussian datasets.

Two layouts are offered. Plain blobs (paired=False) put every class in its
own well-separated cluster and are good for smoke tests. Paired blobs place
classes in overlapping twos: each pair shares a location and its two classes
sit a small gap apart, so purely unsupervised geometry tends to merge them
and labels carry real information. That makes the paired layout useful for
studying how accuracy responds to the supervision rate.
"""
from __future__ import annotations

import numpy as np

from .dataio import Dataset, normalize_minmax
from .errors import ParameterError


def gaussian_blobs(
    n_samples: int = 5000,
    n_classes: int = 10,
    dim: int = 32,
    spread: float = 0.04,
    pair_gap: float = 0.06,
    paired: bool = True,
    seed: int = 0,
) -> Dataset:
    """Sample a labeled Gaussian mixture and wrap it as a normalized Dataset.

    ``spread`` is the per-dimension standard deviation of every blob and
    ``pair_gap`` the distance between the two class centers of a pair
    (ignored when paired=False). With an odd class count the last class
    stands alone. Sample counts are split as evenly as possible and rows are
    shuffled, so a random subset is class-balanced only on average.
    """
    if n_samples < n_classes:
        raise ParameterError(f"need at least one sample per class, got {n_samples} for {n_classes}")
    if n_classes < 1 or dim < 1:
        raise ParameterError("n_classes and dim must be positive")
    if spread <= 0:
        raise ParameterError("spread must be positive")

    rng = np.random.default_rng(seed)
    if paired:
        n_anchors = (n_classes + 1) // 2
        anchors = _separated_points(rng, n_anchors, dim, min_dist=max(6.0 * spread, 0.2))
        centers = np.empty((n_classes, dim))
        for p in range(n_anchors):
            direction = rng.normal(size=dim)
            direction /= np.linalg.norm(direction)
            centers[2 * p] = anchors[p] + 0.5 * pair_gap * direction
            if 2 * p + 1 < n_classes:
                centers[2 * p + 1] = anchors[p] - 0.5 * pair_gap * direction
    else:
        centers = _separated_points(rng, n_classes, dim, min_dist=max(6.0 * spread, 0.2))

    counts = np.full(n_classes, n_samples // n_classes)
    counts[: n_samples % n_classes] += 1
    X = np.vstack([
        rng.normal(loc=centers[c], scale=spread, size=(counts[c], dim)) for c in range(n_classes)
    ])
    labels = np.repeat(np.arange(n_classes, dtype=np.int64), counts)
    order = rng.permutation(n_samples)

    return Dataset(
        X=normalize_minmax(X[order]),
        labels=labels[order],
        mask=np.ones(n_samples, dtype=bool),
        class_names=tuple(str(c) for c in range(n_classes)),
        source=f"gaussian_blobs(n={n_samples}, classes={n_classes}, dim={dim}, seed={seed})",
    )


def _separated_points(rng: np.random.Generator, count: int, dim: int, min_dist: float) -> np.ndarray:
    """Draw ``count`` points in [0.15, 0.85]^dim, retrying near-collisions.

    In high dimension uniform points are far apart and the retry loop never
    fires; in low dimension it keeps small configurations honest. Gives up
    on separation (but not determinism) after a bounded number of retries.
    """
    points = np.empty((count, dim))
    placed = 0
    retries = 0
    while placed < count:
        candidate = rng.uniform(0.15, 0.85, size=dim)
        if placed and retries < 1000:
            gaps = np.linalg.norm(points[:placed] - candidate, axis=1)
            if float(gaps.min()) < min_dist:
                retries += 1
                continue
        points[placed] = candidate
        placed += 1
    return points
