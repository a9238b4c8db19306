"""Shared fixtures and helpers for the test suite."""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from semisom import Params, SomMap, gaussian_blobs
from semisom.core import UNLABELED

settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def quick_params(**overrides):
    """Small, fast parameter set for unit tests."""
    base = dict(
        act_threshold=0.95,
        min_win_share=0.005,
        prune_interval=200,
        lr_winner=0.1,
        lr_wrong=0.05,
        lr_neighbor=0.02,
        relevance_rate=0.1,
        relevance_smooth=0.05,
        connect_threshold=0.3,
        epochs=2,
        batch_size=8,
        max_nodes=20,
        seed=7,
    )
    base.update(overrides)
    return Params(**base)


def make_map(dim=3, max_nodes=10, connect_threshold=0.3):
    return SomMap(dim=dim, max_nodes=max_nodes, connect_threshold=connect_threshold)


def seeded_map(dim=3, n_nodes=4, max_nodes=10, connect_threshold=0.3, seed=0, labels=None):
    """Map populated with random nodes via insert, optionally labeled."""
    rng = np.random.default_rng(seed)
    som = make_map(dim=dim, max_nodes=max_nodes, connect_threshold=connect_threshold)
    for i in range(n_nodes):
        nid = som.insert_node(rng.random(dim))
        if labels is not None:
            som.nodes[nid].label = labels[i]
    som.rebuild_connections()
    return som


def random_stream(n, dim, n_classes, label_rate, seed):
    """Feature rows plus labels with a fraction hidden as unlabeled."""
    rng = np.random.default_rng(seed)
    X = rng.random((n, dim))
    labels = rng.integers(0, n_classes, size=n)
    labels[rng.random(n) >= label_rate] = UNLABELED
    return X, labels


@pytest.fixture
def three_blobs():
    return gaussian_blobs(
        n_samples=300, n_classes=3, dim=4, spread=0.03, paired=False, seed=1
    )


@pytest.fixture
def generous_params():
    """Settings that reliably carve the three-blob fixture into clean clusters."""
    return quick_params(
        act_threshold=0.95,
        min_win_share=0.001,
        prune_interval=600,
        epochs=20,
        connect_threshold=0.25,
        max_nodes=8,
        batch_size=32,
        seed=5,
    )
