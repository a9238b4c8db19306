"""Unit tests for map structure and numeric kernels."""

import numpy as np
import pytest

from semisom import (
    InputError,
    ParameterError,
    SomMap,
    StateError,
    activation,
    labels_compatible,
    relevance_distance,
    relevance_from_dispersion,
    update_node,
    weighted_distance,
)
from semisom.core import MapSnapshot, Node, UNLABELED, activation_matrix, weighted_distances
from conftest import make_map, quick_params, seeded_map


def node_at(center, dispersion=None, relevance=None, nid=0, label=None):
    center = np.asarray(center, dtype=np.float64)
    d = center.shape[0]
    if dispersion is None:
        dispersion = np.zeros(d)
    if relevance is None:
        relevance = np.ones(d)
    return Node(
        id=nid,
        center=center,
        dispersion=np.asarray(dispersion, dtype=np.float64),
        relevance=np.asarray(relevance, dtype=np.float64),
        label=label,
    )


class TestWeightedDistance:
    def test_zero_for_identical_points(self):
        x = np.array([0.3, 0.7, 0.1])
        assert weighted_distance(x, x, np.ones(3)) == 0.0

    def test_full_relevance_is_euclidean(self):
        x = np.array([1.0, 0.0])
        c = np.array([0.0, 0.0])
        assert weighted_distance(x, c, np.ones(2)) == 1.0

    def test_relevance_scales_each_dimension(self):
        x = np.array([1.0, 1.0])
        c = np.array([0.0, 0.0])
        w = np.array([0.25, 0.25])
        assert weighted_distance(x, c, w) == pytest.approx(np.sqrt(0.5), abs=1e-12)

    def test_zero_relevance_blinds_a_dimension(self):
        x = np.array([5.0, 1.0])
        c = np.array([0.0, 1.0])
        assert weighted_distance(x, c, np.array([0.0, 1.0])) == 0.0

    def test_shape_mismatch_rejected(self):
        with pytest.raises(InputError):
            weighted_distance(np.zeros(3), np.zeros(2), np.ones(2))

    def test_matrix_form_matches_scalar_form(self):
        rng = np.random.default_rng(3)
        X = rng.random((6, 4))
        centers = rng.random((5, 4))
        rels = rng.uniform(0.1, 1.0, size=(5, 4))
        got = weighted_distances(X, centers, rels)
        for i in range(6):
            for j in range(5):
                assert got[i, j] == pytest.approx(
                    weighted_distance(X[i], centers[j], rels[j]), abs=1e-12
                )


class TestActivation:
    def test_perfect_match_gives_one(self):
        x = np.array([0.2, 0.9])
        assert activation(x, x, np.ones(2)) == 1.0

    def test_distance_equal_to_relevance_sum_halves_activation(self):
        x = np.array([2.0, 0.0])
        c = np.array([0.0, 0.0])
        w = np.ones(2)
        expected = 1.0 / (1.0 + 2.0 / (2.0 + 1e-8))
        assert activation(x, c, w, eps=1e-8) == pytest.approx(expected, abs=1e-15)

    def test_bounded_in_unit_interval(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            a = activation(rng.normal(size=4), rng.normal(size=4), rng.uniform(0.01, 1, 4))
            assert 0.0 < a <= 1.0

    def test_decreases_with_distance(self):
        c = np.zeros(2)
        w = np.ones(2)
        near = activation(np.array([0.1, 0.0]), c, w)
        far = activation(np.array([0.9, 0.0]), c, w)
        assert near > far

    def test_matrix_form_matches_scalar_form(self):
        rng = np.random.default_rng(5)
        X = rng.random((4, 3))
        centers = rng.random((3, 3))
        rels = rng.uniform(0.1, 1.0, size=(3, 3))
        snap = MapSnapshot(
            ids=np.arange(3),
            centers=centers,
            relevances=rels,
            relevance_sums=rels.sum(axis=1),
            labels=np.full(3, UNLABELED),
        )
        got = activation_matrix(snap, X, eps=1e-8)
        for i in range(4):
            for j in range(3):
                assert got[i, j] == activation(X[i], centers[j], rels[j], eps=1e-8)


class TestRelevance:
    def test_uniform_dispersion_gives_all_ones(self):
        assert np.array_equal(
            relevance_from_dispersion(np.array([0.4, 0.4, 0.4]), 0.05), np.ones(3)
        )
        assert np.array_equal(relevance_from_dispersion(np.zeros(2), 0.05), np.ones(2))

    def test_two_point_case_hits_logistic_tails(self):
        w = relevance_from_dispersion(np.array([0.0, 1.0]), 0.1)
        assert w[0] == 1.0
        assert w[1] == pytest.approx(np.exp(-5.0), rel=1e-12)

    def test_max_is_exactly_one(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            w = relevance_from_dispersion(rng.random(5), 0.07)
            assert w.max() == 1.0

    def test_less_scattered_dimensions_matter_more(self):
        w = relevance_from_dispersion(np.array([0.1, 0.5, 0.9]), 0.1)
        assert w[0] > w[1] > w[2]

    def test_extreme_smoothing_does_not_overflow(self):
        with np.errstate(over="raise"):
            w = relevance_from_dispersion(np.array([0.0, 1e6]), 1e-9)
        assert w[0] == 1.0
        assert w[1] >= 0.0

    def test_nonpositive_smoothing_rejected(self):
        with pytest.raises(ParameterError):
            relevance_from_dispersion(np.array([0.1, 0.2]), 0.0)


class TestUpdateNode:
    def test_moves_center_then_refreshes_relevance(self):
        node = node_at([0.0], dispersion=[0.0])
        update_node(node, np.array([1.0]), lr=0.5, relevance_rate=1.0, smooth=0.1)
        assert node.dispersion[0] == 0.5
        assert node.center[0] == 0.5
        assert node.relevance[0] == 1.0

    def test_dispersion_uses_center_before_it_moves(self):
        node = node_at([0.0, 0.0])
        update_node(node, np.array([1.0, 0.0]), lr=0.5, relevance_rate=1.0, smooth=0.1)
        assert node.dispersion[0] == 0.5
        assert node.dispersion[1] == 0.0
        assert node.center[0] == 0.5
        assert node.relevance[0] == pytest.approx(np.exp(-5.0), rel=1e-12)
        assert node.relevance[1] == 1.0

    def test_zero_relevance_rate_freezes_dispersion(self):
        node = node_at([0.2, 0.2], dispersion=[0.3, 0.1])
        before = node.dispersion.copy()
        update_node(node, np.array([0.8, 0.8]), lr=1.0, relevance_rate=0.0, smooth=0.1)
        assert np.array_equal(node.dispersion, before)
        assert np.array_equal(node.center, [0.8, 0.8])

    def test_target_at_center_decays_dispersion(self):
        node = node_at([0.5], dispersion=[0.4])
        update_node(node, np.array([0.5]), lr=0.25, relevance_rate=0.5, smooth=0.1)
        assert node.dispersion[0] == pytest.approx(0.4 * (1 - 0.125), abs=1e-15)
        assert node.center[0] == 0.5

    def test_learning_rate_out_of_range_rejected(self):
        node = node_at([0.0])
        with pytest.raises(ParameterError):
            update_node(node, np.array([1.0]), lr=0.0, relevance_rate=0.5, smooth=0.1)
        with pytest.raises(ParameterError):
            update_node(node, np.array([1.0]), lr=1.5, relevance_rate=0.5, smooth=0.1)


class TestRelevanceDistance:
    def test_identical_profiles_are_zero_apart(self):
        w = np.array([0.3, 1.0, 0.7])
        assert relevance_distance(w, w) == 0.0

    def test_opposite_axis_profiles_are_maximally_apart(self):
        assert relevance_distance(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 1.0

    def test_stays_in_unit_interval(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            d = relevance_distance(rng.random(6), rng.random(6))
            assert 0.0 <= d <= 1.0


class TestLabelCompatibility:
    def test_unlabeled_pairs_with_anything(self):
        assert labels_compatible(None, None)
        assert labels_compatible(3, None)
        assert labels_compatible(None, 3)

    def test_equal_labels_pair(self):
        assert labels_compatible(2, 2)

    def test_different_labels_do_not_pair(self):
        assert not labels_compatible(1, 2)


class TestMapStructure:
    def test_insert_copies_the_sample_as_center(self):
        som = make_map(dim=3)
        x = np.array([0.1, 0.2, 0.3])
        node = som.nodes[som.insert_node(x)]
        x[0] = 99.0
        assert node.center[0] == 0.1
        assert np.array_equal(node.dispersion, np.zeros(3))
        assert np.array_equal(node.relevance, np.ones(3))
        assert node.wins == 0
        assert node.label is None

    def test_ids_increase_and_are_never_reused(self):
        som = make_map(dim=2, max_nodes=5)
        a = som.insert_node(np.zeros(2))
        b = som.insert_node(np.ones(2))
        som.prune_losers(quick_params())  # everyone is winless, one survivor stays
        c = som.insert_node(np.full(2, 0.5))
        assert a < b < c
        assert c not in (a, b)

    def test_capacity_is_enforced(self):
        som = make_map(dim=2, max_nodes=2)
        assert som.insert_node(np.zeros(2)) is not None
        assert som.insert_node(np.ones(2)) is not None
        assert som.insert_node(np.full(2, 0.5)) is None
        assert len(som) == 2

    def test_bad_construction_rejected(self):
        with pytest.raises(InputError):
            SomMap(dim=0, max_nodes=5, connect_threshold=0.3)
        with pytest.raises(ParameterError):
            SomMap(dim=2, max_nodes=0, connect_threshold=0.3)
        with pytest.raises(ParameterError):
            SomMap(dim=2, max_nodes=5, connect_threshold=1.0)

    def test_next_id_setter_rejects_rewinds(self):
        som = seeded_map(n_nodes=3)
        with pytest.raises(StateError):
            som.next_id = 1
        som.next_id = 50
        assert som.insert_node(np.zeros(3)) == 50


class TestConnections:
    def test_identical_profiles_connect(self):
        som = make_map(dim=2, connect_threshold=0.2)
        a = som.insert_node(np.array([0.1, 0.1]))
        b = som.insert_node(np.array([0.9, 0.9]))
        assert (a, b) in som.edges

    def test_threshold_zero_means_no_edges(self):
        som = make_map(dim=2, connect_threshold=0.0)
        som.insert_node(np.array([0.1, 0.1]))
        som.insert_node(np.array([0.9, 0.9]))
        assert som.edges == set()

    def test_comparison_is_strict(self):
        # Opposite one-hot profiles sit exactly at the normalized maximum,
        # so a threshold of 1.0 is never reachable; use profiles at exactly
        # the threshold instead.
        som = make_map(dim=2, connect_threshold=0.5)
        a = som.nodes[som.insert_node(np.zeros(2))]
        b = som.nodes[som.insert_node(np.zeros(2))]
        a.relevance = np.array([1.0, 0.0])
        b.relevance = np.array([1.0, 1.0])  # distance 1/sqrt(2) > 0.5
        som.rebuild_connections()
        assert som.edges == set()
        b.relevance = np.array([1.0, np.sqrt(2.0) * 0.5])  # exactly 0.5
        som.rebuild_connections()
        assert som.edges == set()

    def test_conflicting_labels_block_edges(self):
        som = seeded_map(dim=2, n_nodes=2, connect_threshold=0.9, seed=4)
        ids = sorted(som.nodes)
        assert tuple(ids) in som.edges
        som.nodes[ids[0]].label = 1
        som.nodes[ids[1]].label = 2
        som.rebuild_connections()
        assert som.edges == set()
        som.nodes[ids[1]].label = 1
        som.rebuild_connections()
        assert tuple(ids) in som.edges

    def test_refresh_one_node_matches_full_rebuild(self):
        rng = np.random.default_rng(8)
        som = seeded_map(dim=4, n_nodes=8, max_nodes=20, connect_threshold=0.4, seed=8)
        for nid in list(som.nodes):
            som.nodes[nid].relevance = rng.uniform(0.05, 1.0, size=4)
        for nid in list(som.nodes):
            som.refresh_connections(nid)
        refreshed = set(som.edges)
        som.rebuild_connections()
        assert refreshed == som.edges

    def test_neighbors_are_sorted_and_symmetric(self):
        som = seeded_map(dim=3, n_nodes=6, connect_threshold=0.8, seed=2)
        for nid in som.nodes:
            ns = som.neighbors(nid)
            assert ns == sorted(ns)
            for other in ns:
                assert nid in som.neighbors(other)

    def test_add_edge_validates_endpoints(self):
        som = seeded_map(n_nodes=2)
        ids = sorted(som.nodes)
        with pytest.raises(StateError):
            som.add_edge(ids[0], ids[0])
        with pytest.raises(StateError):
            som.add_edge(ids[0], 999)


class TestPrune:
    def test_losers_below_win_share_are_removed(self):
        som = seeded_map(dim=2, n_nodes=3, seed=1)
        ids = sorted(som.nodes)
        som.nodes[ids[0]].wins = 5
        som.nodes[ids[1]].wins = 0
        som.nodes[ids[2]].wins = 3
        som.competitions = 100
        removed = som.prune_losers(quick_params(min_win_share=0.01, prune_interval=100))
        assert removed == [ids[1]]
        assert sorted(som.nodes) == [ids[0], ids[2]]

    def test_survivor_guarantee_when_all_fall_short(self):
        som = seeded_map(dim=2, n_nodes=3, seed=1)
        ids = sorted(som.nodes)
        removed = som.prune_losers(quick_params(min_win_share=0.5, prune_interval=100))
        assert sorted(som.nodes) == [ids[0]]
        assert sorted(removed) == ids[1:]

    def test_survivor_is_top_winner_lowest_id_on_ties(self):
        som = seeded_map(dim=2, n_nodes=4, seed=1)
        ids = sorted(som.nodes)
        som.nodes[ids[1]].wins = 2
        som.nodes[ids[3]].wins = 2
        removed = som.prune_losers(quick_params(min_win_share=0.9, prune_interval=100))
        assert sorted(som.nodes) == [ids[1]]
        assert len(removed) == 3

    def test_counters_reset_after_prune(self):
        som = seeded_map(dim=2, n_nodes=2, seed=1)
        for node in som.nodes.values():
            node.wins = 10
        som.competitions = 500
        som.prune_losers(quick_params(min_win_share=0.001, prune_interval=100))
        assert som.competitions == 0
        assert all(node.wins == 0 for node in som.nodes.values())

    def test_edges_to_removed_nodes_disappear(self):
        som = seeded_map(dim=2, n_nodes=4, connect_threshold=0.9, seed=3)
        ids = sorted(som.nodes)
        som.nodes[ids[0]].wins = 9
        som.prune_losers(quick_params(min_win_share=0.5, prune_interval=10))
        for a, b in som.edges:
            assert a in som.nodes and b in som.nodes
        som.check_invariants()

    def test_empty_map_prune_is_a_no_op(self):
        som = make_map(dim=2)
        assert som.prune_losers(quick_params()) == []


class TestSnapshot:
    def test_arrays_follow_ascending_ids(self):
        som = seeded_map(dim=3, n_nodes=4, seed=6, labels=[None, 2, None, 0])
        snap = som.snapshot()
        assert list(snap.ids) == sorted(som.nodes)
        for row, nid in enumerate(snap.ids):
            node = som.nodes[nid]
            assert np.array_equal(snap.centers[row], node.center)
            assert np.array_equal(snap.relevances[row], node.relevance)
            expected = UNLABELED if node.label is None else node.label
            assert snap.labels[row] == expected
        assert np.array_equal(snap.relevance_sums, snap.relevances.sum(axis=1))

    def test_snapshot_is_frozen_in_time(self):
        som = seeded_map(dim=2, n_nodes=2, seed=0)
        snap = som.snapshot()
        nid = next(iter(som.nodes))
        som.nodes[nid].center[:] = 42.0
        assert snap.centers.max() <= 1.0

    def test_empty_map_snapshot(self):
        snap = make_map(dim=5).snapshot()
        assert snap.size == 0
        assert snap.centers.shape == (0, 5)


class TestInvariants:
    def test_detects_adjacency_corruption(self):
        som = seeded_map(dim=2, n_nodes=2, connect_threshold=0.9, seed=1)
        som.check_invariants()
        ids = sorted(som.nodes)
        som._adj[ids[0]].discard(ids[1])
        with pytest.raises(StateError):
            som.check_invariants()

    def test_detects_incompatible_edge(self):
        som = seeded_map(dim=2, n_nodes=2, connect_threshold=0.9, seed=1)
        ids = sorted(som.nodes)
        som.nodes[ids[0]].label = 1
        som.nodes[ids[1]].label = 2
        with pytest.raises(StateError):
            som.check_invariants()
