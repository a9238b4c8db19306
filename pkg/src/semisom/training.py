"""Mini-batch training loop.

Each batch competes against a frozen snapshot of the map, so results do not
depend on sample order within the batch. Samples are split by label presence,
grouped by winner (and by class on the labeled side), and each group is
applied as one averaged update. A labeled group lands in one of three
situations:

* claim - the winner has no label yet and adopts the group's class;
* match - the winner already carries the group's class and is pulled toward
  the group mean together with its connected neighbors;
* conflict - the winner carries a different class, which triggers duplication:
  each foreign class gets a copy of the pre-update winner as its own node.

Samples whose best activation falls below the acceptance threshold become new
nodes (organization phase) or are folded into their winner's group anyway
(convergence phase, where the threshold is disabled).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import UNLABELED, SomMap, activation_matrix, update_node
from .errors import InputError, ParameterError, StateError
from .params import Params

log = logging.getLogger(__name__)

ORGANIZATION = "organization"
CONVERGENCE = "convergence"


@dataclass
class MiniBatch:
    """A slice of the training set.

    ``labels`` uses UNLABELED (-1) for rows without supervision. ``rows``
    keeps each sample's original dataset index, which fixes the insertion
    order for below-threshold samples.
    """

    X: np.ndarray
    labels: np.ndarray
    rows: np.ndarray

    @classmethod
    def build(cls, X: np.ndarray, labels: np.ndarray | None = None) -> "MiniBatch":
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise InputError(f"batch must be a 2-D array, got shape {X.shape}")
        n = X.shape[0]
        if labels is None:
            lab = np.full(n, UNLABELED, dtype=np.int64)
        else:
            lab = np.asarray(labels, dtype=np.int64)
            if lab.shape != (n,):
                raise InputError(f"labels shape {lab.shape} does not match {n} samples")
        return cls(X=X, labels=lab, rows=np.arange(n, dtype=np.int64))

    @property
    def size(self) -> int:
        return int(self.X.shape[0])

    def take(self, idx: np.ndarray) -> "MiniBatch":
        return MiniBatch(X=self.X[idx], labels=self.labels[idx], rows=self.rows[idx])


@dataclass(frozen=True)
class WinnerGroup:
    """Samples of one batch that share a winner (and a class, when labeled)."""

    winner_id: int
    sample_indices: tuple[int, ...]
    x_bar: np.ndarray
    label: int | None = None


def split_batch(batch: MiniBatch) -> tuple[MiniBatch, MiniBatch]:
    """Partition a batch into (unlabeled part, labeled part), order preserved."""
    labeled = batch.labels != UNLABELED
    return batch.take(~labeled), batch.take(labeled)


def _compete(som: SomMap, snap, batch: MiniBatch, params: Params, threshold: float):
    """Winner search against the snapshot plus win/competition bookkeeping.

    Returns (per_winner, orphans): per_winner maps node id to the batch
    indices it won, orphans lists indices whose best activation missed the
    threshold. Every sample counts one competition; every accepted sample
    counts one win for its node.
    """
    som.competitions += batch.size
    if snap.size == 0:
        return {}, list(range(batch.size))
    act = activation_matrix(snap, batch.X, params.eps)
    winner_pos = np.argmax(act, axis=1)  # ties resolve to the lowest node id
    best = act[np.arange(batch.size), winner_pos]
    per_winner: dict[int, list[int]] = {}
    orphans: list[int] = []
    for i in range(batch.size):
        if best[i] < threshold:
            orphans.append(i)
            continue
        per_winner.setdefault(int(snap.ids[winner_pos[i]]), []).append(i)
    for nid, idxs in per_winner.items():
        som.nodes[nid].wins += len(idxs)
    return per_winner, orphans


def _group(batch: MiniBatch, nid: int, idxs: list[int], label: int | None) -> WinnerGroup:
    return WinnerGroup(
        winner_id=nid,
        sample_indices=tuple(idxs),
        x_bar=batch.X[idxs].mean(axis=0),
        label=label,
    )


def assign_winners_unsupervised(
    som: SomMap,
    snap,
    batch: MiniBatch,
    params: Params,
    act_threshold: float | None = None,
) -> tuple[list[WinnerGroup], list[int]]:
    """Group an unlabeled batch by winner; returns (groups, orphan indices)."""
    threshold = params.act_threshold if act_threshold is None else act_threshold
    per_winner, orphans = _compete(som, snap, batch, params, threshold)
    groups = [_group(batch, nid, per_winner[nid], None) for nid in sorted(per_winner)]
    return groups, orphans


def assign_winners_supervised(
    som: SomMap,
    snap,
    batch: MiniBatch,
    params: Params,
    act_threshold: float | None = None,
) -> tuple[list[WinnerGroup], list[WinnerGroup], list[tuple[int, list[WinnerGroup]]], list[int]]:
    """Group a fully labeled batch by winner and class.

    Returns (claims, matches, conflicts, orphans). A claim is the group an
    unlabeled winner will adopt (lowest class id when it won several classes;
    the other classes' samples are dropped for this batch). A match pairs a
    labeled winner with a group of its own class. A conflict entry carries the
    winner id and all of its per-class groups, sorted by class id.
    """
    threshold = params.act_threshold if act_threshold is None else act_threshold
    per_winner, orphans = _compete(som, snap, batch, params, threshold)
    claims: list[WinnerGroup] = []
    matches: list[WinnerGroup] = []
    conflicts: list[tuple[int, list[WinnerGroup]]] = []
    for nid in sorted(per_winner):
        by_class: dict[int, list[int]] = {}
        for i in per_winner[nid]:
            by_class.setdefault(int(batch.labels[i]), []).append(i)
        groups = [_group(batch, nid, idxs, cls) for cls, idxs in sorted(by_class.items())]
        winner_label = som.nodes[nid].label
        if winner_label is None:
            claims.append(groups[0])
        elif len(groups) == 1 and groups[0].label == winner_label:
            matches.append(groups[0])
        else:
            conflicts.append((nid, groups))
    return claims, matches, conflicts, orphans


# ---------------------------------------------------------------------------
# group handlers


def _update_winner_and_neighbors(som: SomMap, group: WinnerGroup, params: Params) -> None:
    """Pull the winner (full rate) and its current neighbors (reduced rate)
    toward the group mean, then refresh the touched connections."""
    node = som.nodes[group.winner_id]
    neighbor_ids = som.neighbors(node.id)
    update_node(node, group.x_bar, params.lr_winner, params.relevance_rate, params.relevance_smooth)
    for nid in neighbor_ids:
        update_node(
            som.nodes[nid], group.x_bar, params.lr_neighbor, params.relevance_rate, params.relevance_smooth
        )
    som.refresh_many([node.id, *neighbor_ids])


def handle_claim(som: SomMap, group: WinnerGroup, params: Params) -> None:
    """An unlabeled winner adopts the group's class and moves toward its mean.

    Neighbors are left alone: until the label settles, dragging connected
    nodes toward a freshly claimed class would smear it across the map.
    """
    node = som.nodes[group.winner_id]
    if node.label is not None:
        raise StateError(f"node {node.id} already has label {node.label}")
    if group.label is None:
        raise StateError("claim group carries no label")
    node.label = int(group.label)
    update_node(node, group.x_bar, params.lr_winner, params.relevance_rate, params.relevance_smooth)
    som.refresh_connections(node.id)


def handle_match(som: SomMap, group: WinnerGroup, params: Params) -> None:
    """Winner and group share a class: standard winner-plus-neighbors update."""
    node = som.nodes[group.winner_id]
    if node.label is None or group.label is None or node.label != group.label:
        raise StateError(
            f"match requires equal labels, node {node.id} has {node.label}, group has {group.label}"
        )
    _update_winner_and_neighbors(som, group, params)


def handle_conflict(
    som: SomMap,
    winner_id: int,
    groups: list[WinnerGroup],
    params: Params,
    allow_duplicate: bool = True,
) -> list[int]:
    """A labeled winner won samples of other classes.

    Every foreign class (ascending id) gets a duplicate of the winner as it
    stood before any of this batch's updates: same center, dispersion and
    relevance, fresh win counter, labeled with that class. The duplicate then
    moves toward its class mean. The winner itself moves only if its own class
    is among the groups. At capacity a class's duplication is skipped and its
    samples go unused this batch.
    """
    node = som.nodes[winner_id]
    if node.label is None:
        raise StateError(f"conflict winner {winner_id} has no label")
    pre_center = node.center.copy()
    pre_dispersion = node.dispersion.copy()
    pre_relevance = node.relevance.copy()
    own: WinnerGroup | None = None
    new_ids: list[int] = []
    for group in sorted(groups, key=lambda g: g.label):
        if group.label == node.label:
            own = group
            continue
        if allow_duplicate:
            dup_id = som.add_node(pre_center, pre_dispersion, pre_relevance, label=group.label)
            if dup_id is None:
                log.debug(
                    "conflict at node %d: map full, class %d not duplicated", winner_id, group.label
                )
            else:
                update_node(
                    som.nodes[dup_id], group.x_bar, params.lr_winner,
                    params.relevance_rate, params.relevance_smooth,
                )
                som.refresh_connections(dup_id)
                new_ids.append(dup_id)
        if params.repel_wrong:
            node.center = node.center - params.lr_wrong * (group.x_bar - node.center)
    if own is not None:
        handle_match(som, own, params)
    return new_ids


# ---------------------------------------------------------------------------
# batch and dataset loops


def train_batch(som: SomMap, batch: MiniBatch, params: Params, phase: str = ORGANIZATION) -> None:
    """Apply one mini-batch to the map.

    Competition for the whole batch runs against a snapshot taken at entry.
    Mutations follow in a fixed order: labeled groups by ascending winner id,
    unlabeled groups by ascending winner id, then new-node insertions by
    ascending original row. A pruning pass runs when the competition counter
    reaches the configured interval.
    """
    if phase not in (ORGANIZATION, CONVERGENCE):
        raise ParameterError(f"unknown phase {phase!r}")
    if batch.size < 1:
        raise InputError("batch is empty")
    if batch.X.shape[1] != som.dim:
        raise InputError(f"batch has {batch.X.shape[1]} columns, map dimension is {som.dim}")

    threshold = params.act_threshold if phase == ORGANIZATION else 0.0
    allow_duplicate = params.duplicate_in_convergence or phase == ORGANIZATION
    snap = som.snapshot()
    unlabeled_part, labeled_part = split_batch(batch)

    actions: list[tuple[int, str, object]] = []
    inserts: list[tuple[int, np.ndarray, int | None]] = []

    if labeled_part.size:
        claims, matches, conflicts, orphans = assign_winners_supervised(
            som, snap, labeled_part, params, threshold
        )
        actions += [(g.winner_id, "claim", g) for g in claims]
        actions += [(g.winner_id, "match", g) for g in matches]
        actions += [(nid, "conflict", groups) for nid, groups in conflicts]
        inserts += [
            (int(labeled_part.rows[i]), labeled_part.X[i], int(labeled_part.labels[i]))
            for i in orphans
        ]
    if unlabeled_part.size:
        groups, orphans = assign_winners_unsupervised(som, snap, unlabeled_part, params, threshold)
        actions += [(g.winner_id, "plain", g) for g in groups]
        inserts += [(int(unlabeled_part.rows[i]), unlabeled_part.X[i], None) for i in orphans]

    for winner_id, kind, payload in sorted(actions, key=lambda t: t[0]):
        if kind == "claim":
            handle_claim(som, payload, params)
        elif kind == "match":
            handle_match(som, payload, params)
        elif kind == "conflict":
            handle_conflict(som, winner_id, payload, params, allow_duplicate)
        else:
            _update_winner_and_neighbors(som, payload, params)

    for _, x, label in sorted(inserts, key=lambda t: t[0]):
        som.insert_node(x, label)

    if som.competitions >= params.prune_interval:
        som.prune_losers(params)


def fit(som: SomMap, X: np.ndarray, labels: np.ndarray | None, params: Params) -> SomMap:
    """Train a map on a dataset: shuffled organization epochs, one convergence
    pass, and a final pruning sweep.

    ``labels`` holds class ids with UNLABELED (-1) for rows whose supervision
    is hidden; pass None for fully unsupervised training. The RNG seeded from
    ``params.seed`` drives only the per-epoch permutations, so identical
    inputs give identical maps.
    """
    params.validate()
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise InputError(f"training data must be a non-empty 2-D array, got shape {X.shape}")
    n = X.shape[0]
    if labels is None:
        labels = np.full(n, UNLABELED, dtype=np.int64)
    else:
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape != (n,):
            raise InputError(f"labels shape {labels.shape} does not match {n} samples")
    if som.dim != X.shape[1]:
        raise InputError(f"map dimension {som.dim} does not match data with {X.shape[1]} columns")
    if som.max_nodes != params.max_nodes:
        raise ParameterError(
            f"map was built with max_nodes={som.max_nodes}, params say {params.max_nodes}"
        )
    if som.connect_threshold != params.connect_threshold:
        raise ParameterError(
            f"map was built with connect_threshold={som.connect_threshold}, "
            f"params say {params.connect_threshold}"
        )

    rng = np.random.default_rng(params.seed)

    def one_pass(phase: str) -> None:
        order = rng.permutation(n)
        for start in range(0, n, params.batch_size):
            rows = order[start:start + params.batch_size]
            batch = MiniBatch(X=X[rows], labels=labels[rows], rows=rows)
            train_batch(som, batch, params, phase)

    for _ in range(params.epochs):
        one_pass(ORGANIZATION)
    one_pass(CONVERGENCE)
    som.prune_losers(params)
    som.params = params
    return som


def train_map(dataset, params: Params) -> SomMap:
    """Build a map sized from ``params`` and fit it to a loaded dataset.

    ``dataset`` is anything with an ``X`` matrix and an ``effective_labels()``
    method returning masked labels, such as ``dataio.Dataset``.
    """
    som = SomMap.from_params(int(np.asarray(dataset.X).shape[1]), params)
    return fit(som, dataset.X, dataset.effective_labels(), params)
