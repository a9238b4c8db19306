"""Prototype map: nodes, their graph, and the numeric kernels.

A node is a prototype with three vectors over the input dimensions: a center,
a dispersion estimate (moving average of observed |input - center|), and a
relevance weight in (0, 1] derived from the dispersion. Low dispersion on a
dimension means that dimension matters for the node, so it gets relevance
close to 1; noisy dimensions are down-weighted.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ParameterError, StateError
from .params import Params

log = logging.getLogger(__name__)

UNLABELED = -1  # label slot value used in snapshot arrays


@dataclass
class Node:
    """One prototype of the map."""

    id: int
    center: np.ndarray      # (d,), in the normalized input space
    dispersion: np.ndarray  # (d,), component-wise moving average, >= 0
    relevance: np.ndarray   # (d,), in (0, 1], max component exactly 1
    wins: int = 0
    label: int | None = None


@dataclass(frozen=True)
class MapSnapshot:
    """Read-only view of the map used for winner competition.

    All mutations during a batch happen against the live map while the
    competition runs against this frozen copy, so sample order inside a batch
    cannot change who wins.
    """

    ids: np.ndarray             # (n,) int64, ascending
    centers: np.ndarray         # (n, d)
    relevances: np.ndarray      # (n, d)
    relevance_sums: np.ndarray  # (n,)
    labels: np.ndarray          # (n,) int64, UNLABELED where unset

    @property
    def size(self) -> int:
        return int(self.ids.shape[0])


# ---------------------------------------------------------------------------
# numeric kernels


def weighted_distance(x: np.ndarray, center: np.ndarray, relevance: np.ndarray) -> float:
    """Relevance-weighted Euclidean distance sqrt(sum_i w_i * (x_i - c_i)^2)."""
    x = np.asarray(x, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64)
    relevance = np.asarray(relevance, dtype=np.float64)
    if x.shape != center.shape or x.shape != relevance.shape:
        raise InputError(
            f"dimension mismatch: x{x.shape}, center{center.shape}, relevance{relevance.shape}"
        )
    diff = x - center
    return float(np.sqrt(np.sum(np.square(diff) * relevance)))


def activation(x: np.ndarray, center: np.ndarray, relevance: np.ndarray, eps: float = 1e-8) -> float:
    """Similarity in (0, 1]: 1 / (1 + distance / (sum of relevances + eps)).

    Equals 1 exactly when the weighted distance is zero and decreases
    monotonically with it.
    """
    dist = weighted_distance(x, center, relevance)
    return 1.0 / (1.0 + dist / (float(np.sum(relevance)) + eps))


def weighted_distances(X: np.ndarray, centers: np.ndarray, relevances: np.ndarray) -> np.ndarray:
    """Distance matrix (rows of X) x (nodes); same arithmetic as weighted_distance."""
    diff = X[:, None, :] - centers[None, :, :]
    return np.sqrt(np.sum(np.square(diff) * relevances[None, :, :], axis=2))


def activation_matrix(snap: MapSnapshot, X: np.ndarray, eps: float) -> np.ndarray:
    """Activation of every snapshot node for every row of X, shape (b, n)."""
    dist = weighted_distances(X, snap.centers, snap.relevances)
    return 1.0 / (1.0 + dist / (snap.relevance_sums[None, :] + eps))


def relevance_from_dispersion(dispersion: np.ndarray, smooth: float) -> np.ndarray:
    """Map a dispersion vector to relevance weights in (0, 1].

    Components are squashed through a logistic centered on the mean dispersion
    and scaled by ``smooth`` times the dispersion range, then rescaled so the
    largest relevance is exactly 1. A flat dispersion vector (including d=1)
    yields all ones. Ordering is reversed: smaller dispersion, larger weight.
    """
    if smooth <= 0.0:
        raise ParameterError("relevance_smooth must be positive")
    dispersion = np.asarray(dispersion, dtype=np.float64)
    lo = float(dispersion.min())
    hi = float(dispersion.max())
    if hi == lo:
        return np.ones_like(dispersion)
    z = (dispersion - dispersion.mean()) / (smooth * (hi - lo))
    # clip keeps exp() finite for extreme smooth values; inactive for sane ranges
    rel = 1.0 / (1.0 + np.exp(np.clip(z, -500.0, 500.0)))
    return rel / rel.max()


def update_node(node: Node, target: np.ndarray, lr: float, relevance_rate: float, smooth: float) -> None:
    """Move a node toward ``target`` and refresh its dispersion and relevance.

    The dispersion average absorbs |target - center| against the pre-move
    center, then the center moves by ``lr`` of the gap, then the relevance is
    recomputed. The order is part of the contract.
    """
    if not 0.0 < lr <= 1.0:
        raise ParameterError(f"learning rate must be in (0, 1], got {lr}")
    target = np.asarray(target, dtype=np.float64)
    if target.shape != node.center.shape:
        raise InputError(f"dimension mismatch: target{target.shape}, center{node.center.shape}")
    gain = lr * relevance_rate
    node.dispersion = (1.0 - gain) * node.dispersion + gain * np.abs(target - node.center)
    node.center = node.center + lr * (target - node.center)
    node.relevance = relevance_from_dispersion(node.dispersion, smooth)


def relevance_distance(rel_a: np.ndarray, rel_b: np.ndarray) -> float:
    """Euclidean distance between relevance vectors, normalized to [0, 1] by sqrt(d)."""
    diff = rel_a - rel_b
    return float(np.sqrt(np.sum(np.square(diff))) / np.sqrt(diff.shape[0]))


def labels_compatible(a: int | None, b: int | None) -> bool:
    """Nodes may connect when labels are equal or at least one is unset."""
    return a is None or b is None or a == b


# ---------------------------------------------------------------------------
# the map


class SomMap:
    """A set of prototype nodes plus relevance-similarity connections.

    Node ids are allocated monotonically and never reused. Edges are
    undirected, stored as (low id, high id) pairs, and only ever join nodes
    whose labels are compatible and whose relevance vectors lie within
    ``connect_threshold`` of each other.
    """

    def __init__(self, dim: int, max_nodes: int, connect_threshold: float = 0.25):
        if dim < 1:
            raise InputError("dim must be a positive integer")
        if max_nodes < 1:
            raise ParameterError("max_nodes must be a positive integer")
        if not 0.0 <= connect_threshold < 1.0:
            raise ParameterError("connect_threshold must be in [0, 1)")
        self.dim = int(dim)
        self.max_nodes = int(max_nodes)
        self.connect_threshold = float(connect_threshold)
        self.nodes: dict[int, Node] = {}
        self.competitions = 0   # per-sample competitions since the last pruning pass
        self.params: Params | None = None
        self._adj: dict[int, set[int]] = {}
        self._next_id = 0
        # relevance-row cache for connection refreshes; rebuilt when the node
        # set changes, rows re-synced for the nodes being refreshed
        self._node_version = 0
        self._cache_version = -1
        self._cache_ids: list[int] = []
        self._cache_rows: dict[int, int] = {}
        self._rel_cache: np.ndarray | None = None

    @classmethod
    def from_params(cls, dim: int, params: Params) -> "SomMap":
        return cls(dim, params.max_nodes, params.connect_threshold)

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def next_id(self) -> int:
        """Next node id to be allocated; ids are never reused."""
        return self._next_id

    @next_id.setter
    def next_id(self, value: int) -> None:
        if self.nodes and value <= max(self.nodes):
            raise StateError("next_id must exceed every existing node id")
        self._next_id = int(value)

    # -- construction ------------------------------------------------------

    def add_node(
        self,
        center: np.ndarray,
        dispersion: np.ndarray,
        relevance: np.ndarray,
        label: int | None = None,
    ) -> int | None:
        """Add a fully specified node; returns its id, or None when at capacity."""
        if len(self.nodes) >= self.max_nodes:
            log.debug("node cap %d reached, insertion skipped", self.max_nodes)
            return None
        center = np.asarray(center, dtype=np.float64)
        if center.shape != (self.dim,):
            raise InputError(f"center has shape {center.shape}, map dimension is {self.dim}")
        nid = self._next_id
        self._next_id += 1
        self.nodes[nid] = Node(
            id=nid,
            center=center.copy(),
            dispersion=np.asarray(dispersion, dtype=np.float64).copy(),
            relevance=np.asarray(relevance, dtype=np.float64).copy(),
            wins=0,
            label=None if label is None else int(label),
        )
        self._adj[nid] = set()
        self._node_version += 1
        self.refresh_connections(nid)
        return nid

    def insert_node(self, x: np.ndarray, label: int | None = None) -> int | None:
        """Insert a fresh prototype at ``x``: no dispersion history, full relevance."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.dim,):
            raise InputError(f"sample has shape {x.shape}, map dimension is {self.dim}")
        return self.add_node(x, np.zeros(self.dim), np.ones(self.dim), label)

    def attach_node(self, node: Node) -> None:
        """Register a fully built node as-is, without recomputing connections.

        Deserialization uses this to restore a map exactly; ordinary code
        should go through add_node or insert_node.
        """
        if node.id in self.nodes:
            raise StateError(f"node id {node.id} already exists")
        if node.center.shape != (self.dim,):
            raise InputError(f"center has shape {node.center.shape}, map dimension is {self.dim}")
        self.nodes[node.id] = node
        self._adj[node.id] = set()
        self._node_version += 1
        self._next_id = max(self._next_id, node.id + 1)

    # -- connections -------------------------------------------------------

    @property
    def edges(self) -> set[tuple[int, int]]:
        """Undirected edges as (low id, high id) pairs; a fresh set each call."""
        out = set()
        for a, nbrs in self._adj.items():
            for b in nbrs:
                if a < b:
                    out.add((a, b))
        return out

    def add_edge(self, a: int, b: int) -> None:
        """Low-level edge insertion (used by deserialization)."""
        if a not in self.nodes or b not in self.nodes:
            raise StateError(f"edge ({a}, {b}) references a missing node")
        if a == b:
            raise StateError(f"edge ({a}, {b}) is a self-loop")
        self._adj[a].add(b)
        self._adj[b].add(a)

    def neighbors(self, nid: int) -> list[int]:
        """Ids of nodes connected to ``nid``, ascending."""
        return sorted(self._adj.get(nid, ()))

    def refresh_connections(self, nid: int) -> None:
        """Recompute every edge incident to ``nid`` from current relevances and labels."""
        self.refresh_many([nid])

    def refresh_many(self, nids) -> None:
        """Recompute all edges incident to a set of nodes in one pass.

        Equivalent to refreshing the nodes one at a time when, as in the
        training handlers, every listed node has already reached its final
        relevance and label: either way each affected pair ends up judged on
        the final vectors. Relevance rows of nodes not listed here are read
        from the cache populated at their own last refresh, which is current
        as long as every relevance change is followed by a refresh of that
        node (the training loop guarantees it).
        """
        touched = list(dict.fromkeys(nids))
        for nid in touched:
            if nid not in self.nodes:
                raise StateError(f"no node with id {nid}")
        if self._cache_version != self._node_version:
            self._cache_ids = list(self.nodes)
            self._cache_rows = {k: i for i, k in enumerate(self._cache_ids)}
            self._rel_cache = np.stack([self.nodes[k].relevance for k in self._cache_ids])
            self._cache_version = self._node_version
        else:
            for nid in touched:
                self._rel_cache[self._cache_rows[nid]] = self.nodes[nid].relevance
        all_ids = self._cache_ids
        rel = self._rel_cache
        rows = [self._cache_rows[nid] for nid in touched]
        diff = rel[rows][:, None, :] - rel[None, :, :]
        near = np.sqrt(np.sum(np.square(diff), axis=2)) / np.sqrt(self.dim) < self.connect_threshold
        for row, nid in enumerate(touched):
            node = self.nodes[nid]
            for other in self._adj.get(nid, ()):
                self._adj[other].discard(nid)
            linked: set[int] = set()
            for j in np.flatnonzero(near[row]):
                k = all_ids[j]
                if k != nid and labels_compatible(node.label, self.nodes[k].label):
                    linked.add(k)
                    self._adj[k].add(nid)
            self._adj[nid] = linked

    def rebuild_connections(self) -> None:
        """Recompute the whole edge set from scratch."""
        ids = sorted(self.nodes)
        self._adj = {nid: set() for nid in ids}
        if len(ids) < 2:
            return
        rel = np.stack([self.nodes[i].relevance for i in ids])
        diff = rel[:, None, :] - rel[None, :, :]
        dist = np.sqrt(np.sum(np.square(diff), axis=2)) / np.sqrt(self.dim)
        labels = [self.nodes[i].label for i in ids]
        for i, a in enumerate(ids):
            for j in range(i + 1, len(ids)):
                if dist[i, j] < self.connect_threshold and labels_compatible(labels[i], labels[j]):
                    self._adj[a].add(ids[j])
                    self._adj[ids[j]].add(a)

    # -- pruning -----------------------------------------------------------

    def prune_losers(self, params: Params) -> list[int]:
        """Remove nodes that won too small a share of recent competitions.

        The threshold is ``min_win_share * prune_interval`` wins. The map is
        never emptied: if every node falls below the threshold, the node with
        the most wins (lowest id on ties) is retained. Survivors get their win
        counters reset and the competition counter starts over.
        """
        if not self.nodes:
            return []
        threshold = params.min_win_share * params.prune_interval
        doomed = [nid for nid, node in self.nodes.items() if node.wins < threshold]
        if len(doomed) == len(self.nodes):
            keep = max(self.nodes.values(), key=lambda n: (n.wins, -n.id)).id
            doomed.remove(keep)
        for nid in doomed:
            del self.nodes[nid]
        if doomed:
            self._node_version += 1
        for node in self.nodes.values():
            node.wins = 0
        self.competitions = 0
        self.rebuild_connections()
        return doomed

    # -- views -------------------------------------------------------------

    def snapshot(self) -> MapSnapshot:
        """Freeze the node set into arrays for vectorized competition."""
        ids = sorted(self.nodes)
        if not ids:
            empty = np.empty((0, self.dim))
            return MapSnapshot(
                ids=np.empty(0, dtype=np.int64),
                centers=empty,
                relevances=empty.copy(),
                relevance_sums=np.empty(0),
                labels=np.empty(0, dtype=np.int64),
            )
        centers = np.stack([self.nodes[i].center for i in ids])
        relevances = np.stack([self.nodes[i].relevance for i in ids])
        labels = np.array(
            [UNLABELED if self.nodes[i].label is None else self.nodes[i].label for i in ids],
            dtype=np.int64,
        )
        return MapSnapshot(
            ids=np.array(ids, dtype=np.int64),
            centers=centers,
            relevances=relevances,
            relevance_sums=relevances.sum(axis=1),
            labels=labels,
        )

    def labeled_node_count(self) -> int:
        return sum(1 for n in self.nodes.values() if n.label is not None)

    def check_invariants(self) -> None:
        """Raise StateError if any structural invariant is broken (test hook)."""
        if len(self.nodes) > self.max_nodes:
            raise StateError("node count exceeds max_nodes")
        for a, nbrs in self._adj.items():
            for b in nbrs:
                if b not in self._adj or a not in self._adj[b]:
                    raise StateError(f"adjacency of ({a}, {b}) is not symmetric")
        for a, b in self.edges:
            if a not in self.nodes or b not in self.nodes:
                raise StateError(f"edge ({a}, {b}) references a missing node")
            if not labels_compatible(self.nodes[a].label, self.nodes[b].label):
                raise StateError(f"edge ({a}, {b}) joins incompatible labels")
        for node in self.nodes.values():
            if node.wins < 0:
                raise StateError(f"node {node.id} has negative wins")
            if not np.all((node.relevance > 0.0) & (node.relevance <= 1.0)):
                raise StateError(f"node {node.id} relevance left (0, 1]")
            if not np.all(node.dispersion >= 0.0):
                raise StateError(f"node {node.id} has negative dispersion")
