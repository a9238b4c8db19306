"""Save and load trained maps.

The on-disk format is a single JSON document with a format tag and version.
Keys are sorted and floats use Python's shortest round-trip repr, so saving
the same map always produces the same bytes and loading loses nothing.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import Node, SomMap
from .errors import MapFormatError
from .params import Params

FORMAT_TAG = "semisom-map"
FORMAT_VERSION = 1


def dumps_map(som: SomMap) -> str:
    nodes = []
    for nid in sorted(som.nodes):
        node = som.nodes[nid]
        nodes.append(
            {
                "id": node.id,
                "center": [float(v) for v in node.center],
                "dispersion": [float(v) for v in node.dispersion],
                "relevance": [float(v) for v in node.relevance],
                "wins": node.wins,
                "label": node.label,
            }
        )
    doc = {
        "format": FORMAT_TAG,
        "version": FORMAT_VERSION,
        "dim": som.dim,
        "max_nodes": som.max_nodes,
        "connect_threshold": som.connect_threshold,
        "competitions": som.competitions,
        "next_id": som.next_id,
        "params": None if som.params is None else som.params.to_dict(),
        "nodes": nodes,
        "edges": sorted([int(a), int(b)] for a, b in som.edges),
    }
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def save_map(som: SomMap, path) -> None:
    Path(path).write_text(dumps_map(som))


def loads_map(text: str) -> SomMap:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MapFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_TAG:
        raise MapFormatError(f"not a {FORMAT_TAG} file")
    if doc.get("version") != FORMAT_VERSION:
        raise MapFormatError(
            f"unsupported map version {doc.get('version')!r}, expected {FORMAT_VERSION}"
        )
    try:
        som = SomMap(
            dim=int(doc["dim"]),
            max_nodes=int(doc["max_nodes"]),
            connect_threshold=float(doc["connect_threshold"]),
        )
        som.competitions = int(doc["competitions"])
        if doc["params"] is not None:
            som.params = Params.from_dict(doc["params"])
        for rec in doc["nodes"]:
            node = Node(
                id=int(rec["id"]),
                center=_vector(rec["center"], som.dim, "center"),
                dispersion=_vector(rec["dispersion"], som.dim, "dispersion"),
                relevance=_vector(rec["relevance"], som.dim, "relevance"),
                wins=int(rec["wins"]),
                label=None if rec["label"] is None else int(rec["label"]),
            )
            if node.id in som.nodes:
                raise MapFormatError(f"duplicate node id {node.id}")
            som.attach_node(node)
        next_id = int(doc["next_id"])
        if som.nodes and next_id <= max(som.nodes):
            raise MapFormatError("next_id collides with an existing node id")
        som.next_id = next_id
        for pair in doc["edges"]:
            a, b = (int(v) for v in pair)
            if a not in som.nodes or b not in som.nodes:
                raise MapFormatError(f"edge ({a}, {b}) references a missing node")
            if a == b:
                raise MapFormatError(f"edge ({a}, {b}) is a self-loop")
            som.add_edge(a, b)
    except (KeyError, TypeError, ValueError) as exc:
        raise MapFormatError(f"malformed map file: {exc!r}") from exc
    return som


def load_map(path) -> SomMap:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MapFormatError(f"cannot read {path}: {exc}") from exc
    return loads_map(text)


def _vector(values, dim: int, name: str) -> np.ndarray:
    arr = np.asarray([float(v) for v in values], dtype=np.float64)
    if arr.shape != (dim,):
        raise MapFormatError(f"{name} has length {arr.shape[0]}, expected {dim}")
    return arr
