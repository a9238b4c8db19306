"""Training hyperparameters and engine settings."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import InputError, ParameterError


@dataclass
class Params:
    """Everything a training run needs besides the data.

    The first ten fields control the map dynamics; the rest are engine
    settings (batching, capacity, reproducibility, numerics).
    """

    act_threshold: float = 0.96      # minimum winner activation before a sample spawns a node
    min_win_share: float = 0.005     # share of competitions a node must win to survive pruning
    relevance_rate: float = 0.05     # smoothing rate of the per-dimension dispersion average
    prune_interval: int = 4000       # competitions between pruning passes (absolute count)
    lr_winner: float = 0.10          # learning rate of the winning node
    lr_wrong: float = 0.05           # learning rate of the optional wrong-winner repulsion step
    lr_neighbor: float = 0.01        # learning rate of nodes connected to the winner
    relevance_smooth: float = 0.05   # slope of the dispersion-to-relevance squashing
    connect_threshold: float = 0.25  # max normalized relevance distance for two nodes to connect
    epochs: int = 30
    batch_size: int = 32
    max_nodes: int = 50
    seed: int = 42
    eps: float = 1e-8
    repel_wrong: bool = False            # push a labeled winner away from foreign-class means
    duplicate_in_convergence: bool = True  # allow conflict-driven node duplication in the final pass

    def validate(self) -> None:
        """Raise ParameterError on any out-of-range field."""
        checks = [
            (0.0 < self.act_threshold < 1.0, "act_threshold must be in (0, 1)"),
            (0.0 < self.min_win_share < 1.0, "min_win_share must be in (0, 1)"),
            (0.0 < self.relevance_rate < 1.0, "relevance_rate must be in (0, 1)"),
            (self.prune_interval >= 1, "prune_interval must be a positive integer"),
            (0.0 < self.lr_winner <= 1.0, "lr_winner must be in (0, 1]"),
            (0.0 < self.lr_wrong <= self.lr_winner, "lr_wrong must be in (0, lr_winner]"),
            (0.0 < self.lr_neighbor <= self.lr_winner, "lr_neighbor must be in (0, lr_winner]"),
            (self.relevance_smooth > 0.0, "relevance_smooth must be positive"),
            (0.0 <= self.connect_threshold < 1.0, "connect_threshold must be in [0, 1)"),
            (self.epochs >= 1, "epochs must be a positive integer"),
            (self.batch_size >= 1, "batch_size must be a positive integer"),
            (self.max_nodes >= 1, "max_nodes must be a positive integer"),
            (self.seed >= 0, "seed must be a non-negative integer"),
            (self.eps > 0.0, "eps must be positive"),
        ]
        for ok, message in checks:
            if not ok:
                raise ParameterError(message)

    def replace(self, **changes) -> "Params":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Params":
        fields = {f.name: f for f in dataclasses.fields(cls)}
        unknown = set(data) - set(fields)
        if unknown:
            raise ParameterError(f"unknown parameter(s): {', '.join(sorted(unknown))}")
        coerced = {}
        for key, value in data.items():
            target = fields[key].type
            try:
                if target == "int":
                    coerced[key] = int(value)
                elif target == "float":
                    coerced[key] = float(value)
                elif target == "bool":
                    coerced[key] = _as_bool(value)
                else:
                    coerced[key] = value
            except (TypeError, ValueError) as exc:
                raise ParameterError(f"bad value for {key}: {value!r}") from exc
        return cls(**coerced)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Params":
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise InputError(f"cannot read parameter file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParameterError(f"cannot parse parameter file {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ParameterError(f"parameter file {path} must hold a JSON object")
        return cls.from_dict(data)


def _as_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)) and value in (0, 1):
        return bool(value)
    if isinstance(value, str):
        lowered = value.strip().lower()
        if lowered in ("true", "yes", "on", "1"):
            return True
        if lowered in ("false", "no", "off", "0"):
            return False
    raise ValueError(f"not a boolean: {value!r}")


def default_params(n_samples: int, **overrides) -> Params:
    """Sensible defaults scaled to a dataset of ``n_samples`` rows.

    The pruning window defaults to ten passes over the data and the node cap
    to ten percent of the data, both of which track how the search ranges are
    resolved against a concrete dataset.
    """
    if n_samples < 1:
        raise ParameterError("n_samples must be positive")
    params = Params(
        prune_interval=10 * n_samples,
        max_nodes=max(1, round(0.10 * n_samples)),
    )
    return params.replace(**overrides) if overrides else params
