"""Parameter search: Latin hypercube sampling plus a best-of-N runner.

The ten training dynamics parameters are drawn jointly: each one's range is
split into n equal strata and every stratum is hit exactly once across the n
sampled configurations. Three parameters are sampled indirectly: the two
secondary learning rates as fractions of the winner rate, and the pruning
interval as a multiple of the dataset size.
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from .dataio import Dataset
from .errors import InputError, ParameterError
from .metrics import evaluate
from .params import Params, default_params
from .training import train_map

log = logging.getLogger(__name__)

METRICS = ("ce", "accuracy")


@dataclass(frozen=True)
class ParamRanges:
    """(low, high) sampling bounds for each searched parameter."""

    act_threshold: tuple[float, float] = (0.90, 0.999)
    min_win_share: tuple[float, float] = (0.001, 0.01)
    relevance_rate: tuple[float, float] = (0.001, 0.5)
    prune_interval_mult: tuple[float, float] = (1.0, 100.0)
    lr_winner: tuple[float, float] = (0.001, 0.2)
    lr_wrong_frac: tuple[float, float] = (0.01, 1.0)
    lr_neighbor_frac: tuple[float, float] = (0.002, 1.0)
    relevance_smooth: tuple[float, float] = (0.01, 0.1)
    connect_threshold: tuple[float, float] = (0.0, 0.5)
    epochs: tuple[float, float] = (1.0, 100.0)

    def validate(self) -> None:
        for f in fields(self):
            lo, hi = getattr(self, f.name)
            if not lo <= hi:
                raise ParameterError(f"{f.name}: low {lo} exceeds high {hi}")

    def names(self) -> list[str]:
        return [f.name for f in fields(self)]


def lhs_unit(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """n points in [0, 1)^k where every column hits each of n strata once."""
    if n < 1 or k < 1:
        raise ParameterError("n and k must be positive")
    out = np.empty((n, k))
    for j in range(k):
        out[:, j] = (rng.permutation(n) + rng.uniform(size=n)) / n
    return out


def lhs_sample(
    ranges: ParamRanges,
    n: int,
    n_samples: int,
    seed: int,
    base: Params | None = None,
) -> list[Params]:
    """Draw n stratified parameter sets for a dataset of ``n_samples`` rows.

    Non-searched fields (batch size, node cap, toggles) come from ``base``,
    which defaults to the dataset-scaled defaults. Each returned Params gets
    its own training seed derived from ``seed`` and the draw index, so runs
    are independent but reproducible.
    """
    ranges.validate()
    if n < 1:
        raise ParameterError("need at least one sample")
    if base is None:
        base = default_params(n_samples)
    rng = np.random.default_rng(seed)
    names = ranges.names()
    unit = lhs_unit(n, len(names), rng)
    out: list[Params] = []
    for i in range(n):
        draw = {}
        for j, name in enumerate(names):
            lo, hi = getattr(ranges, name)
            draw[name] = lo + unit[i, j] * (hi - lo)
        run_seed = int(np.random.SeedSequence([seed, i]).generate_state(1)[0])
        p = base.replace(
            act_threshold=draw["act_threshold"],
            min_win_share=draw["min_win_share"],
            relevance_rate=draw["relevance_rate"],
            prune_interval=max(1, round(draw["prune_interval_mult"] * n_samples)),
            lr_winner=draw["lr_winner"],
            lr_wrong=draw["lr_wrong_frac"] * draw["lr_winner"],
            lr_neighbor=draw["lr_neighbor_frac"] * draw["lr_winner"],
            relevance_smooth=draw["relevance_smooth"],
            connect_threshold=draw["connect_threshold"],
            epochs=max(1, round(draw["epochs"])),
            seed=run_seed,
        )
        p.validate()
        out.append(p)
    return out


@dataclass(frozen=True)
class SearchRun:
    """Outcome of one search configuration; ``value`` is None when it failed."""

    index: int
    params: Params
    metric: str
    value: float | None
    n_nodes: int | None
    wall_time: float
    error: str | None = None


def _run_one(job: tuple[int, Params, Dataset, str]) -> SearchRun:
    index, params, dataset, metric = job
    started = time.perf_counter()
    try:
        som = train_map(dataset, params)
        scores = evaluate(som, dataset.X, dataset.labels)
        value = scores[metric]
        if value is None:
            raise InputError(f"metric {metric!r} undefined: the map has no labeled nodes")
        return SearchRun(
            index=index,
            params=params,
            metric=metric,
            value=float(value),
            n_nodes=scores["n_nodes"],
            wall_time=time.perf_counter() - started,
        )
    except Exception as exc:  # a bad configuration must not kill the sweep
        log.warning("search run %d failed: %r", index, exc)
        return SearchRun(
            index=index,
            params=params,
            metric=metric,
            value=None,
            n_nodes=None,
            wall_time=time.perf_counter() - started,
            error=repr(exc),
        )


def rank_runs(runs: list[SearchRun]) -> list[SearchRun]:
    """Best first: by value descending, ties by run index; failures last."""
    return sorted(runs, key=lambda r: (r.value is None, -(r.value or 0.0), r.index))


def best_run(runs: list[SearchRun]) -> SearchRun | None:
    ranked = rank_runs(runs)
    if ranked and ranked[0].value is not None:
        return ranked[0]
    return None


def run_search(
    dataset: Dataset,
    ranges: ParamRanges | None = None,
    n: int = 10,
    seed: int = 0,
    metric: str = "ce",
    jobs: int = 1,
    base: Params | None = None,
) -> list[SearchRun]:
    """Train one map per sampled configuration and rank them by the metric.

    Scoring always uses the dataset's full labels, regardless of the mask the
    trainer saw. Failed runs are kept (value None, error recorded) and sort
    last. With jobs > 1 runs execute in separate processes; the ranking does
    not depend on scheduling.
    """
    if metric not in METRICS:
        raise ParameterError(f"metric must be one of {METRICS}, got {metric!r}")
    if dataset.labels is None:
        raise InputError("search needs labeled data to score against")
    if jobs < 1:
        raise ParameterError("jobs must be at least 1")
    sampled = lhs_sample(ranges or ParamRanges(), n, dataset.n_samples, seed, base)
    job_args = [(i, p, dataset, metric) for i, p in enumerate(sampled)]
    if jobs == 1:
        runs = [_run_one(job) for job in job_args]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_run_one, job_args))
    return rank_runs(runs)
