"""Machine-readable run reports.

Every CLI action appends JSON records, one per line, to its report file. A
record always carries the dataset fingerprint, the supervision rate, the
seed, the primary metric name and value, the node count, the wall time, and
the full parameter set, so any number can be traced back to its exact run.
A flat CSV view and an aligned text table are available for quick reading
and external plotting.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from .dataio import Dataset
from .params import Params
from .search import SearchRun


@dataclass(frozen=True)
class RunReport:
    kind: str                  # train | eval | search-run | sweep-best
    dataset_fingerprint: str
    dataset_source: str
    n_samples: int
    supervision_rate: float
    seed: int
    metric: str
    value: float | None
    n_nodes: int | None
    wall_time: float
    params: dict
    extras: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        rec = {
            "kind": self.kind,
            "dataset_fingerprint": self.dataset_fingerprint,
            "dataset_source": self.dataset_source,
            "n_samples": self.n_samples,
            "supervision_rate": self.supervision_rate,
            "seed": self.seed,
            "metric": self.metric,
            "value": self.value,
            "n_nodes": self.n_nodes,
            "wall_time": round(self.wall_time, 6),
            "params": self.params,
        }
        rec.update(self.extras)
        return rec


def dataset_info(dataset: Dataset) -> dict:
    return {
        "fingerprint": dataset.fingerprint,
        "source": dataset.source,
        "n_samples": dataset.n_samples,
        "dim": dataset.dim,
        "class_count": dataset.class_count,
    }


def run_report(
    kind: str,
    dataset: Dataset,
    rate: float,
    params: Params | dict | None,
    metric: str,
    value: float | None,
    n_nodes: int | None,
    wall_time: float,
    seed: int,
    **extras,
) -> RunReport:
    if isinstance(params, Params):
        params = params.to_dict()
    return RunReport(
        kind=kind,
        dataset_fingerprint=dataset.fingerprint,
        dataset_source=dataset.source,
        n_samples=dataset.n_samples,
        supervision_rate=rate,
        seed=seed,
        metric=metric,
        value=value,
        n_nodes=n_nodes,
        wall_time=wall_time,
        params=params or {},
        extras=extras,
    )


def search_reports(dataset: Dataset, rate: float, seed: int, ranked: list[SearchRun]) -> list[RunReport]:
    """One search-run record per configuration, in ranking order."""
    out = []
    for rank, run in enumerate(ranked, start=1):
        extras = {"rank": rank, "run_index": run.index}
        if run.error is not None:
            extras["error"] = run.error
        out.append(
            run_report(
                "search-run",
                dataset,
                rate,
                run.params,
                run.metric,
                run.value,
                run.n_nodes,
                run.wall_time,
                seed,
                **extras,
            )
        )
    return out


def write_jsonl(reports: list[RunReport], path) -> None:
    with open(path, "a") as fh:
        for report in reports:
            fh.write(json.dumps(report.to_record(), sort_keys=True) + "\n")


CSV_COLUMNS = [
    "kind", "dataset_fingerprint", "dataset_source", "n_samples",
    "supervision_rate", "seed", "metric", "value", "n_nodes",
    "wall_time", "rank", "run_index", "error",
]


def write_csv(reports: list[RunReport], path) -> None:
    """Flat view of the same records without the nested parameter dict."""
    path = Path(path)
    fresh = not path.exists() or path.stat().st_size == 0
    with open(path, "a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, extrasaction="ignore")
        if fresh:
            writer.writeheader()
        for report in reports:
            rec = report.to_record()
            writer.writerow({k: rec.get(k, "") for k in CSV_COLUMNS})


def render_table(rows: list[dict], columns: list[str]) -> str:
    """Align dict rows into a text table; floats get 4 decimals, None a dash."""

    def cell(value) -> str:
        if value is None or value == "":
            return "-"
        if isinstance(value, float):
            return f"{value:.4f}"
        return str(value)

    grid = [columns] + [[cell(row.get(c)) for c in columns] for row in rows]
    widths = [max(len(r[i]) for r in grid) for i in range(len(columns))]
    lines = []
    for r, row in enumerate(grid):
        lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip())
        if r == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)
