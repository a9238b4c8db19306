"""Command-line interface.

Subcommands: train (one map), eval (apply a saved map), search (best-of-N
parameter sweep), sweep-rates (a search per supervision rate), and make-blobs
(synthetic dataset generation). Reports go to line-delimited JSON via
--report, optionally mirrored as flat CSV via --csv, with PNG figures
rendered next to the report unless --no-figures is given.

Exit codes: 0 success, 2 usage error, 3 input or parameter error, 4 internal.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

from . import plots, report
from .dataio import Dataset, apply_mask, load_dataset
from .errors import InputError, ParameterError, SemisomError
from .mapfile import load_map, save_map
from .metrics import evaluate
from .params import Params, default_params
from .search import best_run, run_search
from .synthetic import gaussian_blobs
from .training import train_map

log = logging.getLogger(__name__)

DEFAULT_SWEEP_RATES = "0.01,0.05,0.1,0.25,0.5,0.75,1.0"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except SemisomError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # pragma: no cover - defensive catch-all
        log.exception("internal error")
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semisom",
        description="Semi-supervised relevance-weighted self-organizing map.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress details")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a single map")
    _add_data_args(p)
    p.add_argument("--rate", type=float, default=1.0, help="fraction of labels shown to training")
    p.add_argument("--params-file", help="JSON parameter file (see Params)")
    p.add_argument(
        "--param", action="append", default=[], metavar="KEY=VALUE",
        help="override one parameter; repeatable",
    )
    p.add_argument("--seed", type=int, help="override the training seed")
    p.add_argument("--out-map", help="write the trained map here")
    _add_report_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="apply a saved map to a dataset")
    p.add_argument("--map", required=True, help="map file produced by train or search")
    _add_data_args(p)
    _add_report_args(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("search", help="rank N sampled parameter sets on a dataset")
    _add_data_args(p)
    p.add_argument("--n", type=int, default=10, help="number of configurations")
    p.add_argument("--seed", type=int, default=0, help="master seed for sampling and masking")
    p.add_argument("--rate", type=float, default=1.0, help="fraction of labels shown to training")
    p.add_argument("--metric", choices=("ce", "accuracy"), default="ce")
    p.add_argument("--jobs", type=int, help="parallel worker processes (default $SEMISOM_JOBS or 1)")
    p.add_argument("--out-map", help="retrain the best configuration and write its map here")
    p.add_argument("--best-params", help="write the best parameter set here (JSON)")
    _add_report_args(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("sweep-rates", help="run a search per supervision rate")
    _add_data_args(p)
    p.add_argument("--rates", default=DEFAULT_SWEEP_RATES, help="comma-separated rates in [0, 1]")
    p.add_argument("--n", type=int, default=10, help="configurations per rate")
    p.add_argument("--seed", type=int, default=0, help="master seed for sampling and masking")
    p.add_argument("--metric", choices=("ce", "accuracy"), default="accuracy")
    p.add_argument("--jobs", type=int, help="parallel worker processes (default $SEMISOM_JOBS or 1)")
    _add_report_args(p)
    p.set_defaults(func=cmd_sweep_rates)

    p = sub.add_parser("make-blobs", help="generate a synthetic labeled CSV dataset")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--samples", type=int, default=5000)
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--spread", type=float, default=0.04)
    p.add_argument("--pair-gap", type=float, default=0.06)
    p.add_argument("--unpaired", action="store_true", help="separate every class instead of pairing")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_make_blobs)

    return parser


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="dataset file (CSV or ARFF)")
    p.add_argument("--format", choices=("csv", "arff"), help="override format inference")
    p.add_argument(
        "--label-col", default="auto",
        help="label column: name, index, 'auto' (last column), or 'none'",
    )


def _add_report_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--report", help="append JSONL records here")
    p.add_argument("--csv", dest="csv_out", help="append flat CSV records here")
    p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")


# ---------------------------------------------------------------------------
# shared pieces


def _parse_label_col(value: str):
    if value == "none":
        return None
    try:
        return int(value)
    except ValueError:
        return value


def _load(args) -> Dataset:
    dataset = load_dataset(args.data, fmt=args.format, label_column=_parse_label_col(args.label_col))
    log.info(
        "loaded %s: %d samples, %d dims, %d classes",
        dataset.source, dataset.n_samples, dataset.dim, dataset.class_count,
    )
    return dataset


def _masked(dataset: Dataset, rate: float, seed: int) -> Dataset:
    if dataset.labels is None:
        if rate not in (0.0, 1.0):
            log.warning("dataset has no labels; --rate %s is ignored", rate)
        return dataset
    return apply_mask(dataset, rate, seed)


def _resolve_jobs(args) -> int:
    if args.jobs is not None:
        return args.jobs
    env = os.environ.get("SEMISOM_JOBS", "").strip()
    if env:
        try:
            return int(env)
        except ValueError:
            raise ParameterError(f"SEMISOM_JOBS must be an integer, got {env!r}") from None
    return 1


def _build_train_params(args, n_samples: int) -> Params:
    if args.params_file:
        params = Params.load(args.params_file)
    else:
        params = default_params(n_samples)
    overrides = {}
    for item in args.param:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ParameterError(f"--param expects KEY=VALUE, got {item!r}")
        overrides[key] = value
    if overrides:
        merged = params.to_dict()
        merged.update(overrides)
        params = Params.from_dict(merged)
    if args.seed is not None:
        params = params.replace(seed=args.seed)
    params.validate()
    return params


def _figure_path(report_path: str, tag: str) -> Path:
    base = Path(report_path)
    return base.with_name(f"{base.stem}.{tag}.png")


def _emit(args, reports: list[report.RunReport], table: str | None = None) -> None:
    if table:
        print(table)
    if args.report:
        report.write_jsonl(reports, args.report)
        log.info("wrote %d records to %s", len(reports), args.report)
    if args.csv_out:
        report.write_csv(reports, args.csv_out)


def _want_figures(args) -> bool:
    return bool(args.report) and not args.no_figures


# ---------------------------------------------------------------------------
# subcommands


def cmd_train(args) -> int:
    dataset = _load(args)
    params = _build_train_params(args, dataset.n_samples)
    masked = _masked(dataset, args.rate, params.seed)
    started = time.perf_counter()
    som = train_map(masked, params)
    wall = time.perf_counter() - started
    scores = evaluate(som, dataset.X, dataset.labels)
    if args.out_map:
        save_map(som, args.out_map)
        log.info("map written to %s", args.out_map)

    rec = report.run_report(
        "train", dataset, masked.supervision_rate, params,
        metric="ce", value=scores.get("ce"), n_nodes=scores["n_nodes"],
        wall_time=wall, seed=params.seed,
        accuracy=scores.get("accuracy"), n_labeled_nodes=scores["n_labeled_nodes"],
    )
    table = report.render_table(
        [{**rec.to_record(), "accuracy": scores.get("accuracy")}],
        ["kind", "supervision_rate", "value", "accuracy", "n_nodes", "wall_time"],
    )
    _emit(args, [rec], table)
    if _want_figures(args):
        plots.save_map_overview(som, _figure_path(args.report, "map"))
    return 0


def cmd_eval(args) -> int:
    som = load_map(args.map)
    dataset = _load(args)
    started = time.perf_counter()
    scores = evaluate(som, dataset.X, dataset.labels)
    wall = time.perf_counter() - started
    rec = report.run_report(
        "eval", dataset, dataset.supervision_rate, som.params,
        metric="ce", value=scores.get("ce"), n_nodes=scores["n_nodes"],
        wall_time=wall, seed=som.params.seed if som.params else 0,
        accuracy=scores.get("accuracy"), n_labeled_nodes=scores["n_labeled_nodes"],
        map_file=str(args.map),
    )
    table = report.render_table(
        [{**rec.to_record(), "accuracy": scores.get("accuracy")}],
        ["kind", "value", "accuracy", "n_nodes", "wall_time"],
    )
    _emit(args, [rec], table)
    if _want_figures(args):
        plots.save_map_overview(som, _figure_path(args.report, "map"))
    return 0


def cmd_search(args) -> int:
    dataset = _load(args)
    if dataset.labels is None:
        raise InputError("search needs a labeled dataset to score against")
    masked = _masked(dataset, args.rate, args.seed)
    ranked = run_search(
        masked, n=args.n, seed=args.seed, metric=args.metric, jobs=_resolve_jobs(args)
    )
    best = best_run(ranked)
    if best is None:
        raise InputError("every configuration failed; see the report for errors")
    print(f"best {args.metric}: {best.value:.4f} (run {best.index}, {best.n_nodes} nodes)")

    best_params_path = args.best_params
    if best_params_path is None and args.report:
        base = Path(args.report)
        best_params_path = str(base.with_name(f"{base.stem}.best-params.json"))
    if best_params_path:
        best.params.save(best_params_path)
        log.info("best parameters written to %s", best_params_path)
    if args.out_map:
        som = train_map(masked, best.params)
        save_map(som, args.out_map)
        log.info("best map written to %s", args.out_map)

    recs = report.search_reports(dataset, masked.supervision_rate, args.seed, ranked)
    head = [r.to_record() for r in recs[:10]]
    table = report.render_table(head, ["rank", "run_index", "value", "n_nodes", "error"])
    _emit(args, recs, table)
    if _want_figures(args):
        plots.save_ranked_metric(ranked, _figure_path(args.report, "ranking"),
                                 title=Path(args.data).name)
    return 0


def cmd_sweep_rates(args) -> int:
    dataset = _load(args)
    if dataset.labels is None:
        raise InputError("sweep-rates needs a labeled dataset")
    try:
        rates = [float(r) for r in args.rates.split(",") if r.strip() != ""]
    except ValueError:
        raise ParameterError(f"--rates must be comma-separated numbers, got {args.rates!r}") from None
    if not rates:
        raise ParameterError("--rates is empty")

    all_recs: list[report.RunReport] = []
    summary_rows: list[dict] = []
    best_values: list[float | None] = []
    for rate in rates:
        masked = _masked(dataset, rate, args.seed)
        ranked = run_search(
            masked, n=args.n, seed=args.seed, metric=args.metric, jobs=_resolve_jobs(args)
        )
        best = best_run(ranked)
        value = None if best is None else best.value
        best_values.append(value)
        all_recs.extend(report.search_reports(dataset, rate, args.seed, ranked))
        all_recs.append(
            report.run_report(
                "sweep-best", dataset, rate,
                None if best is None else best.params,
                args.metric, value,
                None if best is None else best.n_nodes,
                sum(r.wall_time for r in ranked), args.seed,
                n_configs=args.n,
            )
        )
        summary_rows.append({"rate": rate, f"best_{args.metric}": value,
                             "n_nodes": None if best is None else best.n_nodes})
        log.info("rate %.3f: best %s = %s", rate, args.metric, value)

    table = report.render_table(summary_rows, ["rate", f"best_{args.metric}", "n_nodes"])
    _emit(args, all_recs, table)
    if _want_figures(args):
        plots.save_rate_curve(rates, best_values, _figure_path(args.report, "rates"),
                              metric=args.metric)
    return 0


def cmd_make_blobs(args) -> int:
    dataset = gaussian_blobs(
        n_samples=args.samples,
        n_classes=args.classes,
        dim=args.dim,
        spread=args.spread,
        pair_gap=args.pair_gap,
        paired=not args.unpaired,
        seed=args.seed,
    )
    out = Path(args.out)
    header = [f"f{i}" for i in range(dataset.dim)] + ["label"]
    with open(out, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row, label in zip(dataset.X, dataset.labels):
            fh.write(",".join(repr(float(v)) for v in row) + f",{int(label)}\n")
    print(f"wrote {dataset.n_samples} samples, {dataset.dim} dims, "
          f"{dataset.class_count} classes to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
