"""End-to-end tests for the command-line interface."""

import json
import subprocess
import sys

import numpy as np
import pytest

from semisom import Params, load_dataset, load_map
from semisom.cli import main


@pytest.fixture(scope="module")
def blob_csv(tmp_path_factory):
    p = tmp_path_factory.mktemp("data") / "blobs.csv"
    code = main([
        "make-blobs", "--out", str(p), "--samples", "90", "--classes", "3",
        "--dim", "4", "--unpaired", "--spread", "0.03", "--seed", "1",
    ])
    assert code == 0
    return p


FAST = [
    "--param", "epochs=3",
    "--param", "max_nodes=9",
    "--param", "prune_interval=180",
    "--param", "min_win_share=0.001",
    "--param", "batch_size=16",
]


def read_jsonl(path):
    return [json.loads(line) for line in path.read_text().splitlines()]


class TestMakeBlobs:
    def test_output_is_a_loadable_dataset(self, blob_csv):
        ds = load_dataset(blob_csv)
        assert ds.n_samples == 90
        assert ds.dim == 4
        assert ds.class_count == 3

    def test_deterministic_output(self, tmp_path, blob_csv):
        again = tmp_path / "again.csv"
        main([
            "make-blobs", "--out", str(again), "--samples", "90", "--classes", "3",
            "--dim", "4", "--unpaired", "--spread", "0.03", "--seed", "1",
        ])
        assert again.read_text() == blob_csv.read_text()


class TestTrain:
    def test_report_map_and_figure(self, blob_csv, tmp_path):
        report = tmp_path / "train.jsonl"
        map_file = tmp_path / "map.json"
        code = main([
            "train", "--data", str(blob_csv), *FAST, "--seed", "3",
            "--out-map", str(map_file), "--report", str(report),
        ])
        assert code == 0
        (rec,) = read_jsonl(report)
        assert rec["kind"] == "train"
        assert rec["seed"] == 3
        assert rec["metric"] == "ce"
        assert 0 < rec["value"] <= 1.0
        assert rec["n_samples"] == 90
        assert rec["supervision_rate"] == 1.0
        assert rec["params"]["epochs"] == 3
        assert rec["dataset_fingerprint"]
        som = load_map(map_file)
        assert len(som) >= 1
        assert (tmp_path / "train.map.png").exists()

    def test_repeat_runs_match_except_wall_time(self, blob_csv, tmp_path):
        reports = []
        for name in ("a.jsonl", "b.jsonl"):
            path = tmp_path / name
            assert main([
                "train", "--data", str(blob_csv), *FAST, "--seed", "5",
                "--report", str(path), "--no-figures",
            ]) == 0
            (rec,) = read_jsonl(path)
            rec.pop("wall_time")
            reports.append(rec)
        assert reports[0] == reports[1]

    def test_rate_masks_training_labels_only(self, blob_csv, tmp_path):
        report = tmp_path / "r.jsonl"
        assert main([
            "train", "--data", str(blob_csv), *FAST, "--seed", "3",
            "--rate", "0.5", "--report", str(report), "--no-figures",
        ]) == 0
        (rec,) = read_jsonl(report)
        assert rec["supervision_rate"] == 0.5
        assert rec["n_samples"] == 90

    def test_no_figures_skips_pngs(self, blob_csv, tmp_path):
        report = tmp_path / "nf.jsonl"
        assert main([
            "train", "--data", str(blob_csv), *FAST,
            "--report", str(report), "--no-figures",
        ]) == 0
        assert not list(tmp_path.glob("*.png"))

    def test_csv_companion(self, blob_csv, tmp_path):
        out = tmp_path / "flat.csv"
        assert main([
            "train", "--data", str(blob_csv), *FAST,
            "--csv", str(out), "--no-figures",
        ]) == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("kind,dataset_fingerprint")
        assert len(lines) == 2

    def test_params_file_plus_override(self, blob_csv, tmp_path):
        pfile = tmp_path / "p.json"
        Params(epochs=2, max_nodes=5, prune_interval=90, batch_size=16).save(pfile)
        report = tmp_path / "pf.jsonl"
        assert main([
            "train", "--data", str(blob_csv), "--params-file", str(pfile),
            "--param", "epochs=4", "--report", str(report), "--no-figures",
        ]) == 0
        (rec,) = read_jsonl(report)
        assert rec["params"]["epochs"] == 4
        assert rec["params"]["max_nodes"] == 5

    def test_unlabeled_training_has_no_accuracy(self, blob_csv, tmp_path):
        report = tmp_path / "u.jsonl"
        assert main([
            "train", "--data", str(blob_csv), "--label-col", "none", *FAST,
            "--report", str(report), "--no-figures",
        ]) == 0
        (rec,) = read_jsonl(report)
        assert rec["accuracy"] is None
        assert rec["value"] is None  # no labels, no clustering error


class TestEval:
    def test_matches_training_scores(self, blob_csv, tmp_path):
        train_report = tmp_path / "t.jsonl"
        map_file = tmp_path / "m.json"
        main([
            "train", "--data", str(blob_csv), *FAST, "--seed", "4",
            "--out-map", str(map_file), "--report", str(train_report), "--no-figures",
        ])
        eval_report = tmp_path / "e.jsonl"
        assert main([
            "eval", "--map", str(map_file), "--data", str(blob_csv),
            "--report", str(eval_report), "--no-figures",
        ]) == 0
        (trec,) = read_jsonl(train_report)
        (erec,) = read_jsonl(eval_report)
        assert erec["kind"] == "eval"
        assert erec["value"] == trec["value"]
        assert erec["accuracy"] == trec["accuracy"]
        assert erec["n_nodes"] == trec["n_nodes"]
        assert erec["map_file"] == str(map_file)

    def test_missing_map_is_a_data_error(self, blob_csv, tmp_path):
        assert main([
            "eval", "--map", str(tmp_path / "absent.json"), "--data", str(blob_csv),
        ]) == 3


class TestSearch:
    def test_full_artifact_set(self, blob_csv, tmp_path, capsys):
        report = tmp_path / "s.jsonl"
        map_file = tmp_path / "best.json"
        code = main([
            "search", "--data", str(blob_csv), "--n", "3", "--seed", "2",
            "--report", str(report), "--out-map", str(map_file),
        ])
        assert code == 0
        assert "best ce:" in capsys.readouterr().out
        recs = read_jsonl(report)
        assert len(recs) == 3
        assert [r["kind"] for r in recs] == ["search-run"] * 3
        assert [r["rank"] for r in recs] == [1, 2, 3]
        values = [r["value"] for r in recs if r["value"] is not None]
        assert values == sorted(values, reverse=True)
        best = Params.load(tmp_path / "s.best-params.json")
        assert best.seed == recs[0]["params"]["seed"]
        assert all(r["seed"] == 2 for r in recs)  # master seed on every record
        som = load_map(map_file)
        assert len(som) == recs[0]["n_nodes"]
        assert (tmp_path / "s.ranking.png").exists()

    def test_explicit_best_params_path(self, blob_csv, tmp_path):
        target = tmp_path / "chosen.json"
        assert main([
            "search", "--data", str(blob_csv), "--n", "2", "--seed", "1",
            "--best-params", str(target), "--no-figures",
        ]) == 0
        Params.load(target).validate()

    def test_unlabeled_dataset_rejected(self, blob_csv):
        assert main([
            "search", "--data", str(blob_csv), "--label-col", "none", "--n", "2",
        ]) == 3


class TestSweepRates:
    def test_emits_per_rate_best_records(self, blob_csv, tmp_path):
        report = tmp_path / "w.jsonl"
        code = main([
            "sweep-rates", "--data", str(blob_csv), "--rates", "0.5,1.0",
            "--n", "2", "--seed", "2", "--report", str(report),
        ])
        assert code == 0
        recs = read_jsonl(report)
        bests = [r for r in recs if r["kind"] == "sweep-best"]
        searches = [r for r in recs if r["kind"] == "search-run"]
        assert [b["supervision_rate"] for b in bests] == [0.5, 1.0]
        assert len(searches) == 4
        assert all(b["metric"] == "accuracy" for b in bests)
        assert (tmp_path / "w.rates.png").exists()

    def test_bad_rates_rejected(self, blob_csv):
        assert main(["sweep-rates", "--data", str(blob_csv), "--rates", "0.5,huh"]) == 3
        assert main(["sweep-rates", "--data", str(blob_csv), "--rates", "1.5"]) == 3
        assert main(["sweep-rates", "--data", str(blob_csv), "--rates", ""]) == 3


class TestErrorHandling:
    def test_usage_errors_exit_two(self, capsys):
        assert main([]) == 2
        assert main(["train"]) == 2
        assert main(["definitely-not-a-command"]) == 2
        capsys.readouterr()

    def test_missing_data_file_exits_three(self, tmp_path, capsys):
        assert main(["train", "--data", str(tmp_path / "ghost.csv")]) == 3
        assert "ghost.csv" in capsys.readouterr().err

    def test_bad_param_override_exits_three(self, blob_csv, capsys):
        assert main(["train", "--data", str(blob_csv), "--param", "epochs"]) == 3
        assert main(["train", "--data", str(blob_csv), "--param", "bogus=1"]) == 3
        capsys.readouterr()

    def test_bad_rate_exits_three(self, blob_csv, capsys):
        assert main(["train", "--data", str(blob_csv), "--rate", "2.0"]) == 3
        capsys.readouterr()

    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0
        assert "train" in capsys.readouterr().out


class TestConsoleScript:
    def test_entry_point_is_installed(self):
        proc = subprocess.run(
            [sys.executable, "-c", "from semisom.cli import main; raise SystemExit(main(['--help']))"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "semisom" in proc.stdout
