from __future__ import annotations

import json

import pytest

from annotsim.cli import main
from annotsim.population import load_batch


@pytest.fixture
def workspace(tmp_path, wine_csv):
    batch_config = tmp_path / "batch_config.json"
    batch_config.write_text(
        json.dumps({"batch_id": "b0", "n_labels": 6, "rng_seed": 17, "n_annotators": 8})
    )
    experiment_config = tmp_path / "experiment.json"
    experiment_config.write_text(
        json.dumps(
            {
                "dataset_kind": "csv_tabular",
                "dataset_path": str(wine_csv),
                "label_column": "quality",
                "batch_files": ["batch.json"],
                "modes": ["test1", "test3"],
                "fatigue_penalty": 0.04,
                "max_annotations": 15,
                "eval_every": 5,
                "n_trees": 6,
                "max_depth": 6,
                "split_strategy": "random",
                "rng_seed": 2,
            }
        )
    )
    return tmp_path


def test_full_cli_pipeline(workspace, capsys):
    batch_path = workspace / "batch.json"
    assert main(
        ["gen-annotators", "--config", str(workspace / "batch_config.json"), "--out", str(batch_path)]
    ) == 0
    annotators = load_batch(batch_path)
    assert len(annotators) == 8

    out_dir = workspace / "out"
    assert main(["run", "--config", str(workspace / "experiment.json"), "--out", str(out_dir)]) == 0
    assert (out_dir / "summary.json").exists()
    assert (out_dir / "manifest.json").exists()
    assert (out_dir / "runs" / "batch_seed2_test1" / "iterations.csv").exists()
    stdout = capsys.readouterr().out
    assert "test1" in stdout and "test3" in stdout

    summary_dir = workspace / "combined"
    assert main(["summarize", "--in", str(out_dir), "--out", str(summary_dir)]) == 0
    combined = json.loads((summary_dir / "summary.json").read_text())
    original = json.loads((out_dir / "summary.json").read_text())
    assert combined == original

    plots_dir = workspace / "plots"
    assert main(["plot-data", "--in", str(out_dir), "--out", str(plots_dir)]) == 0
    assert (plots_dir / "uncertainty.csv").exists()
    assert (plots_dir / "accuracy.csv").exists()


def test_run_modes_flag_overrides_config(workspace):
    batch_path = workspace / "batch.json"
    main(["gen-annotators", "--config", str(workspace / "batch_config.json"), "--out", str(batch_path)])
    out_dir = workspace / "only3"
    assert main(
        [
            "run",
            "--config",
            str(workspace / "experiment.json"),
            "--modes",
            "test3",
            "--out",
            str(out_dir),
        ]
    ) == 0
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert {r["mode"] for r in manifest["runs"]} == {"test3"}


def test_config_error_exit_code(workspace, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"unknown_key": True}))
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert main(["gen-annotators", "--config", str(tmp_path / "nope.json"), "--out", "x"]) == 2


def test_data_error_exit_code(workspace, tmp_path):
    batch_path = workspace / "batch.json"
    main(["gen-annotators", "--config", str(workspace / "batch_config.json"), "--out", str(batch_path)])
    doc = json.loads((workspace / "experiment.json").read_text())
    doc["dataset_path"] = str(tmp_path / "missing.csv")
    broken = workspace / "broken.json"
    broken.write_text(json.dumps(doc))
    assert main(["run", "--config", str(broken), "--out", str(tmp_path / "o")]) == 3


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
