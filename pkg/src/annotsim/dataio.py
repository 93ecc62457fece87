"""Dataset ingestion, configuration parsing, and results export."""

from __future__ import annotations

import csv
import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .behavior import SimParams
from .errors import (
    ConfigError,
    DataFileMissing,
    DatasetFormatError,
    LabelColumnMissing,
    SingleClassData,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    IterationRecord,
    aggregate,
    proportional_allocation,
)
from .learner import Dataset
from .population import BatchConfig
from .selector import TestMode

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801

SMOOTHING_WINDOW = 25

CSV_COLUMNS = (
    "iter",
    "instance",
    "uncertainty",
    "annotator_id",
    "given_label",
    "true_label",
    "correct",
    "accuracy",
    "f1",
)


@dataclass(frozen=True)
class DatasetSpec:
    """Where a dataset lives and how to ingest it."""

    kind: str  # "csv_tabular" or "idx_images"
    path: str | None = None
    images_path: str | None = None
    labels_path: str | None = None
    label_column: str | None = None
    categorical_columns: tuple[str, ...] = ()
    feature_columns: tuple[str, ...] | None = None
    subsample_max_rows: int | None = None
    subsample_stratified: bool = True
    subsample_seed: int = 0

    def __post_init__(self):
        if self.kind not in ("csv_tabular", "idx_images"):
            raise ConfigError(f"unknown dataset kind: {self.kind!r}")
        if self.kind == "csv_tabular" and (self.path is None or self.label_column is None):
            raise ConfigError("csv datasets need dataset_path and label_column")
        if self.kind == "idx_images" and (self.images_path is None or self.labels_path is None):
            raise ConfigError("idx datasets need dataset_images_path and dataset_labels_path")

    def to_doc(self) -> dict:
        return {
            "kind": self.kind,
            "path": self.path,
            "images_path": self.images_path,
            "labels_path": self.labels_path,
            "label_column": self.label_column,
            "categorical_columns": list(self.categorical_columns),
            "feature_columns": None if self.feature_columns is None else list(self.feature_columns),
            "subsample_max_rows": self.subsample_max_rows,
            "subsample_stratified": self.subsample_stratified,
            "subsample_seed": self.subsample_seed,
        }


def _stratified_subsample(labels: np.ndarray, max_rows: int, rng) -> np.ndarray:
    """Row indices of a stratified subsample, at least one row per class."""
    classes = np.unique(labels)
    if max_rows < len(classes):
        raise DatasetFormatError("subsample too small to keep every class")
    counts = [int(np.sum(labels == c)) for c in classes]
    alloc = proportional_allocation(counts, max_rows)
    alloc = [max(1, min(a, n)) for a, n in zip(alloc, counts)]
    while sum(alloc) > max_rows:  # the min-1 floor can overshoot
        i = int(np.argmax(alloc))
        alloc[i] -= 1
    picks = [
        rng.choice(np.flatnonzero(labels == c), size=a, replace=False)
        for c, a in zip(classes, alloc)
    ]
    return np.sort(np.concatenate(picks))


def _apply_subsample(features, labels, spec: DatasetSpec):
    if spec.subsample_max_rows is None or len(labels) <= spec.subsample_max_rows:
        return features, labels
    rng = np.random.default_rng(spec.subsample_seed)
    if spec.subsample_stratified:
        rows = _stratified_subsample(labels, spec.subsample_max_rows, rng)
    else:
        rows = np.sort(rng.choice(len(labels), size=spec.subsample_max_rows, replace=False))
    return features[rows], labels[rows]


def load_csv_dataset(spec: DatasetSpec) -> Dataset:
    """Ingest a header CSV: one-hot categoricals, drop incomplete rows,
    map labels to dense integers in first-appearance order."""
    path = Path(spec.path)
    if not path.exists():
        raise DataFileMissing(str(path))
    frame = pd.read_csv(path)
    if spec.label_column not in frame.columns:
        raise LabelColumnMissing(spec.label_column)
    if spec.feature_columns is not None:
        missing = [c for c in spec.feature_columns if c not in frame.columns]
        if missing:
            raise DatasetFormatError(f"feature columns not in file: {missing}")
        feature_cols = list(spec.feature_columns)
    else:
        feature_cols = [c for c in frame.columns if c != spec.label_column]
    unknown_cats = [c for c in spec.categorical_columns if c not in feature_cols]
    if unknown_cats:
        raise DatasetFormatError(f"categorical columns not among features: {unknown_cats}")

    numeric_cols = [c for c in feature_cols if c not in spec.categorical_columns]
    numeric = frame[numeric_cols].apply(pd.to_numeric, errors="coerce") if numeric_cols else None
    missing_mask = frame[spec.label_column].isna()
    if numeric is not None:
        missing_mask |= numeric.isna().any(axis=1)
    for col in spec.categorical_columns:
        missing_mask |= frame[col].isna()
    dropped = int(missing_mask.sum())
    keep = ~missing_mask

    raw_labels = [str(v) for v in frame.loc[keep, spec.label_column]]
    label_names: list[str] = []
    mapping: dict[str, int] = {}
    for value in raw_labels:
        if value not in mapping:
            mapping[value] = len(label_names)
            label_names.append(value)
    if len(label_names) < 2:
        raise SingleClassData(f"{path} has a single label value")
    labels = np.array([mapping[v] for v in raw_labels], dtype=np.int64)

    blocks: list[np.ndarray] = []
    feature_names: list[str] = []
    for col in feature_cols:
        if col in spec.categorical_columns:
            values = [str(v) for v in frame.loc[keep, col]]
            categories: list[str] = []
            seen: dict[str, int] = {}
            for v in values:
                if v not in seen:
                    seen[v] = len(categories)
                    categories.append(v)
            block = np.zeros((len(values), len(categories)))
            for row, v in enumerate(values):
                block[row, seen[v]] = 1.0
            blocks.append(block)
            feature_names.extend(f"{col}={cat}" for cat in categories)
        else:
            blocks.append(numeric.loc[keep, col].to_numpy(dtype=np.float64).reshape(-1, 1))
            feature_names.append(col)
    features = np.hstack(blocks)

    features, labels = _apply_subsample(features, labels, spec)
    return Dataset(
        features=features,
        labels=labels,
        n_classes=len(label_names),
        label_names=label_names,
        feature_names=feature_names,
        meta={
            "source": str(path),
            "dropped_rows": dropped,
            "label_mapping": mapping,
            "n_rows": int(len(labels)),
        },
    )


def _read_idx(path: Path, expected_magic: int, header_fields: int):
    if not path.exists():
        raise DataFileMissing(str(path))
    blob = path.read_bytes()
    header_size = 4 * header_fields
    if len(blob) < header_size:
        raise DatasetFormatError(f"{path}: truncated header")
    header = struct.unpack(f">{header_fields}I", blob[:header_size])
    if header[0] != expected_magic:
        raise DatasetFormatError(f"{path}: bad magic {header[0]:#010x}")
    return header, blob[header_size:]


def load_idx_images(spec: DatasetSpec) -> Dataset:
    """Ingest an IDX image/label file pair, pixels scaled to [0, 1]."""
    (_, n_images, rows, cols), pixels = _read_idx(Path(spec.images_path), IDX_IMAGES_MAGIC, 4)
    (_, n_labels), label_bytes = _read_idx(Path(spec.labels_path), IDX_LABELS_MAGIC, 2)
    if n_images != n_labels:
        raise DatasetFormatError(f"{n_images} images vs {n_labels} labels")
    if len(pixels) != n_images * rows * cols:
        raise DatasetFormatError("image file truncated")
    if len(label_bytes) != n_labels:
        raise DatasetFormatError("label file truncated")
    features = (
        np.frombuffer(pixels, dtype=np.uint8)
        .reshape(n_images, rows * cols)
        .astype(np.float64)
        / 255.0
    )
    labels = np.frombuffer(label_bytes, dtype=np.uint8).astype(np.int64)
    n_classes = int(labels.max()) + 1
    if n_classes < 2:
        raise SingleClassData(str(spec.labels_path))
    features, labels = _apply_subsample(features, labels, spec)
    return Dataset(
        features=features,
        labels=labels,
        n_classes=n_classes,
        label_names=[str(c) for c in range(n_classes)],
        feature_names=[f"px{i}" for i in range(rows * cols)],
        meta={
            "source": str(spec.images_path),
            "dropped_rows": 0,
            "label_mapping": {str(c): c for c in range(n_classes)},
            "n_rows": int(len(labels)),
        },
    )


def load_dataset(spec: DatasetSpec) -> Dataset:
    if spec.kind == "csv_tabular":
        return load_csv_dataset(spec)
    return load_idx_images(spec)


# ---------------------------------------------------------------------------
# results export


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    return str(value)


def _write_iterations_csv(records: list[IterationRecord], path: Path) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow(
                [
                    r.iteration,
                    r.instance,
                    _fmt(r.uncertainty),
                    r.annotator_id,
                    r.given_label,
                    r.true_label,
                    _fmt(r.correct),
                    _fmt(r.accuracy),
                    _fmt(r.f1),
                ]
            )


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_dir_name(batch_label: str, seed: int, mode: str) -> str:
    return f"{batch_label}_seed{seed}_{mode}"


def export_results(results, out_dir, config_doc=None, dataset_meta=None) -> list[Path]:
    """Write per-run iterations.csv files, summary.json, and manifest.json.

    The manifest inventories every written file with its sha256 checksum.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    run_entries = []
    for (batch_label, seed, mode), result in sorted(results.items()):
        run_dir = out / "runs" / run_dir_name(batch_label, seed, mode)
        run_dir.mkdir(parents=True, exist_ok=True)
        csv_path = run_dir / "iterations.csv"
        _write_iterations_csv(result.records, csv_path)
        written.append(csv_path)
        ledger_path = run_dir / "ledger.json"
        ledger_doc = {
            f"{aid}/{day}/{period}": count
            for (aid, day, period), count in sorted(result.ledger_counts.items())
        }
        ledger_path.write_text(json.dumps(ledger_doc, indent=1))
        written.append(ledger_path)
        run_entries.append(
            {
                "batch": batch_label,
                "seed": seed,
                "mode": mode,
                "path": str(csv_path.relative_to(out)),
                "sha256": _sha256(csv_path),
                "iterations": len(result.records),
                "wall_time_s": result.wall_time_s,
                "cpu_time_s": result.cpu_time_s,
            }
        )

    summary = aggregate(results)
    summary_path = out / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=1))
    written.append(summary_path)

    manifest = {
        "tool_version": __version__,
        "config_hash": summary["config_hash"],
        "config": config_doc,
        "dataset": dataset_meta,
        "per_run_seeds": sorted({seed for _, seed, _ in results}),
        "runs": run_entries,
        "files": {str(p.relative_to(out)): _sha256(p) for p in written},
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=1))
    written.append(manifest_path)
    return written


def read_run_dir(out_dir) -> dict:
    """Rebuild aggregatable results from an exported run directory."""
    out = Path(out_dir)
    manifest_path = out / "manifest.json"
    if not manifest_path.exists():
        raise DataFileMissing(str(manifest_path))
    manifest = json.loads(manifest_path.read_text())
    results = {}
    for entry in manifest["runs"]:
        records = []
        with (out / entry["path"]).open(newline="") as fh:
            for row in csv.DictReader(fh):
                records.append(
                    IterationRecord(
                        iteration=int(row["iter"]),
                        instance=int(row["instance"]),
                        uncertainty=float(row["uncertainty"]),
                        annotator_id=int(row["annotator_id"]),
                        given_label=int(row["given_label"]),
                        true_label=int(row["true_label"]),
                        correct=bool(int(row["correct"])),
                        accuracy=float(row["accuracy"]) if row["accuracy"] else None,
                        f1=float(row["f1"]) if row["f1"] else None,
                    )
                )
        evaluated = [r for r in records if r.accuracy is not None]
        result = ExperimentResult(
            records=records,
            correct_rate=float(np.mean([r.correct for r in records])),
            final_accuracy=evaluated[-1].accuracy,
            final_f1=evaluated[-1].f1,
            mean_uncertainty=float(np.mean([r.uncertainty for r in records])),
            wall_time_s=entry["wall_time_s"],
            cpu_time_s=entry["cpu_time_s"],
            mode=entry["mode"],
            batch_label=entry["batch"],
            seed=entry["seed"],
            config_hash=manifest["config_hash"],
        )
        results[(entry["batch"], entry["seed"], entry["mode"])] = result
    return results


# ---------------------------------------------------------------------------
# plot data


def moving_average(values, window: int = SMOOTHING_WINDOW) -> list[float]:
    """Centered moving average; edge windows shrink instead of padding."""
    half = window // 2
    n = len(values)
    return [
        float(np.mean(values[max(0, i - half) : min(n, i + half + 1)]))
        for i in range(n)
    ]


def emit_plot_data(summary: dict, out_dir, window: int = SMOOTHING_WINDOW) -> list[Path]:
    """One long-format CSV per metric: (mode, iter, raw, smoothed)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    metric_grids = {
        "uncertainty": "iteration",
        "accuracy": "eval_iteration",
        "f1": "eval_iteration",
    }
    written = []
    for metric, grid_key in metric_grids.items():
        path = out / f"{metric}.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["mode", "iter", "raw", "smoothed"])
            for mode, entry in summary["modes"].items():
                grid = entry["curves"][grid_key]
                raw = entry["curves"][metric]
                smoothed = moving_average(raw, window)
                for it, r, s in zip(grid, raw, smoothed):
                    writer.writerow([mode, it, _fmt(r), _fmt(s)])
        written.append(path)
    return written


# ---------------------------------------------------------------------------
# configuration parsing

_EXPERIMENT_KEYS = {
    "dataset_kind",
    "dataset_path",
    "dataset_images_path",
    "dataset_labels_path",
    "label_column",
    "categorical_columns",
    "feature_columns",
    "subsample_max_rows",
    "subsample_stratified",
    "subsample_seed",
    "batch_files",
    "modes",
    "mood_unit_effect",
    "fatigue_penalty",
    "fatigue_start",
    "fatigue_step",
    "period_length",
    "periods_per_day",
    "seed_set_size",
    "max_annotations",
    "stop_accuracy",
    "eval_every",
    "refit_every",
    "n_trees",
    "max_depth",
    "split_strategy",
    "rng_seed",
    "replications",
}

_BATCH_KEYS = {
    "batch_id",
    "n_labels",
    "rng_seed",
    "n_annotators",
    "age_group_probs",
    "sex_probs",
}


def _reject_unknown(doc: dict, allowed: set, what: str) -> None:
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigError(f"unknown {what} keys: {unknown}")


def _resolve(base_dir: Path | None, value: str) -> str:
    path = Path(value)
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    return str(path)


def parse_experiment_config(doc: dict, base_dir: Path | None = None) -> ExperimentConfig:
    """Build an ExperimentConfig from a flat JSON document.

    Relative paths are resolved against the config file's directory.
    """
    _reject_unknown(doc, _EXPERIMENT_KEYS, "config")
    try:
        spec = DatasetSpec(
            kind=doc.get("dataset_kind", "csv_tabular"),
            path=_resolve(base_dir, doc["dataset_path"]) if "dataset_path" in doc else None,
            images_path=(
                _resolve(base_dir, doc["dataset_images_path"])
                if "dataset_images_path" in doc
                else None
            ),
            labels_path=(
                _resolve(base_dir, doc["dataset_labels_path"])
                if "dataset_labels_path" in doc
                else None
            ),
            label_column=doc.get("label_column"),
            categorical_columns=tuple(doc.get("categorical_columns", ())),
            feature_columns=(
                tuple(doc["feature_columns"]) if doc.get("feature_columns") is not None else None
            ),
            subsample_max_rows=doc.get("subsample_max_rows"),
            subsample_stratified=bool(doc.get("subsample_stratified", True)),
            subsample_seed=int(doc.get("subsample_seed", 0)),
        )
        params = SimParams(
            mood_unit_effect=float(doc.get("mood_unit_effect", 0.06)),
            fatigue_penalty=float(doc.get("fatigue_penalty", 0.02)),
            fatigue_start=int(doc.get("fatigue_start", 50)),
            fatigue_step=int(doc.get("fatigue_step", 20)),
            period_length=int(doc.get("period_length", 204)),
            periods_per_day=int(doc.get("periods_per_day", 3)),
        )
        modes = tuple(TestMode(m) for m in doc.get("modes", ["test1", "test2", "test3", "test4"]))
        return ExperimentConfig(
            dataset=spec,
            batch_files=tuple(_resolve(base_dir, f) for f in doc.get("batch_files", ())),
            modes=modes,
            params=params,
            seed_set_size=doc.get("seed_set_size"),
            max_annotations=int(doc.get("max_annotations", 1224)),
            stop_accuracy=float(doc.get("stop_accuracy", 0.99)),
            eval_every=int(doc.get("eval_every", 10)),
            refit_every=int(doc.get("refit_every", 1)),
            n_trees=int(doc.get("n_trees", 50)),
            max_depth=int(doc.get("max_depth", 12)),
            split_strategy=str(doc.get("split_strategy", "exhaustive")),
            rng_seed=int(doc.get("rng_seed", 0)),
            replications=int(doc.get("replications", 1)),
        )
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc


def parse_batch_config(doc: dict) -> BatchConfig:
    _reject_unknown(doc, _BATCH_KEYS, "batch config")
    try:
        return BatchConfig(
            batch_id=str(doc["batch_id"]),
            n_labels=int(doc["n_labels"]),
            rng_seed=int(doc["rng_seed"]),
            n_annotators=int(doc.get("n_annotators", 30)),
            age_group_probs=tuple(doc.get("age_group_probs", (0.25, 0.25, 0.25, 0.25))),
            sex_probs=tuple(doc.get("sex_probs", (0.5, 0.5))),
        )
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc


def load_json(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
