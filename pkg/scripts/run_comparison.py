#!/usr/bin/env python3
"""Run the full four-way selector comparison on the wine-style dataset.

Generates three 30-annotator batches, runs 3 batches x 3 seeds x 4 test
modes for 1224 annotations each (two simulated work days), and writes
iterations, summary, and plot data under the output directory. Expect
roughly ten minutes with --jobs 2.
"""

import argparse
import json
import time
from pathlib import Path

from annotsim.dataio import (
    DatasetSpec,
    emit_plot_data,
    export_results,
    load_dataset,
)
from annotsim.behavior import SimParams
from annotsim.harness import ExperimentConfig, aggregate, run_suite
from annotsim.population import BatchConfig, generate_batch, save_batch
from annotsim.synthdata import write_wine_like_csv

BATCH_SEEDS = (101, 202, 303)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/wine_comparison")
    parser.add_argument("--jobs", type=int, default=2)
    parser.add_argument("--fatigue-penalty", type=float, default=0.04)
    parser.add_argument("--replications", type=int, default=3)
    parser.add_argument("--max-annotations", type=int, default=1224)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    wine = write_wine_like_csv(out / "wine_quality.csv")

    batch_files = []
    for i, seed in enumerate(BATCH_SEEDS):
        path = out / f"batch{i}.json"
        save_batch(generate_batch(BatchConfig(batch_id=f"batch{i}", n_labels=6, rng_seed=seed)), path)
        batch_files.append(str(path))

    config = ExperimentConfig(
        dataset=DatasetSpec(
            kind="csv_tabular",
            path=str(wine),
            label_column="quality",
            subsample_max_rows=2000,
        ),
        batch_files=tuple(batch_files),
        params=SimParams(fatigue_penalty=args.fatigue_penalty),
        max_annotations=args.max_annotations,
        n_trees=15,
        max_depth=12,
        split_strategy="random",
        rng_seed=11,
        replications=args.replications,
    )

    started = time.perf_counter()
    results = run_suite(config, jobs=args.jobs)
    elapsed = time.perf_counter() - started

    dataset_meta = load_dataset(config.dataset).meta
    export_results(results, out, config_doc=config.hash_doc(), dataset_meta=dataset_meta)
    summary = aggregate(results)
    emit_plot_data(summary, out / "plots")

    print(f"\n{len(results)} runs in {elapsed / 60:.1f} min")
    print(f"{'mode':<7}{'correct':>9}{'accuracy':>10}{'f1':>8}{'uncertainty':>13}")
    for mode, entry in summary["modes"].items():
        print(
            f"{mode:<7}{entry['correct_rate']:>9.4f}{entry['final_accuracy']:>10.4f}"
            f"{entry['final_f1']:>8.4f}{entry['mean_uncertainty']:>13.4f}"
        )
    test1 = summary["modes"]["test1"]["correct_rate"]
    test3 = summary["modes"]["test3"]["correct_rate"]
    print(f"\ntest3 improves correct annotations over test1 by {100 * (test3 / test1 - 1):.1f}%")
    print(f"outputs under {out}")


if __name__ == "__main__":
    main()
