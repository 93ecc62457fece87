"""Command-line interface.

Subcommands: gen-annotators, run, summarize, plot-data.
Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__, dataio
from .errors import ConfigError, DataError
from .harness import aggregate, run_suite
from .population import generate_batch, save_batch
from .selector import TestMode


def _cmd_gen_annotators(args) -> int:
    doc = dataio.load_json(args.config)
    batch_config = dataio.parse_batch_config(doc)
    annotators = generate_batch(batch_config)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_batch(annotators, out)
    print(f"wrote {len(annotators)} annotators to {out}")
    return 0


def _parse_modes(raw: str) -> tuple[TestMode, ...]:
    try:
        return tuple(TestMode(m.strip()) for m in raw.split(",") if m.strip())
    except ValueError as exc:
        raise ConfigError(f"unknown test mode in --modes: {raw}") from exc


def _cmd_run(args) -> int:
    config_path = Path(args.config)
    doc = dataio.load_json(config_path)
    config = dataio.parse_experiment_config(doc, base_dir=config_path.parent)
    if args.modes:
        config = dataio.parse_experiment_config(
            {**doc, "modes": [m.value for m in _parse_modes(args.modes)]},
            base_dir=config_path.parent,
        )
    results = run_suite(config, jobs=args.jobs)
    dataset_meta = dataio.load_dataset(config.dataset).meta
    written = dataio.export_results(
        results, args.out, config_doc=config.hash_doc(), dataset_meta=dataset_meta
    )
    summary = aggregate(results)
    for mode, entry in summary["modes"].items():
        print(
            f"{mode}: correct_rate={entry['correct_rate']:.4f} "
            f"accuracy={entry['final_accuracy']:.4f} f1={entry['final_f1']:.4f} "
            f"uncertainty={entry['mean_uncertainty']:.4f} ({entry['n_runs']} runs)"
        )
    print(f"wrote {len(written)} files under {args.out}")
    return 0


def _cmd_summarize(args) -> int:
    merged = {}
    for in_dir in args.in_dirs:
        results = dataio.read_run_dir(in_dir)
        overlap = set(results) & set(merged)
        if overlap:
            raise ConfigError(f"duplicate runs across input dirs: {sorted(overlap)}")
        merged.update(results)
    summary = aggregate(merged)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    import json

    (out / "summary.json").write_text(json.dumps(summary, indent=1))
    for mode, entry in summary["modes"].items():
        print(
            f"{mode}: correct_rate={entry['correct_rate']:.4f} "
            f"accuracy={entry['final_accuracy']:.4f} ({entry['n_runs']} runs)"
        )
    print(f"wrote {out / 'summary.json'}")
    return 0


def _cmd_plot_data(args) -> int:
    import json

    summary_path = Path(args.in_dir) / "summary.json"
    if not summary_path.exists():
        raise DataError(f"no summary.json in {args.in_dir}; run `run` or `summarize` first")
    summary = json.loads(summary_path.read_text())
    written = dataio.emit_plot_data(summary, args.out, window=args.window)
    print(f"wrote {', '.join(str(p) for p in written)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="annotsim",
        description="Simulate annotator-selection strategies for active learning.",
    )
    parser.add_argument("--version", action="version", version=f"annotsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-annotators", help="generate a batch of annotators")
    gen.add_argument("--config", required=True, help="batch config JSON")
    gen.add_argument("--out", required=True, help="output batch JSON file")
    gen.set_defaults(func=_cmd_gen_annotators)

    run = sub.add_parser("run", help="run the experiment suite")
    run.add_argument("--config", required=True, help="experiment config JSON")
    run.add_argument("--modes", help="comma-separated subset, e.g. test1,test3")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    run.set_defaults(func=_cmd_run)

    summarize = sub.add_parser("summarize", help="re-aggregate exported run directories")
    summarize.add_argument("--in", dest="in_dirs", nargs="+", required=True)
    summarize.add_argument("--out", required=True)
    summarize.set_defaults(func=_cmd_summarize)

    plot = sub.add_parser("plot-data", help="emit long-format plot CSVs from a summary")
    plot.add_argument("--in", dest="in_dir", required=True)
    plot.add_argument("--out", required=True)
    plot.add_argument("--window", type=int, default=dataio.SMOOTHING_WINDOW)
    plot.set_defaults(func=_cmd_plot_data)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
