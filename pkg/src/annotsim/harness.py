"""Experiment orchestration.

Runs the full active-learning loop against a simulated annotator batch:
seed-set construction, the period/day clock, query selection, annotator
ranking, label simulation, end-of-day history updates, stopping, and
aggregation over (batch, seed, mode) runs.

Randomness is keyed so paired mode comparisons share draws: mood
trajectories stream from (run_seed, annotator, day) and the labeling
draw from (run_seed, iteration), independent of selection history.
"""

from __future__ import annotations

import copy
import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Mapping

import numpy as np

from .behavior import (
    FatigueLedger,
    SimParams,
    fatigue_level,
    fatigue_window_count,
    mood_trajectory,
    simulate_label,
    update_history,
)
from .errors import ConfigError, DataError
from .learner import Dataset, ForestModel, evaluate, select_query
from .population import Annotator, load_batch
from .selector import (
    AnnotatorView,
    TestMode,
    UncertaintyStats,
    recommend_optimal,
    recommend_rs,
    update_uncertainty_stats,
)

if TYPE_CHECKING:
    from .dataio import DatasetSpec

# Substream tags keeping the simulation's random draws independent.
_SEEDSET_STREAM = 11
_MOOD_STREAM = 21
_LABEL_STREAM = 31
_FOREST_STREAM = 41


def _stream(*key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(tuple(int(k) for k in key)))


class ClockEvent(str, Enum):
    PERIOD_END = "period_end"
    DAY_END = "day_end"


@dataclass(frozen=True)
class SimClock:
    day: int = 0
    period: int = 0
    annotations_in_period: int = 0


def advance_clock(clock: SimClock, params: SimParams) -> tuple[SimClock, set[ClockEvent]]:
    """Count one annotation; roll periods and days as they fill up."""
    events: set[ClockEvent] = set()
    day, period, n = clock.day, clock.period, clock.annotations_in_period + 1
    if n >= params.period_length:
        events.add(ClockEvent.PERIOD_END)
        n = 0
        period += 1
        if period >= params.periods_per_day:
            events.add(ClockEvent.DAY_END)
            period = 0
            day += 1
    return SimClock(day=day, period=period, annotations_in_period=n), events


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that defines one experiment family.

    ``rng_seed`` seeds replication 0; replication r runs with seed
    ``rng_seed + r``. The config hash covers the parameters that must
    match for results to be aggregated together (dataset, simulation,
    learner, and loop settings) but not the aggregation dimensions
    themselves (batches, modes, seeds).
    """

    dataset: "DatasetSpec"
    batch_files: tuple[str, ...]
    modes: tuple[TestMode, ...] = (
        TestMode.TEST1_ACCURACY_ONLY,
        TestMode.TEST2_ACCURACY_MOOD,
        TestMode.TEST3_ACCURACY_MOOD_FATIGUE,
        TestMode.TEST4_ORACLE,
    )
    params: SimParams = field(default_factory=SimParams)
    seed_set_size: int | None = None
    max_annotations: int = 1224
    stop_accuracy: float = 0.99
    eval_every: int = 10
    refit_every: int = 1
    n_trees: int = 50
    max_depth: int = 12
    split_strategy: str = "exhaustive"
    rng_seed: int = 0
    replications: int = 1

    def __post_init__(self):
        if self.max_annotations < 1:
            raise ConfigError("max_annotations must be >= 1")
        if not 0.0 < self.stop_accuracy <= 1.0:
            raise ConfigError("stop_accuracy must be in (0, 1]")
        if self.eval_every < 1 or self.refit_every < 1:
            raise ConfigError("eval_every and refit_every must be >= 1")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if self.rng_seed < 0:
            raise ConfigError("rng_seed must be non-negative")
        if not self.batch_files:
            raise ConfigError("at least one batch file is required")
        if not self.modes:
            raise ConfigError("at least one test mode is required")

    def hash_doc(self) -> dict:
        return {
            "dataset": self.dataset.to_doc(),
            "params": {
                "mood_unit_effect": self.params.mood_unit_effect,
                "fatigue_penalty": self.params.fatigue_penalty,
                "fatigue_start": self.params.fatigue_start,
                "fatigue_step": self.params.fatigue_step,
                "period_length": self.params.period_length,
                "periods_per_day": self.params.periods_per_day,
            },
            "seed_set_size": self.seed_set_size,
            "max_annotations": self.max_annotations,
            "stop_accuracy": self.stop_accuracy,
            "eval_every": self.eval_every,
            "refit_every": self.refit_every,
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "split_strategy": self.split_strategy,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.hash_doc(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass(frozen=True)
class IterationRecord:
    iteration: int  # 1-based
    instance: int
    uncertainty: float
    annotator_id: int
    given_label: int
    true_label: int
    correct: bool
    accuracy: float | None = None  # populated on evaluation iterations
    f1: float | None = None


@dataclass
class ExperimentResult:
    records: list[IterationRecord]
    correct_rate: float
    final_accuracy: float
    final_f1: float
    mean_uncertainty: float
    wall_time_s: float
    cpu_time_s: float
    mode: str
    batch_label: str
    seed: int
    config_hash: str
    ledger_counts: dict[tuple[int, int, int], int] = field(default_factory=dict)
    mood_log: dict[tuple[int, int], tuple[int, ...]] = field(default_factory=dict)


def proportional_allocation(counts: list[int], total: int) -> list[int]:
    """Largest-remainder split of ``total`` proportional to ``counts``."""
    pool = sum(counts)
    if pool == 0 or total == 0:
        return [0] * len(counts)
    raw = [total * c / pool for c in counts]
    alloc = [int(x) for x in raw]
    leftovers = sorted(
        range(len(counts)), key=lambda i: (-(raw[i] - alloc[i]), i)
    )
    for i in leftovers[: total - sum(alloc)]:
        alloc[i] += 1
    return alloc


def build_seed_set(
    dataset: Dataset, rng, size: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Stratified labeled seed set and the remaining unlabeled pool.

    Default size is max(10, 2C): two instances per class where possible,
    the rest allocated proportionally to class frequency. Seed labels are
    ground truth.
    """
    C = dataset.n_classes
    class_rows = [np.flatnonzero(dataset.labels == c) for c in range(C)]
    if any(len(rows) == 0 for rows in class_rows):
        raise DataError("every class needs at least one row to build a seed set")
    target = size if size is not None else max(10, 2 * C)
    if target < C:
        raise ConfigError("seed set must cover every class at least once")
    if target > len(dataset):
        raise DataError("dataset smaller than the requested seed set")
    floor = 2 if target >= 2 * C else 1
    alloc = [min(floor, len(rows)) for rows in class_rows]
    spare = [len(rows) - a for rows, a in zip(class_rows, alloc)]
    extra = proportional_allocation(spare, target - sum(alloc))
    alloc = [a + min(e, s) for a, e, s in zip(alloc, extra, spare)]
    # capped classes can leave a shortfall; backfill greedily
    shortfall = target - sum(alloc)
    while shortfall > 0:
        i = max(range(C), key=lambda c: len(class_rows[c]) - alloc[c])
        if len(class_rows[i]) == alloc[i]:
            raise DataError("dataset smaller than the requested seed set")
        alloc[i] += 1
        shortfall -= 1
    picks = [
        rng.choice(rows, size=a, replace=False) for rows, a in zip(class_rows, alloc) if a > 0
    ]
    seed_idx = np.sort(np.concatenate(picks).astype(np.int64))
    mask = np.ones(len(dataset), dtype=bool)
    mask[seed_idx] = False
    return seed_idx, np.flatnonzero(mask).astype(np.int64)


def _draw_moods(annotators, run_seed: int, day: int, mood_fn=mood_trajectory):
    return {
        a.id: mood_fn(a, _stream(run_seed, _MOOD_STREAM, a.id, day))
        for a in annotators
    }


def _make_views(annotators, moods, ledger, clock, oracle=False):
    """Views for the pairing engines.

    Tests 1-3 see the believed history estimates; the oracle mode
    (test 4) sees the generated ground-truth accuracies the labeling
    simulation actually uses. Mood and fatigue are the true current
    values either way (what each mode does with them is its own
    business).
    """
    views = []
    for a in annotators:
        if oracle:
            label_estimates = dict(a.base_label_accuracy)
            overall = a.base_overall_accuracy
        else:
            label_estimates = {l: a.label_estimate(l) for l in a.labels}
            overall = a.overall_estimate()
        views.append(
            AnnotatorView(
                annotator_id=a.id,
                label_estimates=label_estimates,
                overall_estimate=overall,
                current_mood=moods[a.id].moods[clock.period],
                avg_mood=a.avg_mood,
                fatigue_count=fatigue_window_count(ledger, a.id, clock.day, clock.period),
            )
        )
    return views


def run_experiment(
    config: ExperimentConfig,
    mode: TestMode,
    dataset: Dataset,
    annotators: list[Annotator],
    batch_label: str = "batch",
    replication: int = 0,
    mood_fn=mood_trajectory,
) -> ExperimentResult:
    """One full run of the active-learning loop under one test mode.

    ``mood_fn`` swaps in a different daily mood model; it must map an
    annotator and a generator to a MoodDay.
    """
    if dataset.n_classes != len(annotators[0].labels):
        raise ConfigError(
            f"batch annotators cover {len(annotators[0].labels)} labels, "
            f"dataset has {dataset.n_classes} classes"
        )
    params = config.params
    run_seed = config.rng_seed + replication
    annotators = copy.deepcopy(annotators)  # history mutates during the run
    by_id = {a.id: a for a in annotators}

    wall0, cpu0 = time.perf_counter(), time.process_time()
    seed_idx, pool_idx = build_seed_set(
        dataset, _stream(run_seed, _SEEDSET_STREAM), config.seed_set_size
    )
    X32 = np.ascontiguousarray(dataset.features, dtype=np.float32)
    in_pool = np.zeros(len(dataset), dtype=bool)
    in_pool[pool_idx] = True
    labeled = list(seed_idx)
    y_train = [int(dataset.labels[i]) for i in seed_idx]

    forest_seed = int(np.random.SeedSequence((run_seed, _FOREST_STREAM)).generate_state(1)[0])
    model = ForestModel(
        n_classes=dataset.n_classes,
        n_trees=config.n_trees,
        max_depth=config.max_depth,
        split_strategy=config.split_strategy,
        seed=forest_seed,
    )

    clock = SimClock()
    ledger = FatigueLedger()
    stats = UncertaintyStats()
    moods = _draw_moods(annotators, run_seed, day=0, mood_fn=mood_fn)
    mood_log = {(a.id, 0): moods[a.id].moods for a in annotators}
    day_observations: dict[int, list[tuple[int, bool]]] = {}
    records: list[IterationRecord] = []

    iteration = 0
    while in_pool.any() and iteration < config.max_annotations:
        iteration += 1
        if (iteration - 1) % config.refit_every == 0:
            model.fit(X32[np.asarray(labeled)], y_train)
        pool = np.flatnonzero(in_pool)
        ctx = select_query(model, X32[pool], pool)

        if mode is TestMode.TEST4_ORACLE:
            views = _make_views(annotators, moods, ledger, clock, oracle=True)
            ranking = recommend_optimal(ctx, views, params)
        else:
            views = _make_views(annotators, moods, ledger, clock)
            ranking = recommend_rs(ctx, views, mode, params, stats)
        chosen = by_id[ranking[0].annotator_id]

        true_label = int(dataset.labels[ctx.instance_index])
        window = fatigue_window_count(ledger, chosen.id, clock.day, clock.period)
        level = fatigue_level(window, params)
        mood_now = moods[chosen.id].moods[clock.period]
        given, correct = simulate_label(
            chosen, true_label, mood_now, level, params,
            _stream(run_seed, _LABEL_STREAM, iteration),
        )

        ledger.record(chosen.id, clock.day, clock.period)
        day_observations.setdefault(chosen.id, []).append((true_label, correct))
        labeled.append(ctx.instance_index)
        y_train.append(given)
        in_pool[ctx.instance_index] = False
        stats = update_uncertainty_stats(stats, ctx.uncertainty)

        accuracy = f1 = None
        last = iteration == config.max_annotations or not in_pool.any()
        if iteration % config.eval_every == 0 or last:
            accuracy, f1 = evaluate(model, dataset)
        records.append(
            IterationRecord(
                iteration=iteration,
                instance=ctx.instance_index,
                uncertainty=ctx.uncertainty,
                annotator_id=chosen.id,
                given_label=given,
                true_label=true_label,
                correct=correct,
                accuracy=accuracy,
                f1=f1,
            )
        )

        clock, events = advance_clock(clock, params)
        if ClockEvent.DAY_END in events:
            for a in annotators:
                update_history(a, day_observations.get(a.id, []))
            day_observations = {}
            moods = _draw_moods(annotators, run_seed, day=clock.day, mood_fn=mood_fn)
            for a in annotators:
                mood_log[(a.id, clock.day)] = moods[a.id].moods

        if accuracy is not None and accuracy >= config.stop_accuracy:
            break

    evaluated = [r for r in records if r.accuracy is not None]
    final = evaluated[-1]
    return ExperimentResult(
        records=records,
        correct_rate=float(np.mean([r.correct for r in records])),
        final_accuracy=final.accuracy,
        final_f1=final.f1,
        mean_uncertainty=float(np.mean([r.uncertainty for r in records])),
        wall_time_s=time.perf_counter() - wall0,
        cpu_time_s=time.process_time() - cpu0,
        mode=mode.value,
        batch_label=batch_label,
        seed=run_seed,
        config_hash=config.config_hash(),
        ledger_counts=dict(ledger.counts),
        mood_log=mood_log,
    )


RunKey = tuple[str, int, str]  # (batch_label, seed, mode value)


def run_suite(config: ExperimentConfig, jobs: int = 1) -> dict[RunKey, ExperimentResult]:
    """Run every (batch, replication, mode) combination of the config."""
    from .dataio import load_dataset  # deferred: dataio imports this module

    dataset = load_dataset(config.dataset)
    batches = [(Path(f).stem, load_batch(f)) for f in config.batch_files]
    tasks = [
        (batch_label, annotators, replication, mode)
        for batch_label, annotators in batches
        for replication in range(config.replications)
        for mode in config.modes
    ]
    results: dict[RunKey, ExperimentResult] = {}
    if jobs <= 1:
        for batch_label, annotators, replication, mode in tasks:
            result = run_experiment(config, mode, dataset, annotators, batch_label, replication)
            results[(batch_label, result.seed, mode.value)] = result
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(run_experiment, config, mode, dataset, annotators, batch_label, replication)
                for batch_label, annotators, replication, mode in tasks
            ]
            for future in futures:
                result = future.result()
                results[(result.batch_label, result.seed, result.mode)] = result
    return results


def aggregate(results: Mapping[RunKey, ExperimentResult]) -> dict:
    """Per-mode means across batches and seeds, plus aligned mean curves.

    Curves are aligned by iteration index and truncated to the shortest
    run of each mode; accuracy/F1 curves keep only iterations evaluated
    in every run.
    """
    if not results:
        raise ValueError("no results to aggregate")
    hashes = {r.config_hash for r in results.values()}
    if len(hashes) != 1:
        raise ValueError(f"refusing to aggregate mixed configs: {sorted(hashes)}")
    summary: dict = {"config_hash": hashes.pop(), "n_runs": len(results), "modes": {}}
    modes = sorted({key[2] for key in results})
    for mode in modes:
        runs = [r for key, r in sorted(results.items()) if key[2] == mode]
        min_len = min(len(r.records) for r in runs)
        uncertainty_curve = [
            float(np.mean([r.records[i].uncertainty for r in runs])) for i in range(min_len)
        ]
        eval_iters = [
            i + 1
            for i in range(min_len)
            if all(r.records[i].accuracy is not None for r in runs)
        ]
        accuracy_curve = [
            float(np.mean([r.records[i - 1].accuracy for r in runs])) for i in eval_iters
        ]
        f1_curve = [float(np.mean([r.records[i - 1].f1 for r in runs])) for i in eval_iters]
        summary["modes"][mode] = {
            "n_runs": len(runs),
            "correct_rate": float(np.mean([r.correct_rate for r in runs])),
            "final_accuracy": float(np.mean([r.final_accuracy for r in runs])),
            "final_f1": float(np.mean([r.final_f1 for r in runs])),
            "mean_uncertainty": float(np.mean([r.mean_uncertainty for r in runs])),
            "mean_wall_time_s": float(np.mean([r.wall_time_s for r in runs])),
            "mean_cpu_time_s": float(np.mean([r.cpu_time_s for r in runs])),
            "curves": {
                "iteration": list(range(1, min_len + 1)),
                "uncertainty": uncertainty_curve,
                "eval_iteration": eval_iters,
                "accuracy": accuracy_curve,
                "f1": f1_curve,
            },
        }
    return summary
