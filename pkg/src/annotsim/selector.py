"""Query-annotator pairing engines.

Two rankers over the same annotator views: the knowledge-based
recommender (test modes 1-3, differing only in how much of the
annotator's current state they may use) and the optimization-style
baseline (test 4). Both return a full descending ranking with ties
broken by lowest annotator id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .behavior import SimParams, fatigue_level
from .learner import QueryContext


class TestMode(str, Enum):
    __test__ = False  # not a pytest class, despite the name

    TEST1_ACCURACY_ONLY = "test1"
    TEST2_ACCURACY_MOOD = "test2"
    TEST3_ACCURACY_MOOD_FATIGUE = "test3"
    TEST4_ORACLE = "test4"


RS_MODES = (
    TestMode.TEST1_ACCURACY_ONLY,
    TestMode.TEST2_ACCURACY_MOOD,
    TestMode.TEST3_ACCURACY_MOOD_FATIGUE,
)

# Uncertainty-outlier branch needs this many recorded queries before the
# mean + 2*sd threshold is defined.
STATS_WARMUP = 10

# Weight pairs (overall, per-label) of the knowledge-based recommender.
WEIGHTS_UNCERTAIN = (0.8, 0.2)
WEIGHTS_WIDE_QUERY = (0.3, 0.7)
WEIGHTS_DEFAULT = (0.5, 0.5)

# Gap threshold separating the optimizer's weight branches.
OPT_GAP = 0.04


@dataclass(frozen=True)
class UncertaintyStats:
    """Streaming mean/variance of queried-instance uncertainties."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0  # sum of squared deviations from the running mean

    @property
    def variance(self) -> float:
        if self.count < 2:
            return 0.0
        return self.m2 / self.count

    @property
    def threshold(self) -> float:
        """Mean plus two standard deviations."""
        return self.mean + 2.0 * math.sqrt(self.variance)


def update_uncertainty_stats(stats: UncertaintyStats, u: float) -> UncertaintyStats:
    """Single-pass (Welford) update; returns a new stats value."""
    if u < 0:
        raise ValueError("uncertainty must be non-negative")
    count = stats.count + 1
    delta = u - stats.mean
    mean = stats.mean + delta / count
    m2 = stats.m2 + delta * (u - mean)
    return UncertaintyStats(count=count, mean=mean, m2=m2)


@dataclass(frozen=True)
class AnnotatorView:
    """What a pairing engine sees about one annotator.

    For test modes 1-3 the estimates come from the believed history;
    the oracle baseline is fed the generated ground-truth accuracies
    instead. Mood is the true current-period value (perfect
    self-report); fatigue_count is the annotation count in the fatigue
    window.
    """

    annotator_id: int
    label_estimates: dict[int, float]
    overall_estimate: float
    current_mood: int
    avg_mood: int
    fatigue_count: int


@dataclass(frozen=True)
class ScoredAnnotator:
    annotator_id: int
    score: float


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def predicted_accuracy(
    view: AnnotatorView, mode: TestMode, params: SimParams, label: int | None = None
) -> float:
    """The accuracy the recommender predicts under a test mode's knowledge.

    Test 1 returns the raw estimate; test 2 applies the mood multiplier;
    test 3 subtracts the fatigue deduction on top. Each stage clamps to
    [0, 1]. Pass ``label`` for the per-label estimate, omit it for the
    overall one.
    """
    if mode not in RS_MODES:
        raise ValueError("predicted_accuracy serves test modes 1-3 only")
    estimate = view.overall_estimate if label is None else view.label_estimates[label]
    if mode is TestMode.TEST1_ACCURACY_ONLY:
        return estimate
    adjusted = _clamp01(
        estimate * (1.0 + params.mood_unit_effect * (view.current_mood - view.avg_mood))
    )
    if mode is TestMode.TEST2_ACCURACY_MOOD:
        return adjusted
    level = fatigue_level(view.fatigue_count, params)
    return _clamp01(adjusted - params.fatigue_penalty * level)


def weight_branch(
    u: float, stats: UncertaintyStats, t_size: int, num_labels: int
) -> tuple[float, float]:
    """Pick the (overall, per-label) weight pair for one query.

    Unusually uncertain queries (u above mean + 2 sd, once enough queries
    are recorded) lean on overall accuracy; queries confusing more than
    half the label space lean on per-label accuracy; otherwise an even
    split.
    """
    if stats.count >= STATS_WARMUP and u > stats.threshold:
        return WEIGHTS_UNCERTAIN
    if t_size > num_labels / 2 - 1:
        return WEIGHTS_WIDE_QUERY
    return WEIGHTS_DEFAULT


def _ranked(scored: list[ScoredAnnotator]) -> list[ScoredAnnotator]:
    return sorted(scored, key=lambda s: (-s.score, s.annotator_id))


def recommend_rs(
    ctx: QueryContext,
    views,
    mode: TestMode,
    params: SimParams,
    stats: UncertaintyStats,
) -> list[ScoredAnnotator]:
    """Knowledge-based recommender ranking (test modes 1-3).

    Each annotator scores sum over the query-type labels i of
    (w * overall + w_l * per-label_i) * L[i], with the weight pair chosen
    once per query by ``weight_branch``.
    """
    views = list(views)
    if not views:
        raise ValueError("no annotators to rank")
    if mode not in RS_MODES:
        raise ValueError(f"recommend_rs does not serve {mode}")
    t = ctx.query_type_labels
    w, w_l = weight_branch(ctx.uncertainty, stats, len(t), len(ctx.probs))
    scored = []
    for view in views:
        ac = predicted_accuracy(view, mode, params)
        score = 0.0
        for i in t:
            ac_i = predicted_accuracy(view, mode, params, label=i)
            score += (w * ac + w_l * ac_i) * float(ctx.probs[i])
        scored.append(ScoredAnnotator(view.annotator_id, score))
    return _ranked(scored)


def recommend_optimal(ctx: QueryContext, views, params: SimParams) -> list[ScoredAnnotator]:
    """Optimization-baseline ranking (test 4).

    Per annotator: mood-adjusted per-label estimates for the query-type
    labels, sorted descending and zero-padded to length 3, plus the
    mood-adjusted overall estimate; the fatigue deduction then hits all
    of them with a floor at 0. The weighted average over the top three
    label accuracies and the overall accuracy depends on how tightly the
    top accuracies cluster.
    """
    views = list(views)
    if not views:
        raise ValueError("no annotators to rank")
    t = ctx.query_type_labels
    scored = []
    for view in views:
        deduction = params.fatigue_penalty * fatigue_level(view.fatigue_count, params)
        acc_labels = sorted(
            (
                predicted_accuracy(view, TestMode.TEST2_ACCURACY_MOOD, params, label=i)
                for i in t
            ),
            reverse=True,
        )
        while len(acc_labels) < 3:
            acc_labels.append(0.0)
        acc_labels = [max(0.0, a - deduction) for a in acc_labels]
        mean_accuracy = max(
            0.0, predicted_accuracy(view, TestMode.TEST2_ACCURACY_MOOD, params) - deduction
        )
        gap01 = acc_labels[0] - acc_labels[1]
        gap12 = acc_labels[1] - acc_labels[2]
        if len(t) > 1 and gap01 < OPT_GAP and gap12 >= OPT_GAP:
            weights = (0.3, 0.3, 0.0, 0.4)
        elif len(t) > 1 and gap01 < OPT_GAP and gap12 < OPT_GAP:
            weights = (0.3, 0.2, 0.2, 0.3)
        else:
            weights = (0.5, 0.0, 0.0, 0.5)
        score = (
            weights[0] * acc_labels[0]
            + weights[1] * acc_labels[1]
            + weights[2] * acc_labels[2]
            + weights[3] * mean_accuracy
        )
        scored.append(ScoredAnnotator(view.annotator_id, score))
    return _ranked(scored)
