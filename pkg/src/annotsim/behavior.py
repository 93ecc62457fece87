"""Ground-truth annotator behavior.

Daily mood trajectories shaped by chronotype, fatigue from annotation
counts, the effective accuracy they induce, the label-corruption draw,
and end-of-day history updates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .population import Annotator, Chronotype


@dataclass(frozen=True)
class SimParams:
    """Knobs of the behavioral simulation.

    ``fatigue_penalty`` is a fraction subtracted per fatigue level; the
    experiments compare 0.02 and 0.04. ``mood_unit_effect`` is the
    relative accuracy change per unit of mood away from the average.
    """

    mood_unit_effect: float = 0.06
    fatigue_penalty: float = 0.02
    fatigue_start: int = 50
    fatigue_step: int = 20
    period_length: int = 204
    periods_per_day: int = 3

    def __post_init__(self):
        if self.mood_unit_effect <= 0 or self.fatigue_penalty <= 0:
            raise ValueError("effect sizes must be positive")
        if self.fatigue_start <= 0 or self.period_length <= 0 or self.periods_per_day <= 0:
            raise ValueError("thresholds and period structure must be positive")
        if self.fatigue_step < 1:
            raise ValueError("fatigue_step must be >= 1")


@dataclass(frozen=True)
class MoodDay:
    """Mood per period for one annotator-day, each in [1, 10]."""

    moods: tuple[int, ...]


@dataclass
class FatigueLedger:
    """Annotation counts per (annotator, day, period)."""

    counts: dict[tuple[int, int, int], int] = field(default_factory=dict)

    def record(self, annotator_id: int, day: int, period: int) -> None:
        key = (annotator_id, day, period)
        self.counts[key] = self.counts.get(key, 0) + 1

    def count(self, annotator_id: int, day: int, period: int) -> int:
        return self.counts.get((annotator_id, day, period), 0)


def fatigue_level(n: int, params: SimParams) -> int:
    """Fatigue level after ``n`` annotations in the fatigue window.

    Level 0 below ``fatigue_start``, level 1 at the threshold, then one
    more level per additional ``fatigue_step`` annotations.
    """
    if n < 0:
        raise ValueError("annotation count must be non-negative")
    if n < params.fatigue_start:
        return 0
    return 1 + (n - params.fatigue_start) // params.fatigue_step


def fatigue_window_count(ledger: FatigueLedger, annotator_id: int, day: int, period: int) -> int:
    """Annotations in the current period plus the previous one of the same day."""
    total = ledger.count(annotator_id, day, period)
    if period > 0:
        total += ledger.count(annotator_id, day, period - 1)
    return total


def _clamp_mood(m: int) -> int:
    return min(10, max(1, m))


def mood_trajectory(annotator: Annotator, rng) -> MoodDay:
    """Draw one day's moods per period, shaped by chronotype.

    The first-period mood is uniform in [1, avg_mood] (avg_mood + 1 for
    lions, capped at 10); the rest of the day follows the chronotype's
    characteristic shape with independent 0/1 jitters. Lions sag in the
    last period, dolphins climb all day, bears and wolves pick up after
    the morning.
    """
    upper = annotator.avg_mood + 1 if annotator.chronotype is Chronotype.LION else annotator.avg_mood
    upper = min(upper, 10)
    m1 = int(rng.integers(1, upper + 1))
    j2 = int(rng.integers(0, 2))
    j3 = int(rng.integers(0, 2))
    if annotator.chronotype is Chronotype.LION:
        m2, m3 = m1 + j2, m1 - 1 - j3
    elif annotator.chronotype is Chronotype.DOLPHIN:
        m2, m3 = m1 + j2, m1 + 1 + j3
    elif annotator.chronotype is Chronotype.BEAR:
        m2, m3 = m1 + 1 + j2, m1 + 1
    else:  # wolf
        m2, m3 = m1 + 1, m1 + 1 + j3
    return MoodDay(moods=(m1, _clamp_mood(m2), _clamp_mood(m3)))


def effective_accuracy(
    base: float, mood: int, avg_mood: int, fatigue_lvl: int, params: SimParams
) -> float:
    """Accuracy after the mood multiplier and the fatigue deduction.

    Mood acts multiplicatively around the annotator's average; fatigue
    subtracts percentage points per level; the result is clamped once.
    """
    acc = base * (1.0 + params.mood_unit_effect * (mood - avg_mood))
    acc -= params.fatigue_penalty * fatigue_lvl
    return min(1.0, max(0.0, acc))


def simulate_label(
    annotator: Annotator,
    true_label: int,
    mood: int,
    fatigue_lvl: int,
    params: SimParams,
    rng,
) -> tuple[int, bool]:
    """Simulate the annotator labeling an instance of ``true_label``.

    Correct with probability equal to the annotator's effective accuracy
    for that label; otherwise a uniform draw over the remaining labels.
    """
    labels = annotator.labels
    if len(labels) < 2:
        raise ValueError("label set must have at least 2 labels")
    p = effective_accuracy(
        annotator.base_label_accuracy[true_label], mood, annotator.avg_mood, fatigue_lvl, params
    )
    if rng.random() < p:
        return true_label, True
    others = [l for l in labels if l != true_label]
    return others[int(rng.integers(0, len(others)))], False


def update_history(annotator: Annotator, day_observations) -> Annotator:
    """Fold one day's (true_label, correct) observations into the history.

    Only the recommender's belief moves; the base accuracies stay fixed.
    """
    for label, correct in day_observations:
        c, t = annotator.history[label]
        annotator.history[label] = (c + int(correct), t + 1)
    return annotator
