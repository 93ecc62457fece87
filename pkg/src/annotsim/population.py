"""Synthetic annotator populations.

Generates seeded batches of annotators with demographic attributes
(age group, sex), a chronotype, an average mood, and per-label base
accuracies backed by a 100-annotation pseudo-history.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np


class Chronotype(str, Enum):
    DOLPHIN = "dolphin"
    LION = "lion"
    BEAR = "bear"
    WOLF = "wolf"


class AgeGroup(str, Enum):
    G25_37 = "25-37"
    G38_45 = "38-45"
    G46_55 = "46-55"
    G56_65 = "56-65"


AGE_GROUP_ORDER = (AgeGroup.G25_37, AgeGroup.G38_45, AgeGroup.G46_55, AgeGroup.G56_65)
SEXES = ("F", "M")

# Chronotype probabilities per age group. Bears sit near 50% everywhere,
# dolphins vanish after 45, lions take over in the older groups.
CHRONOTYPE_ORDER = (Chronotype.BEAR, Chronotype.DOLPHIN, Chronotype.WOLF, Chronotype.LION)
CHRONOTYPE_TABLE: dict[AgeGroup, dict[Chronotype, float]] = {
    AgeGroup.G25_37: {
        Chronotype.BEAR: 0.50,
        Chronotype.DOLPHIN: 0.20,
        Chronotype.WOLF: 0.25,
        Chronotype.LION: 0.05,
    },
    AgeGroup.G38_45: {
        Chronotype.BEAR: 0.50,
        Chronotype.DOLPHIN: 0.10,
        Chronotype.WOLF: 0.25,
        Chronotype.LION: 0.15,
    },
    AgeGroup.G46_55: {
        Chronotype.BEAR: 0.50,
        Chronotype.DOLPHIN: 0.00,
        Chronotype.WOLF: 0.15,
        Chronotype.LION: 0.35,
    },
    AgeGroup.G56_65: {
        Chronotype.BEAR: 0.50,
        Chronotype.DOLPHIN: 0.00,
        Chronotype.WOLF: 0.15,
        Chronotype.LION: 0.35,
    },
}

ACCURACY_MEAN = 0.75
ACCURACY_SD = 0.07
LABEL_ACCURACY_SD = 0.06
PSEUDO_HISTORY_SIZE = 100

_PROB_TOL = 1e-9


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def _categorical(quantile: float, choices: Sequence, probs: Sequence[float]):
    """Map a uniform quantile onto a categorical draw, in listed order."""
    acc = 0.0
    for choice, p in zip(choices, probs):
        acc += p
        if quantile < acc:
            return choice
    return choices[-1]  # rounding slack at the top of the cumulative sum


@dataclass
class Annotator:
    """One simulated annotator.

    The generated profile (everything except ``history``) is ground truth
    and never changes. ``history`` holds the (correct, total) counts the
    recommender believes in; it starts at the 100-annotation pseudo-history
    and grows at end-of-day updates.
    """

    id: int
    age_group: AgeGroup
    sex: str
    chronotype: Chronotype
    avg_mood: int
    base_overall_accuracy: float
    base_label_accuracy: dict[int, float]
    history: dict[int, tuple[int, int]] = field(default_factory=dict)

    def label_estimate(self, label: int) -> float:
        correct, total = self.history[label]
        return correct / total

    def overall_estimate(self) -> float:
        correct = sum(c for c, _ in self.history.values())
        total = sum(t for _, t in self.history.values())
        return correct / total

    @property
    def labels(self) -> list[int]:
        return sorted(self.base_label_accuracy)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "age_group": self.age_group.value,
            "sex": self.sex,
            "chronotype": self.chronotype.value,
            "avg_mood": self.avg_mood,
            "base_overall_accuracy": self.base_overall_accuracy,
            "base_label_accuracy": {str(k): v for k, v in self.base_label_accuracy.items()},
            "history": {str(k): list(v) for k, v in self.history.items()},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Annotator":
        return cls(
            id=int(doc["id"]),
            age_group=AgeGroup(doc["age_group"]),
            sex=str(doc["sex"]),
            chronotype=Chronotype(doc["chronotype"]),
            avg_mood=int(doc["avg_mood"]),
            base_overall_accuracy=float(doc["base_overall_accuracy"]),
            base_label_accuracy={int(k): float(v) for k, v in doc["base_label_accuracy"].items()},
            history={int(k): (int(v[0]), int(v[1])) for k, v in doc["history"].items()},
        )


@dataclass(frozen=True)
class BatchConfig:
    """Everything needed to generate one batch of annotators."""

    batch_id: str
    n_labels: int
    rng_seed: int
    n_annotators: int = 30
    age_group_probs: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)
    sex_probs: tuple[float, float] = (0.5, 0.5)

    def __post_init__(self):
        if self.n_labels < 2:
            raise ValueError("n_labels must be at least 2")
        if abs(sum(self.age_group_probs) - 1.0) > _PROB_TOL:
            raise ValueError("age_group_probs must sum to 1")
        if abs(sum(self.sex_probs) - 1.0) > _PROB_TOL:
            raise ValueError("sex_probs must sum to 1")


def sample_chronotype(age_group: AgeGroup, rng) -> Chronotype:
    """Draw a chronotype from the per-age-group categorical table."""
    probs = CHRONOTYPE_TABLE[age_group]
    return _categorical(rng.random(), CHRONOTYPE_ORDER, [probs[c] for c in CHRONOTYPE_ORDER])


def generate_annotator(annotator_id: int, config: BatchConfig, rng) -> Annotator:
    """Generate a single annotator from one RNG stream.

    Draw order is fixed (age, sex, chronotype, mood, overall accuracy,
    per-label accuracies) so batches reproduce exactly from the seed.
    """
    age_group = _categorical(rng.random(), AGE_GROUP_ORDER, config.age_group_probs)
    sex = _categorical(rng.random(), SEXES, config.sex_probs)
    chronotype = sample_chronotype(age_group, rng)
    avg_mood = int(rng.integers(3, 8))
    base_overall = _clamp01(float(rng.normal(ACCURACY_MEAN, ACCURACY_SD)))
    base_label = {
        label: _clamp01(float(rng.normal(base_overall, LABEL_ACCURACY_SD)))
        for label in range(config.n_labels)
    }
    history = {
        label: (int(round(PSEUDO_HISTORY_SIZE * acc)), PSEUDO_HISTORY_SIZE)
        for label, acc in base_label.items()
    }
    return Annotator(
        id=annotator_id,
        age_group=age_group,
        sex=sex,
        chronotype=chronotype,
        avg_mood=avg_mood,
        base_overall_accuracy=base_overall,
        base_label_accuracy=base_label,
        history=history,
    )


def generate_batch(config: BatchConfig) -> list[Annotator]:
    """Generate ``config.n_annotators`` annotators, ids 0..n-1."""
    if config.n_annotators < 1:
        raise ValueError("n_annotators must be at least 1")
    rng = np.random.default_rng(config.rng_seed)
    return [generate_annotator(i, config, rng) for i in range(config.n_annotators)]


def save_batch(annotators: Sequence[Annotator], path) -> None:
    """Write a batch as a JSON array of annotator records."""
    Path(path).write_text(json.dumps([a.to_dict() for a in annotators], indent=1))


def load_batch(path) -> list[Annotator]:
    docs = json.loads(Path(path).read_text())
    return [Annotator.from_dict(doc) for doc in docs]
