from __future__ import annotations

import numpy as np
import pytest

from annotsim.behavior import SimParams
from annotsim.learner import Dataset
from annotsim.population import AgeGroup, Annotator, Chronotype
from annotsim.selector import AnnotatorView


class ScriptedRNG:
    """Feeds predetermined values to code that expects a numpy Generator."""

    def __init__(self, randoms=(), integers=(), normals=()):
        self._randoms = list(randoms)
        self._integers = list(integers)
        self._normals = list(normals)

    def random(self):
        return self._randoms.pop(0)

    def integers(self, low, high=None):
        return self._integers.pop(0)

    def normal(self, loc=0.0, scale=1.0):
        return self._normals.pop(0)


def make_annotator(
    annotator_id=0,
    chronotype=Chronotype.BEAR,
    avg_mood=5,
    label_accuracies=None,
    age_group=AgeGroup.G38_45,
    sex="F",
):
    label_accuracies = label_accuracies or {0: 0.8, 1: 0.8}
    history = {l: (int(round(100 * a)), 100) for l, a in label_accuracies.items()}
    overall = sum(label_accuracies.values()) / len(label_accuracies)
    return Annotator(
        id=annotator_id,
        age_group=age_group,
        sex=sex,
        chronotype=chronotype,
        avg_mood=avg_mood,
        base_overall_accuracy=overall,
        base_label_accuracy=dict(label_accuracies),
        history=history,
    )


def make_view(
    annotator_id=0,
    label_estimates=None,
    overall=0.8,
    mood=5,
    avg_mood=5,
    fatigue_count=0,
):
    return AnnotatorView(
        annotator_id=annotator_id,
        label_estimates=label_estimates or {0: 0.8, 1: 0.8},
        overall_estimate=overall,
        current_mood=mood,
        avg_mood=avg_mood,
        fatigue_count=fatigue_count,
    )


def separable_dataset(n=200, n_classes=2, seed=0, spread=4.0):
    """Well-separated Gaussian blobs, one per class."""
    rng = np.random.default_rng(seed)
    per = n // n_classes
    rows, labels = [], []
    for c in range(n_classes):
        center = np.array([spread * c, -spread * c])
        rows.append(center + rng.normal(scale=0.5, size=(per, 2)))
        labels.extend([c] * per)
    return Dataset(
        features=np.vstack(rows),
        labels=np.array(labels, dtype=np.int64),
        n_classes=n_classes,
        label_names=[str(c) for c in range(n_classes)],
        feature_names=["x", "y"],
    )


def random_case(rng, max_annotators=8):
    """A random (query context, views, params, stats) selector scenario."""
    from annotsim.learner import QueryContext
    from annotsim.selector import UncertaintyStats, update_uncertainty_stats

    c = int(rng.integers(2, 8))
    probs = rng.dirichlet(np.ones(c))
    ctx = QueryContext.from_probs(0, probs)
    n = int(rng.integers(1, max_annotators + 1))
    views = [
        make_view(
            annotator_id=i,
            label_estimates={l: float(rng.uniform(0.2, 1.0)) for l in range(c)},
            overall=float(rng.uniform(0.2, 1.0)),
            mood=int(rng.integers(1, 11)),
            avg_mood=int(rng.integers(3, 8)),
            fatigue_count=int(rng.integers(0, 300)),
        )
        for i in range(n)
    ]
    params = SimParams(fatigue_penalty=float(rng.choice([0.02, 0.04])))
    stats = UncertaintyStats()
    if rng.random() < 0.5:
        for _ in range(int(rng.integers(10, 40))):
            stats = update_uncertainty_stats(stats, float(rng.uniform(0.0, np.log2(c))))
    return ctx, views, params, stats


@pytest.fixture
def params():
    return SimParams()


@pytest.fixture
def params4():
    return SimParams(fatigue_penalty=0.04)


@pytest.fixture(scope="session")
def wine_csv(tmp_path_factory):
    from annotsim.synthdata import write_wine_like_csv

    return write_wine_like_csv(tmp_path_factory.mktemp("data") / "wine.csv", n_rows=900)


@pytest.fixture(scope="session")
def breast_cancer_csv(tmp_path_factory):
    from annotsim.synthdata import write_breast_cancer_csv

    return write_breast_cancer_csv(tmp_path_factory.mktemp("data") / "breast_cancer.csv")
