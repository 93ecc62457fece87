"""Pool-based active learner.

Uncertainty measures, query-type extraction, a bagged-tree probabilistic
classifier, entropy-based query selection, and model evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.tree import DecisionTreeClassifier, ExtraTreeClassifier

PROB_TOL = 1e-9


@dataclass
class Dataset:
    """Fully ingested dataset: dense numeric features and integer labels."""

    features: np.ndarray  # (N, D) float64
    labels: np.ndarray  # (N,) int64, values in [0, n_classes)
    n_classes: int
    label_names: list[str] = field(default_factory=list)
    feature_names: list[str] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.features) < 1:
            raise ValueError("dataset must have at least one row")
        if np.isnan(self.features).any():
            raise ValueError("dataset features contain missing values")
        if self.n_classes < 2:
            raise ValueError("dataset must have at least two classes")
        if self.labels.min() < 0 or self.labels.max() >= self.n_classes:
            raise ValueError("labels out of range")

    def __len__(self) -> int:
        return len(self.labels)


def validate_prob_vector(p: np.ndarray, tol: float = PROB_TOL) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or len(p) < 1:
        raise ValueError("probability vector must be 1-d and non-empty")
    if (p < -tol).any() or (p > 1 + tol).any() or abs(p.sum() - 1.0) > tol:
        raise ValueError("not a probability vector")
    return p


def least_confidence(p) -> float:
    """1 minus the top predicted probability."""
    return 1.0 - float(np.max(p))


def margin_confidence(p) -> float:
    """Gap between the two highest predicted probabilities."""
    top2 = np.sort(np.asarray(p, dtype=float))[::-1][:2]
    return float(top2[0] - top2[1])


def ratio_confidence(p) -> float:
    """Ratio of the two highest probabilities; +inf when the runner-up is 0."""
    top2 = np.sort(np.asarray(p, dtype=float))[::-1][:2]
    if top2[1] == 0.0:
        return math.inf
    return float(top2[0] / top2[1])


def entropy(p) -> float:
    """Shannon entropy in bits, with 0 * log 0 taken as 0."""
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def query_type(p) -> tuple[int, ...]:
    """Labels whose probability exceeds 1/C, ordered by descending probability.

    An exactly uniform vector leaves the strict threshold empty; fall back
    to the argmax (lowest index on ties) so the set is never empty.
    """
    p = np.asarray(p, dtype=float)
    threshold = 1.0 / len(p)
    above = np.flatnonzero(p > threshold)
    if len(above) == 0:
        return (int(np.argmax(p)),)
    order = np.argsort(-p[above], kind="stable")
    return tuple(int(i) for i in above[order])


@dataclass(frozen=True)
class QueryContext:
    """One queried instance: probabilities, entropy, and query-type labels."""

    instance_index: int
    probs: np.ndarray
    uncertainty: float
    query_type_labels: tuple[int, ...]

    @classmethod
    def from_probs(cls, instance_index: int, probs) -> "QueryContext":
        probs = validate_prob_vector(probs)
        return cls(
            instance_index=instance_index,
            probs=probs,
            uncertainty=entropy(probs),
            query_type_labels=query_type(probs),
        )


class ForestModel:
    """Bag of bootstrap-trained, depth-limited, feature-subsampled trees.

    ``split_strategy`` picks exhaustive threshold search ("exhaustive",
    classic random forest) or random thresholds ("random", much faster to
    fit at small sizes). Probabilities are the renormalized mean of
    per-tree leaf class frequencies; classes absent from training keep
    probability 0.
    """

    def __init__(
        self,
        n_classes: int,
        n_trees: int = 50,
        max_depth: int = 12,
        split_strategy: str = "exhaustive",
        seed: int = 0,
    ):
        if n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if split_strategy not in ("exhaustive", "random"):
            raise ValueError("split_strategy must be 'exhaustive' or 'random'")
        self.n_classes = n_classes
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.split_strategy = split_strategy
        self.seed = seed
        self._trees: list | None = None
        self._tree_classes: list[np.ndarray] = []

    @staticmethod
    def _as_float32(X: np.ndarray) -> np.ndarray:
        return np.ascontiguousarray(X, dtype=np.float32)

    def fit(self, X, y) -> "ForestModel":
        X = self._as_float32(np.atleast_2d(X))
        y = np.asarray(y, dtype=np.intp)
        if len(y) == 0:
            raise ValueError("training set must be non-empty")
        boot_ss, seed_ss = np.random.SeedSequence(self.seed).spawn(2)
        rng = np.random.default_rng(boot_ss)
        tree_seeds = seed_ss.generate_state(self.n_trees)
        tree_cls = DecisionTreeClassifier if self.split_strategy == "exhaustive" else ExtraTreeClassifier
        bootstrap = rng.integers(0, len(y), size=(self.n_trees, len(y)))
        self._trees = []
        self._tree_classes = []
        for t in range(self.n_trees):
            tree = tree_cls(
                max_depth=self.max_depth,
                max_features="sqrt",
                random_state=int(tree_seeds[t]),
            )
            idx = bootstrap[t]
            tree.fit(X[idx], y[idx], check_input=False)
            self._trees.append(tree)
            self._tree_classes.append(tree.classes_.astype(int))
        return self

    def predict_proba(self, X) -> np.ndarray:
        """Class probabilities, shape (n, C); a 1-d input yields shape (C,)."""
        if self._trees is None:
            raise RuntimeError("model must be fitted before predicting")
        single = np.ndim(X) == 1
        X = self._as_float32(np.atleast_2d(X))
        agg = np.zeros((len(X), self.n_classes))
        for tree, classes in zip(self._trees, self._tree_classes):
            agg[:, classes] += tree.predict_proba(X, check_input=False)
        agg /= agg.sum(axis=1, keepdims=True)
        return agg[0] if single else agg

    def predict(self, X) -> np.ndarray:
        probs = np.atleast_2d(self.predict_proba(X))
        return probs.argmax(axis=1)


def select_query(model: ForestModel, pool_features, pool_indices) -> QueryContext:
    """Pick the pool instance with maximal prediction entropy.

    ``pool_indices`` must be ascending so entropy ties resolve to the
    lowest instance index.
    """
    pool_indices = np.asarray(pool_indices)
    if len(pool_indices) == 0:
        raise ValueError("pool is empty")
    probs = np.atleast_2d(model.predict_proba(pool_features))
    safe = np.where(probs > 0, probs, 1.0)
    entropies = -(probs * np.log2(safe)).sum(axis=1)
    k = int(np.argmax(entropies))
    return QueryContext.from_probs(int(pool_indices[k]), probs[k])


def evaluate(model: ForestModel, dataset: Dataset) -> tuple[float, float]:
    """Accuracy and unweighted macro F1 over the whole dataset.

    Per-class F1 is 0 whenever precision + recall is 0; classes absent
    from the predictions still count toward the macro average.
    """
    preds = model.predict(dataset.features)
    truth = dataset.labels
    accuracy = float(np.mean(preds == truth))
    f1_sum = 0.0
    for c in range(dataset.n_classes):
        tp = int(np.sum((preds == c) & (truth == c)))
        fp = int(np.sum((preds == c) & (truth != c)))
        fn = int(np.sum((preds != c) & (truth == c)))
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        if precision + recall > 0:
            f1_sum += 2 * precision * recall / (precision + recall)
    return accuracy, f1_sum / dataset.n_classes
