"""Confusion-matrix metrics and the two reference baselines."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import GbdtClassifier, _check_labels


@dataclass(frozen=True)
class EvalMetrics:
    precision: float
    recall: float
    f1: float
    accuracy: float

    def as_row(self) -> dict[str, float]:
        return {
            "precision": self.precision, "recall": self.recall,
            "f1": self.f1, "accuracy": self.accuracy,
        }


def evaluate_predictions(y_true, y_pred) -> EvalMetrics:
    """Standard metrics with positive = funded."""
    y = _check_labels(y_true)
    pred = np.asarray(y_pred, dtype=np.float64).ravel()
    if len(y) == 0:
        raise ValueError("cannot evaluate on an empty set")
    if len(y) != len(pred):
        raise ValueError("prediction length mismatch")
    tp = float(np.sum((pred == 1) & (y == 1)))
    fp = float(np.sum((pred == 1) & (y == 0)))
    fn = float(np.sum((pred == 0) & (y == 1)))
    tn = float(np.sum((pred == 0) & (y == 0)))
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    accuracy = (tp + tn) / len(y)
    return EvalMetrics(precision=precision, recall=recall, f1=f1, accuracy=accuracy)


def evaluate(model: GbdtClassifier, X, y, threshold: float = 0.5) -> EvalMetrics:
    if not 0 < threshold < 1:
        raise ValueError("threshold must be in (0, 1)")
    return evaluate_predictions(y, model.predict(X, threshold=threshold))


class UniformBaseline:
    """Majority-vote predictor (uniform baseline)."""

    def __init__(self, majority: int):
        self.majority = majority

    def predict(self, X) -> np.ndarray:
        n = len(X)
        return np.full(n, self.majority, dtype=np.int64)


class BernoulliBaseline:
    """Seeded random predictor with the training funded rate as p."""

    def __init__(self, p: float, seed: int):
        self.p = p
        self.seed = seed

    def predict(self, X) -> np.ndarray:
        n = len(X)
        rng = np.random.default_rng(self.seed)
        return (rng.random(n) < self.p).astype(np.int64)


def baseline_uniform(labels_train) -> UniformBaseline:
    y = _check_labels(labels_train)
    if len(y) == 0:
        raise ValueError("empty training labels")
    return UniformBaseline(majority=int(np.mean(y) >= 0.5))


def baseline_bernoulli(labels_train, seed: int) -> BernoulliBaseline:
    y = _check_labels(labels_train)
    if len(y) == 0:
        raise ValueError("empty training labels")
    return BernoulliBaseline(p=float(np.mean(y)), seed=seed)
