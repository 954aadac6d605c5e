"""Gradient-boosted decision trees for binary logloss, estimator-style API.

``GbdtClassifier`` follows the fit/predict_proba/get_params convention so it
drops into pipelines and grid loops; ``GbdtParams`` is the serializable bag
of the same hyperparameters used for grids and study configs.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ..errors import SchemaError
from .binning import bin_matrix
from .tree import Tree, TreeGrower

MODEL_FORMAT = "fundlift-gbdt"
MODEL_VERSION = 1

_PROB_CLIP = 1e-12


def _sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _logloss(y: np.ndarray, p: np.ndarray) -> float:
    p = np.clip(p, _PROB_CLIP, 1 - _PROB_CLIP)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))


def _f1_at(y: np.ndarray, pred: np.ndarray) -> float:
    tp = float(np.sum((pred == 1) & (y == 1)))
    fp = float(np.sum((pred == 1) & (y == 0)))
    fn = float(np.sum((pred == 0) & (y == 1)))
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom > 0 else 0.0


@dataclass(frozen=True)
class GbdtParams:
    """Hyperparameters; defaults follow the documented tuning grid's center."""

    num_rounds: int = 200
    learning_rate: float = 0.1
    max_leaves: int = 31
    min_samples_leaf: int = 20
    max_bins: int = 255
    feature_fraction: float = 1.0
    bagging_fraction: float = 1.0
    l2_reg: float = 1.0
    early_stopping_rounds: int = 25
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_rounds < 1:
            raise ValueError("num_rounds must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.max_leaves < 2:
            raise ValueError("max_leaves must be >= 2")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if not 0 < self.feature_fraction <= 1:
            raise ValueError("feature_fraction must be in (0, 1]")
        if not 0 < self.bagging_fraction <= 1:
            raise ValueError("bagging_fraction must be in (0, 1]")
        if self.l2_reg < 0:
            raise ValueError("l2_reg must be >= 0")

    def as_dict(self) -> dict:
        return asdict(self)


def default_grid() -> list[GbdtParams]:
    """The documented default hyperparameter grid."""
    grid = []
    for max_leaves in (15, 31, 63):
        for lr in (0.05, 0.1):
            for msl in (10, 20):
                grid.append(GbdtParams(
                    num_rounds=500, learning_rate=lr, max_leaves=max_leaves,
                    min_samples_leaf=msl, early_stopping_rounds=25,
                ))
    return grid


def _check_matrix(X, n_features: int | None = None) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D feature matrix, got ndim={X.ndim}")
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(f"row width {X.shape[1]} does not match model's {n_features} features")
    return X


def _check_labels(y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64).ravel()
    bad = set(np.unique(y)) - {0.0, 1.0}
    if bad:
        raise ValueError(f"labels outside {{0, 1}}: {sorted(bad)}")
    return y


class GbdtClassifier:
    """Histogram-based, leaf-wise boosted trees for a binary outcome.

    Training is deterministic given (data, params, seed); validation F1 with
    patience ``early_stopping_rounds`` picks the kept number of rounds when
    an eval set is supplied.
    """

    def __init__(
        self,
        num_rounds: int = 200,
        learning_rate: float = 0.1,
        max_leaves: int = 31,
        min_samples_leaf: int = 20,
        max_bins: int = 255,
        feature_fraction: float = 1.0,
        bagging_fraction: float = 1.0,
        l2_reg: float = 1.0,
        early_stopping_rounds: int = 25,
        seed: int = 0,
    ):
        self.num_rounds = num_rounds
        self.learning_rate = learning_rate
        self.max_leaves = max_leaves
        self.min_samples_leaf = min_samples_leaf
        self.max_bins = max_bins
        self.feature_fraction = feature_fraction
        self.bagging_fraction = bagging_fraction
        self.l2_reg = l2_reg
        self.early_stopping_rounds = early_stopping_rounds
        self.seed = seed

    # -- estimator plumbing -------------------------------------------------

    _PARAM_NAMES = (
        "num_rounds", "learning_rate", "max_leaves", "min_samples_leaf",
        "max_bins", "feature_fraction", "bagging_fraction", "l2_reg",
        "early_stopping_rounds", "seed",
    )

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._PARAM_NAMES}

    def set_params(self, **params) -> "GbdtClassifier":
        for k, v in params.items():
            if k not in self._PARAM_NAMES:
                raise ValueError(f"unknown parameter {k!r}")
            setattr(self, k, v)
        return self

    @property
    def params(self) -> GbdtParams:
        return GbdtParams(**self.get_params())

    # -- training ------------------------------------------------------------

    def fit(self, X, y, eval_set=None, feature_names=None) -> "GbdtClassifier":
        GbdtParams(**self.get_params())  # validate
        X = _check_matrix(X)
        y = _check_labels(y)
        if len(X) == 0:
            raise ValueError("training set is empty")
        if len(X) != len(y):
            raise ValueError("X and y lengths differ")
        n, F = X.shape
        self.n_features_ = F
        self.feature_names_ = tuple(feature_names) if feature_names is not None \
            else tuple(f"f{j}" for j in range(F))
        if len(self.feature_names_) != F:
            raise ValueError("feature_names length does not match X width")

        prior = float(np.clip(np.mean(y), _PROB_CLIP, 1 - _PROB_CLIP))
        self.base_score_ = float(np.log(prior / (1 - prior)))

        self.trees_: list[Tree] = []
        self.train_logloss_: list[float] = []
        self.val_f1_history_: list[float] = []
        self.best_iteration_: int | None = None

        if len(np.unique(y)) < 2:
            warnings.warn("labels are all one class; model is the base score only", stacklevel=2)
            binned, edges = bin_matrix(X, self.max_bins)
            self.bin_edges_ = edges
            self.feature_gains_ = np.zeros(F)
            return self

        binned, edges = bin_matrix(X, self.max_bins)
        self.bin_edges_ = edges
        n_real_bins = np.asarray([len(e) for e in edges], dtype=np.int64)

        val = None
        if eval_set is not None:
            Xv = _check_matrix(eval_set[0], F)
            yv = _check_labels(eval_set[1])
            binned_val = np.empty((len(Xv), F), dtype=np.uint16)
            from .binning import bin_column
            for j in range(F):
                binned_val[:, j] = bin_column(Xv[:, j], edges[j])
            val = (binned_val, yv)

        rng = np.random.default_rng(self.seed)
        scores = np.full(n, self.base_score_)
        val_scores = np.full(len(val[1]), self.base_score_) if val else None
        per_tree_gains: list[np.ndarray] = []
        best_f1, best_round = -1.0, -1

        for round_idx in range(self.num_rounds):
            p = _sigmoid(scores)
            g = p - y
            h = p * (1 - p)

            if self.feature_fraction < 1.0:
                k = max(1, int(round(self.feature_fraction * F)))
                allowed = np.sort(rng.choice(F, size=k, replace=False))
            else:
                allowed = np.arange(F)
            if self.bagging_fraction < 1.0:
                k = max(1, int(round(self.bagging_fraction * n)))
                rows = np.sort(rng.choice(n, size=k, replace=False))
            else:
                rows = np.arange(n)

            grower = TreeGrower(
                binned, n_real_bins, self.max_leaves, self.min_samples_leaf,
                self.l2_reg, self.learning_rate, allowed,
            )
            result = grower.grow(g, h, rows)
            tree = result.tree
            if tree.n_splits == 0:
                break  # no positive-gain split anywhere; boosting is done
            split_mask = ~tree.is_leaf
            tree.threshold[split_mask] = np.asarray([
                self.bin_edges_[f][t]
                for f, t in zip(tree.feature[split_mask], tree.split_bin[split_mask])
            ])
            self.trees_.append(tree)
            per_tree_gains.append(result.feature_gains)

            scores += tree.apply_binned(binned, n_real_bins)
            self.train_logloss_.append(_logloss(y, _sigmoid(scores)))

            if val is not None:
                val_scores += tree.apply_binned(val[0], n_real_bins)
                f1 = _f1_at(val[1], (_sigmoid(val_scores) >= 0.5).astype(np.int64))
                self.val_f1_history_.append(f1)
                if f1 > best_f1:
                    best_f1, best_round = f1, round_idx
                elif (
                    self.early_stopping_rounds > 0
                    and round_idx - best_round >= self.early_stopping_rounds
                ):
                    break

        if val is not None and best_round >= 0:
            self.best_iteration_ = best_round
            self.trees_ = self.trees_[: best_round + 1]
            per_tree_gains = per_tree_gains[: best_round + 1]
        else:
            self.best_iteration_ = len(self.trees_) - 1 if self.trees_ else None

        self.feature_gains_ = (
            np.sum(per_tree_gains, axis=0) if per_tree_gains else np.zeros(F)
        )
        return self

    # -- inference -----------------------------------------------------------

    def decision_scores(self, X) -> np.ndarray:
        if not hasattr(self, "base_score_"):
            raise ValueError("model is not fitted")
        X = _check_matrix(X, self.n_features_)
        scores = np.full(len(X), self.base_score_)
        for tree in self.trees_:
            scores += tree.apply_raw(X)
        return scores

    def predict_proba(self, X) -> np.ndarray:
        """Probability of the positive (funded) class per row, in (0, 1)."""
        p = _sigmoid(self.decision_scores(X))
        return np.clip(p, _PROB_CLIP, 1 - _PROB_CLIP)

    def predict(self, X, threshold: float = 0.5) -> np.ndarray:
        if not 0 < threshold < 1:
            raise ValueError("threshold must be in (0, 1)")
        return (self.predict_proba(X) >= threshold).astype(np.int64)

    # -- persistence -----------------------------------------------------------

    def save(self, path: str | Path) -> None:
        doc = {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "params": self.get_params(),
            "base_score": self.base_score_,
            "feature_names": list(self.feature_names_),
            "bin_edges": [e.tolist() for e in self.bin_edges_],
            "feature_gains": self.feature_gains_.tolist(),
            "best_iteration": self.best_iteration_,
            "trees": [
                {
                    "feature": t.feature.tolist(),
                    "split_bin": t.split_bin.tolist(),
                    "threshold": t.threshold.tolist(),
                    "missing_left": t.missing_left.astype(int).tolist(),
                    "left": t.left.tolist(),
                    "right": t.right.tolist(),
                    "value": t.value.tolist(),
                    "is_leaf": t.is_leaf.astype(int).tolist(),
                }
                for t in self.trees_
            ],
        }
        Path(path).write_text(json.dumps(doc, sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "GbdtClassifier":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise SchemaError(f"corrupt model file {path}: {e}") from e
        if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
            raise SchemaError(f"{path} is not a {MODEL_FORMAT} model file")
        if doc.get("version", 0) > MODEL_VERSION:
            raise SchemaError(
                f"model file version {doc.get('version')} is newer than supported {MODEL_VERSION}"
            )
        try:
            model = cls(**doc["params"])
            model.base_score_ = float(doc["base_score"])
            model.feature_names_ = tuple(doc["feature_names"])
            model.n_features_ = len(model.feature_names_)
            model.bin_edges_ = [np.asarray(e, dtype=np.float64) for e in doc["bin_edges"]]
            model.feature_gains_ = np.asarray(doc["feature_gains"], dtype=np.float64)
            model.best_iteration_ = doc.get("best_iteration")
            model.trees_ = [
                Tree(
                    feature=np.asarray(t["feature"], dtype=np.int32),
                    split_bin=np.asarray(t["split_bin"], dtype=np.int32),
                    threshold=np.asarray(t["threshold"], dtype=np.float64),
                    missing_left=np.asarray(t["missing_left"], dtype=bool),
                    left=np.asarray(t["left"], dtype=np.int32),
                    right=np.asarray(t["right"], dtype=np.int32),
                    value=np.asarray(t["value"], dtype=np.float64),
                    is_leaf=np.asarray(t["is_leaf"], dtype=bool),
                )
                for t in doc["trees"]
            ]
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"corrupt model file {path}: {e}") from e
        return model


def gain_importance(model: GbdtClassifier) -> dict[str, float]:
    """Per-feature share of total split gain; requires at least one split."""
    total = float(model.feature_gains_.sum())
    if total <= 0:
        raise ValueError("model has no splits; gain importance undefined")
    return {
        name: float(gain) / total
        for name, gain in zip(model.feature_names_, model.feature_gains_)
    }


def group_importance(
    importances: dict[str, float], groups: dict[str, str]
) -> dict[str, float]:
    """Aggregate feature importance shares by group tag."""
    untagged = [f for f in importances if f not in groups]
    if untagged:
        raise ValueError(f"untagged features: {untagged[:5]}")
    out: dict[str, float] = {}
    for feat, share in importances.items():
        out[groups[feat]] = out.get(groups[feat], 0.0) + share
    return out
