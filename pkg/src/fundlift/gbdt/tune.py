"""Grid search ranked by validation F1."""

from __future__ import annotations

from dataclasses import dataclass

from .metrics import evaluate
from .model import GbdtClassifier, GbdtParams


@dataclass(frozen=True)
class LeaderboardRow:
    index: int
    params: GbdtParams
    val_f1: float
    rounds_used: int


def tune(
    grid: list[GbdtParams], X_train, y_train, X_val, y_val, feature_names=None
) -> tuple[GbdtParams, list[LeaderboardRow]]:
    """Train each grid candidate, rank by validation F1.

    Ties break toward fewer boosting rounds actually used, then the lower
    grid index; both the winner and the full leaderboard are returned.
    """
    if not grid:
        raise ValueError("empty hyperparameter grid")
    rows = []
    for idx, params in enumerate(grid):
        model = GbdtClassifier(**params.as_dict()).fit(
            X_train, y_train, eval_set=(X_val, y_val), feature_names=feature_names
        )
        f1 = evaluate(model, X_val, y_val).f1 if model.trees_ else 0.0
        rows.append(LeaderboardRow(
            index=idx, params=params, val_f1=f1, rounds_used=len(model.trees_),
        ))
    ranked = sorted(rows, key=lambda r: (-r.val_f1, r.rounds_used, r.index))
    return ranked[0].params, ranked
