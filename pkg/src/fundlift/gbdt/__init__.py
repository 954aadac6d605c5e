from .binning import bin_column, bin_matrix, compute_bin_edges
from .metrics import (
    BernoulliBaseline,
    EvalMetrics,
    UniformBaseline,
    baseline_bernoulli,
    baseline_uniform,
    evaluate,
    evaluate_predictions,
)
from .model import (
    GbdtClassifier,
    GbdtParams,
    default_grid,
    gain_importance,
    group_importance,
)
from .tree import Tree, TreeGrower
from .tune import LeaderboardRow, tune

__all__ = [
    "bin_column",
    "bin_matrix",
    "compute_bin_edges",
    "BernoulliBaseline",
    "EvalMetrics",
    "UniformBaseline",
    "baseline_bernoulli",
    "baseline_uniform",
    "evaluate",
    "evaluate_predictions",
    "GbdtClassifier",
    "GbdtParams",
    "default_grid",
    "gain_importance",
    "group_importance",
    "Tree",
    "TreeGrower",
    "LeaderboardRow",
    "tune",
]
