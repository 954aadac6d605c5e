"""Quantile binning for histogram-based tree growth.

Bin edges are actual data values (rank-based quantiles), which makes the
binned representation, and therefore the grown trees, exactly invariant
under strictly increasing transforms of a feature. Missing values get a
dedicated bin with id ``n_edges`` per feature.
"""

from __future__ import annotations

import numpy as np


def compute_bin_edges(column: np.ndarray, max_bins: int) -> np.ndarray:
    """Upper-inclusive bin boundaries drawn from the column's own values."""
    values = column[~np.isnan(column)]
    if values.size == 0:
        return np.empty(0, dtype=np.float64)
    qs = np.arange(1, max_bins + 1) / max_bins
    edges = np.quantile(values, qs, method="lower")
    return np.unique(edges)


def bin_column(column: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Map raw values to bin ids; bin b holds edges[b-1] < x <= edges[b]."""
    n_edges = len(edges)
    binned = np.searchsorted(edges, column, side="left").astype(np.uint16)
    binned[binned >= n_edges] = max(n_edges - 1, 0)  # values above the train max
    binned[np.isnan(column)] = n_edges  # dedicated missing bin
    return binned


def bin_matrix(X: np.ndarray, max_bins: int) -> tuple[np.ndarray, list[np.ndarray]]:
    """Bin every feature column; returns (binned uint16 matrix, per-feature edges)."""
    n, f = X.shape
    binned = np.empty((n, f), dtype=np.uint16)
    all_edges = []
    for j in range(f):
        edges = compute_bin_edges(X[:, j], max_bins)
        all_edges.append(edges)
        binned[:, j] = bin_column(X[:, j], edges)
    return binned, all_edges
