"""Leaf-wise regression tree growth on binned features.

Split gain follows the second-order formula
``G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - G_P^2/(H_P+lambda)``; the leaf
with the best candidate gain is split first (priority queue). Ties in split
gain break toward the lower feature index, then the lower bin index, with
the missing-goes-left direction preferred; equal-gain leaves split in
creation order. All reductions run over rows pre-sorted by gradient, which
makes histogram sums independent of training row order.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

_EPS = 1e-12


@dataclass
class Tree:
    """Flat array representation of one grown tree."""

    feature: np.ndarray       # int32, -1 for leaves
    split_bin: np.ndarray     # int32 bin-index threshold (training routing)
    threshold: np.ndarray     # float64 raw-value threshold (prediction routing)
    missing_left: np.ndarray  # bool
    left: np.ndarray          # int32 child ids, -1 for leaves
    right: np.ndarray
    value: np.ndarray         # float64 leaf values (already shrunk)
    is_leaf: np.ndarray       # bool

    @property
    def n_leaves(self) -> int:
        return int(self.is_leaf.sum())

    @property
    def n_splits(self) -> int:
        return int((~self.is_leaf).sum())

    def apply_binned(self, binned: np.ndarray, n_real_bins: np.ndarray) -> np.ndarray:
        """Leaf values for rows in binned representation (training path)."""
        n = binned.shape[0]
        node = np.zeros(n, dtype=np.int32)
        out = np.zeros(n, dtype=np.float64)
        active = np.arange(n)
        while active.size:
            nd = node[active]
            leaf_mask = self.is_leaf[nd]
            out[active[leaf_mask]] = self.value[nd[leaf_mask]]
            active = active[~leaf_mask]
            if not active.size:
                break
            nd = node[active]
            feats = self.feature[nd]
            bins = binned[active, feats].astype(np.int64)
            missing = bins == n_real_bins[feats]
            go_left = np.where(missing, self.missing_left[nd], bins <= self.split_bin[nd])
            node[active] = np.where(go_left, self.left[nd], self.right[nd])
        return out

    def apply_raw(self, X: np.ndarray) -> np.ndarray:
        """Leaf values for raw feature rows (prediction path)."""
        n = X.shape[0]
        node = np.zeros(n, dtype=np.int32)
        out = np.zeros(n, dtype=np.float64)
        active = np.arange(n)
        while active.size:
            nd = node[active]
            leaf_mask = self.is_leaf[nd]
            out[active[leaf_mask]] = self.value[nd[leaf_mask]]
            active = active[~leaf_mask]
            if not active.size:
                break
            nd = node[active]
            x = X[active, self.feature[nd]]
            missing = np.isnan(x)
            with np.errstate(invalid="ignore"):
                go_left = np.where(missing, self.missing_left[nd], x <= self.threshold[nd])
            node[active] = np.where(go_left, self.left[nd], self.right[nd])
        return out


@dataclass
class _Candidate:
    gain: float
    feature: int
    bin_t: int
    missing_left: bool


@dataclass
class _Node:
    node_id: int
    rows: np.ndarray
    g_sum: float
    h_sum: float
    hist_g: np.ndarray  # (F, W)
    hist_h: np.ndarray
    hist_c: np.ndarray
    best: _Candidate | None = None


@dataclass
class GrowthResult:
    tree: Tree
    feature_gains: np.ndarray


class TreeGrower:
    """Grows one tree leaf-wise from binned data."""

    def __init__(
        self,
        binned: np.ndarray,
        n_real_bins: np.ndarray,
        max_leaves: int,
        min_samples_leaf: int,
        l2_reg: float,
        learning_rate: float,
        allowed_features: np.ndarray,
    ):
        self.binned = binned
        self.n_real_bins = n_real_bins.astype(np.int64)
        self.width = int(self.n_real_bins.max()) + 1 if len(n_real_bins) else 1
        self.max_leaves = max_leaves
        self.min_samples_leaf = min_samples_leaf
        self.l2 = l2_reg
        self.lr = learning_rate
        self.allowed = np.sort(allowed_features)

    def _score(self, g: float, h: float) -> float:
        return g * g / max(h + self.l2, _EPS)

    def _build_hist(self, rows: np.ndarray, g: np.ndarray, h: np.ndarray):
        # One flat bincount per statistic over (row, feature) pairs; row-major
        # raveling keeps within-bin accumulation in canonical row order.
        F = self.binned.shape[1]
        k = len(self.allowed)
        sub_bins = self.binned[rows][:, self.allowed].astype(np.int64)
        flat = (sub_bins + self.allowed * self.width).ravel()
        size = F * self.width
        wg = np.repeat(g[rows], k)
        wh = np.repeat(h[rows], k)
        hg = np.bincount(flat, weights=wg, minlength=size).reshape(F, self.width)
        hh = np.bincount(flat, weights=wh, minlength=size).reshape(F, self.width)
        hc = np.bincount(flat, minlength=size).reshape(F, self.width).astype(np.int64)
        return hg, hh, hc

    def _best_split(self, node: _Node) -> _Candidate | None:
        parent_score = self._score(node.g_sum, node.h_sum)
        best: _Candidate | None = None
        for f in self.allowed:
            B = int(self.n_real_bins[f])
            if B < 2:
                continue
            hg, hh, hc = node.hist_g[f], node.hist_h[f], node.hist_c[f]
            gm, hm, cm = float(hg[B]), float(hh[B]), int(hc[B])
            gl0 = np.cumsum(hg[:B])[:-1]
            hl0 = np.cumsum(hh[:B])[:-1]
            cl0 = np.cumsum(hc[:B])[:-1]
            g_tot = float(np.sum(hg[:B]))
            h_tot = float(np.sum(hh[:B]))
            c_tot = int(np.sum(hc[:B]))
            gr0 = g_tot - gl0
            hr0 = h_tot - hl0
            cr0 = c_tot - cl0

            # column 0: missing goes left, column 1: missing goes right
            gains = np.full((B - 1, 2), -np.inf)
            for d, (gl, hl, cl, gr, hr, cr) in enumerate((
                (gl0 + gm, hl0 + hm, cl0 + cm, gr0, hr0, cr0),
                (gl0, hl0, cl0, gr0 + gm, hr0 + hm, cr0 + cm),
            )):
                valid = (cl >= self.min_samples_leaf) & (cr >= self.min_samples_leaf)
                score = gl * gl / np.maximum(hl + self.l2, _EPS) \
                    + gr * gr / np.maximum(hr + self.l2, _EPS) - parent_score
                gains[:, d] = np.where(valid, score, -np.inf)
            flat = gains.ravel()  # bin-major, direction-minor: ties prefer lower bin, then left
            idx = int(np.argmax(flat))
            gain = float(flat[idx])
            if gain <= 0.0 or not np.isfinite(gain):
                continue
            if best is None or gain > best.gain:
                best = _Candidate(
                    gain=gain, feature=int(f), bin_t=idx // 2, missing_left=(idx % 2 == 0)
                )
        return best

    def _leaf_value(self, node: _Node) -> float:
        return -self.lr * node.g_sum / max(node.h_sum + self.l2, _EPS)

    def grow(self, g: np.ndarray, h: np.ndarray, rows: np.ndarray) -> GrowthResult:
        # Canonical row order: sorting by gradient makes every histogram and
        # leaf-sum reduction independent of the caller's row ordering (equal
        # gradients imply equal hessians for logloss).
        order = np.argsort(g[rows], kind="stable")
        rows = rows[order]

        feature_gains = np.zeros(self.binned.shape[1], dtype=np.float64)
        feats: list[int] = []
        split_bins: list[int] = []
        miss_left: list[bool] = []
        lefts: list[int] = []
        rights: list[int] = []
        values: list[float] = []
        leaf_flags: list[bool] = []

        def new_node_slot() -> int:
            feats.append(-1)
            split_bins.append(-1)
            miss_left.append(True)
            lefts.append(-1)
            rights.append(-1)
            values.append(0.0)
            leaf_flags.append(True)
            return len(feats) - 1

        hg, hh, hc = self._build_hist(rows, g, h)
        root = _Node(
            node_id=new_node_slot(), rows=rows,
            g_sum=float(np.sum(g[rows])), h_sum=float(np.sum(h[rows])),
            hist_g=hg, hist_h=hh, hist_c=hc,
        )
        values[root.node_id] = self._leaf_value(root)
        root.best = self._best_split(root)

        heap: list[tuple[float, int]] = []
        nodes_by_id = {root.node_id: root}
        if root.best is not None:
            heapq.heappush(heap, (-root.best.gain, root.node_id))

        n_leaves = 1
        while n_leaves < self.max_leaves and heap:
            _, node_id = heapq.heappop(heap)
            node = nodes_by_id.pop(node_id)
            cand = node.best
            assert cand is not None
            f, t = cand.feature, cand.bin_t
            bins = self.binned[node.rows, f].astype(np.int64)
            missing = bins == self.n_real_bins[f]
            go_left = np.where(missing, cand.missing_left, bins <= t)
            left_rows = node.rows[go_left]
            right_rows = node.rows[~go_left]

            feats[node_id] = f
            split_bins[node_id] = t
            miss_left[node_id] = cand.missing_left
            leaf_flags[node_id] = False
            feature_gains[f] += cand.gain

            if len(left_rows) <= len(right_rows):
                small_rows, small_is_left = left_rows, True
            else:
                small_rows, small_is_left = right_rows, False
            hg_s, hh_s, hc_s = self._build_hist(small_rows, g, h)
            hg_l, hh_l, hc_l = node.hist_g - hg_s, node.hist_h - hh_s, node.hist_c - hc_s
            if small_is_left:
                left_h, right_h = (hg_s, hh_s, hc_s), (hg_l, hh_l, hc_l)
            else:
                left_h, right_h = (hg_l, hh_l, hc_l), (hg_s, hh_s, hc_s)

            children = []
            for child_rows, (chg, chh, chc) in ((left_rows, left_h), (right_rows, right_h)):
                child = _Node(
                    node_id=new_node_slot(), rows=child_rows,
                    g_sum=float(np.sum(g[child_rows])), h_sum=float(np.sum(h[child_rows])),
                    hist_g=chg, hist_h=chh, hist_c=chc,
                )
                values[child.node_id] = self._leaf_value(child)
                children.append(child)
            lefts[node_id] = children[0].node_id
            rights[node_id] = children[1].node_id
            n_leaves += 1

            if n_leaves < self.max_leaves:
                for child in children:
                    if len(child.rows) >= 2 * self.min_samples_leaf:
                        child.best = self._best_split(child)
                        if child.best is not None:
                            nodes_by_id[child.node_id] = child
                            heapq.heappush(heap, (-child.best.gain, child.node_id))

        tree = Tree(
            feature=np.asarray(feats, dtype=np.int32),
            split_bin=np.asarray(split_bins, dtype=np.int32),
            threshold=np.zeros(len(feats), dtype=np.float64),
            missing_left=np.asarray(miss_left, dtype=bool),
            left=np.asarray(lefts, dtype=np.int32),
            right=np.asarray(rights, dtype=np.int32),
            value=np.asarray(values, dtype=np.float64),
            is_leaf=np.asarray(leaf_flags, dtype=bool),
        )
        return GrowthResult(tree=tree, feature_gains=feature_gains)
