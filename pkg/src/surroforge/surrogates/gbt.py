"""Gradient-boosted regression trees on squared loss, grown level-wise with
an exact greedy split search.

Determinism contract: splits scan features in ascending index order and
accept a new best only on strictly greater gain, so ties resolve to the
lowest feature index; within a feature, the first position attaining the
segment maximum wins, so threshold ties resolve to the lowest observed
value. Thresholds are observed feature values with the rule x <= t.
"""
from dataclasses import dataclass

import numpy as np

from .base import Surrogate, register_family

NO_FEATURE = -1


@dataclass(frozen=True)
class GBTConfig:
    trees: int = 100
    max_depth: int = 6
    learning_rate: float = 0.3
    min_samples_leaf: int = 1

    def __post_init__(self):
        if self.trees < 1 or self.max_depth < 0 or self.min_samples_leaf < 1:
            raise ValueError("trees >= 1, max_depth >= 0, min_samples_leaf >= 1 required")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0, 1]")


class _Tree:
    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=np.int32)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int32)
        self.right = np.asarray(right, dtype=np.int32)
        self.value = np.asarray(value, dtype=np.float64)

    def predict(self, X):
        node = np.zeros(X.shape[0], dtype=np.int32)
        while True:
            internal = self.feature[node] != NO_FEATURE
            if not internal.any():
                break
            idx = np.flatnonzero(internal)
            nd = node[idx]
            go_left = X[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
        return self.value[node]

    def to_lists(self):
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_lists(cls, payload):
        return cls(payload["feature"], payload["threshold"], payload["left"],
                   payload["right"], payload["value"])


def _grow_tree(X, y, max_depth, min_samples_leaf, presort):
    """One level-wise regression tree; returns (tree, train-row values)."""
    n, n_features = X.shape
    feature, threshold, left, right = [NO_FEATURE], [0.0], [-1], [-1]
    node_of_row = np.zeros(n, dtype=np.int32)

    for _ in range(max_depth):
        best_gain, best_feat, best_thr = {}, {}, {}
        for f in range(n_features):
            pre = presort[f]
            # stable integer sort of node ids preserves the value order within
            # each node, giving rows sorted by (node, feature value)
            order = pre[np.argsort(node_of_row[pre], kind="stable")]
            sn = node_of_row[order]
            sv = X[order, f]
            sy = y[order]
            starts = np.flatnonzero(np.r_[True, sn[1:] != sn[:-1]])
            seg_node = sn[starts]
            counts = np.diff(np.r_[starts, n])
            cum = np.cumsum(sy)
            total = cum[starts + counts - 1] - cum[starts] + sy[starts]
            seg_idx = np.repeat(np.arange(starts.size), counts)
            left_cnt = np.arange(n) - starts[seg_idx] + 1
            left_sum = cum - np.repeat(cum[starts] - sy[starts], counts)
            right_cnt = counts[seg_idx] - left_cnt
            valid = np.zeros(n, dtype=bool)
            valid[:-1] = (sn[:-1] == sn[1:]) & (sv[:-1] < sv[1:])
            valid &= (left_cnt >= min_samples_leaf) & (right_cnt >= min_samples_leaf)
            if not valid.any():
                continue
            score = np.full(n, -np.inf)
            sc = left_sum**2 / left_cnt + (total[seg_idx] - left_sum)**2 / np.maximum(right_cnt, 1)
            score[valid] = sc[valid]
            seg_max = np.maximum.reduceat(score, starts)
            is_max = (score == seg_max[seg_idx]) & valid
            hit = np.flatnonzero(is_max)
            if hit.size == 0:
                continue
            seg_of_hit, first = np.unique(seg_idx[hit], return_index=True)
            pick = hit[first]
            gains = score[pick] - total[seg_of_hit]**2 / counts[seg_of_hit]
            for seg, p, gain in zip(seg_of_hit, pick, gains):
                nd = int(seg_node[seg])
                if gain > 1e-12 and gain > best_gain.get(nd, 0.0):
                    best_gain[nd] = gain
                    best_feat[nd] = f
                    best_thr[nd] = sv[p]
        if not best_feat:
            break
        for nd in sorted(best_feat):
            lid = len(feature)
            feature.append(NO_FEATURE); threshold.append(0.0); left.append(-1); right.append(-1)
            rid = len(feature)
            feature.append(NO_FEATURE); threshold.append(0.0); left.append(-1); right.append(-1)
            feature[nd] = best_feat[nd]
            threshold[nd] = float(best_thr[nd])
            left[nd] = lid
            right[nd] = rid
            rows = node_of_row == nd
            go_left = X[:, best_feat[nd]] <= best_thr[nd]
            node_of_row[rows & go_left] = lid
            node_of_row[rows & ~go_left] = rid

    n_nodes = len(feature)
    sums = np.bincount(node_of_row, weights=y, minlength=n_nodes)
    cnts = np.bincount(node_of_row, minlength=n_nodes)
    value = np.zeros(n_nodes)
    occupied = cnts > 0
    value[occupied] = sums[occupied] / cnts[occupied]
    tree = _Tree(feature, threshold, left, right, value)
    return tree, value[node_of_row]


class _Ensemble:
    """Boosted trees for one output dimension."""

    def __init__(self, config):
        self.config = config
        self.base = 0.0
        self.trees = []

    def fit(self, X, y, presort):
        cfg = self.config
        self.base = float(np.mean(y))
        pred = np.full(X.shape[0], self.base)
        self.trees = []
        for _ in range(cfg.trees):
            tree, train_values = _grow_tree(
                X, y - pred, cfg.max_depth, cfg.min_samples_leaf, presort)
            self.trees.append(tree)
            pred = pred + cfg.learning_rate * train_values
        return self

    def predict(self, X, n_trees=None):
        out = np.full(X.shape[0], self.base)
        for tree in self.trees[:n_trees]:
            out += self.config.learning_rate * tree.predict(X)
        return out


@register_family
class GBTSurrogate(Surrogate):
    """One boosted ensemble per output dimension."""

    family = "gbt"
    min_fit_rows = 10

    def __init__(self, config=None):
        super().__init__()
        self.config = config or GBTConfig()
        self.ensembles = []

    def _fit_normalized(self, X, Y, seed):
        # the greedy growth is deterministic; seed is part of the fit
        # contract but unused here
        presort = [np.argsort(X[:, f], kind="stable").astype(np.int64)
                   for f in range(X.shape[1])]
        self.ensembles = [
            _Ensemble(self.config).fit(X, Y[:, d], presort)
            for d in range(Y.shape[1])
        ]

    def _predict_normalized(self, X, n_trees=None):
        return np.column_stack([e.predict(X, n_trees) for e in self.ensembles])

    def staged_training_mse(self, dataset):
        """Training MSE (normalized target units) after each tree count
        0..trees; used to check that capacity growth never hurts."""
        from .base import encode_inputs
        X = self.input_norm.transform(encode_inputs(dataset.states, dataset.actions))
        Y = self.target_norm.transform(dataset.next_states - dataset.states)
        mses = []
        for t in range(len(self.ensembles[0].trees) + 1):
            pred = self._predict_normalized(X, n_trees=t)
            mses.append(float(np.mean((pred - Y) ** 2)))
        return mses

    def _params_to_dict(self):
        return {
            "config": {
                "trees": self.config.trees,
                "max_depth": self.config.max_depth,
                "learning_rate": self.config.learning_rate,
                "min_samples_leaf": self.config.min_samples_leaf,
            },
            "ensembles": [
                {"base": e.base, "trees": [t.to_lists() for t in e.trees]}
                for e in self.ensembles
            ],
        }

    def _params_from_dict(self, payload):
        self.config = GBTConfig(**payload["config"])
        self.ensembles = []
        for ens in payload["ensembles"]:
            e = _Ensemble(self.config)
            e.base = float(ens["base"])
            e.trees = [_Tree.from_lists(t) for t in ens["trees"]]
            self.ensembles.append(e)
