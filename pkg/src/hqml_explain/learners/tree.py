"""CART trees (Gini classification and squared-error regression).

Split search works on blocks of candidate features at once: sort each column,
accumulate sufficient statistics down the sorted order and score every
boundary between distinct values. Ties on the split criterion go to the lowest
feature index, then the lowest threshold.
"""

from __future__ import annotations

import numpy as np

from .base import Learner, LearnerKind, tree_seed

# Elements (rows x features x stats) processed per split-search block.
_BLOCK_ELEMS = 4_000_000
_TIE_TOL = 1e-12


class Tree:
    """Flat array representation of a fitted tree; node 0 is the root."""

    def __init__(self, feature, threshold, left, right, value, weight, impurity, n_features):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=float)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=float)
        self.weight = np.asarray(weight, dtype=float)
        self.impurity = np.asarray(impurity, dtype=float)
        self.n_features = int(n_features)

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for node in range(self.n_nodes):
            if self.feature[node] >= 0:
                depth[self.left[node]] = depth[node] + 1
                depth[self.right[node]] = depth[node] + 1
        return int(depth.max())

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            feat = self.feature[node]
            active = feat >= 0
            if not active.any():
                return node
            go_left = X[rows, np.where(active, feat, 0)] <= self.threshold[node]
            nxt = np.where(go_left, self.left[node], self.right[node])
            node = np.where(active, nxt, node)

    def predict_value(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def used_features(self) -> set[int]:
        return {int(f) for f in self.feature if f >= 0}

    def feature_importances(self) -> np.ndarray:
        """Unnormalised weighted impurity decrease per feature."""
        imp = np.zeros(self.n_features)
        for node in np.flatnonzero(self.feature >= 0):
            l, r = self.left[node], self.right[node]
            gain = (self.weight[node] * self.impurity[node]
                    - self.weight[l] * self.impurity[l]
                    - self.weight[r] * self.impurity[r])
            imp[self.feature[node]] += gain
        return np.maximum(imp, 0.0)

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "weight": self.weight.tolist(),
            "impurity": self.impurity.tolist(),
            "n_features": self.n_features,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(d["feature"], d["threshold"], d["left"], d["right"], d["value"],
                   d["weight"], d["impurity"], d["n_features"])


def _gini_child(left, total):
    # left: (..., C) weighted class sums; returns n_l*gini_l + n_r*gini_r
    right = total - left
    nl = left.sum(-1)
    nr = right.sum(-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        cl = nl - (left ** 2).sum(-1) / nl
        cr = nr - (right ** 2).sum(-1) / nr
    out = np.where(nl > 0, cl, 0.0) + np.where(nr > 0, cr, 0.0)
    return np.where((nl > 0) & (nr > 0), out, np.inf)


def _sse_child(left, total):
    # stats columns: count, sum, sum of squares
    right = total - left
    nl, nr = left[..., 0], right[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        cl = left[..., 2] - left[..., 1] ** 2 / nl
        cr = right[..., 2] - right[..., 1] ** 2 / nr
    return np.where((nl > 0) & (nr > 0), cl + cr, np.inf)


def _node_impurity(stats_total, task):
    if task == "gini":
        n = stats_total.sum()
        return 1.0 - float(((stats_total / n) ** 2).sum()) if n > 0 else 0.0
    n = stats_total[0]
    mean = stats_total[1] / n
    return max(0.0, float(stats_total[2] / n - mean * mean))


def _pick(child: np.ndarray, tol: float):
    """Lowest-index position (features-major) within ``tol`` of the minimum."""
    mn = child.min()
    if not np.isfinite(mn):
        return None
    return int(np.argmax(child <= mn + tol))


def _sorted_split(Xn, stats, total, features, criterion, tol):
    m = Xn.shape[0]
    block = max(1, _BLOCK_ELEMS // max(1, m * stats.shape[1]))
    best = None  # (child, feature, threshold)
    for start in range(0, len(features), block):
        feats = features[start:start + block]
        cols = Xn[:, feats]
        order = np.argsort(cols, axis=0, kind="stable")
        xs = np.take_along_axis(cols, order, axis=0)
        cum = np.cumsum(stats[order], axis=0)[:-1]  # (m-1, f, S)
        child = criterion(cum, total)
        child[xs[1:] <= xs[:-1]] = np.inf
        child = child.T  # (f, m-1): feature-major so ties favour lower feature then lower threshold
        pos = _pick(child, tol)
        if pos is None:
            continue
        fi, i = divmod(pos, m - 1)
        val = child[fi, i]
        if best is None or val < best[0] - tol:
            lo, hi = xs[i, fi], xs[i + 1, fi]
            thr = (lo + hi) / 2.0
            if not lo <= thr < hi:
                thr = lo
            best = (val, int(feats[fi]), float(thr))
    return best


def _random_split(Xn, stats, total, features, criterion, rng, tol):
    cols = Xn[:, features]
    lo = cols.min(axis=0)
    hi = cols.max(axis=0)
    draws = rng.uniform(size=len(features))
    thr = lo + draws * (hi - lo)
    mask = cols <= thr
    left = np.einsum("mf,ms->fs", mask.astype(float), stats)
    child = criterion(left, total)
    child[hi <= lo] = np.inf
    pos = _pick(child, tol)
    if pos is None:
        return None
    return child[pos], int(features[pos]), float(thr[pos])


def build_tree(X, stats, *, task="gini", max_depth=None, min_samples_split=2,
               max_features=None, random_splits=False, rng=None) -> Tree:
    """Grow a tree on ``X`` with per-row sufficient statistics ``stats``.

    For ``task="gini"`` ``stats`` is the (weighted) one-hot label matrix and
    leaf values are class proportions. For ``task="mse"`` it holds
    ``[1, y, y**2]`` per row and leaves store the mean target.
    """
    n, p = X.shape
    criterion = _gini_child if task == "gini" else _sse_child
    if rng is None:
        rng = np.random.default_rng(0)
    all_features = np.arange(p)
    k = p if max_features is None else int(min(max(1, max_features), p))

    feature, threshold, left, right, value, weight, impurity = [], [], [], [], [], [], []

    def new_node(idx):
        tot = stats[idx].sum(axis=0)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        if task == "gini":
            s = tot.sum()
            value.append(tot / s if s > 0 else np.full(tot.shape, 1.0 / tot.shape[0]))
            weight.append(float(s))
        else:
            value.append(np.array([tot[1] / tot[0]]))
            weight.append(float(tot[0]))
        impurity.append(_node_impurity(tot, task))
        return len(feature) - 1, tot

    root, root_tot = new_node(np.arange(n))
    stack = [(root, np.arange(n), 0, root_tot)]
    while stack:
        node, idx, depth, tot = stack.pop()
        if (len(idx) < min_samples_split or impurity[node] <= 1e-15
                or (max_depth is not None and depth >= max_depth)):
            continue
        Xn = X[idx]
        st = stats[idx]
        tol = _TIE_TOL * max(1.0, float(weight[node]))
        if k < p:
            cand = np.sort(rng.choice(p, size=k, replace=False))
        else:
            cand = all_features
        search = _random_split if random_splits else _sorted_split
        args = (rng, tol) if random_splits else (tol,)
        best = search(Xn, st, tot, cand, criterion, *args)
        if best is None and k < p:
            rest = np.setdiff1d(all_features, cand)
            best = search(Xn, st, tot, rest, criterion, *args)
        if best is None:
            continue
        _, f, thr = best
        go_left = Xn[:, f] <= thr
        li, ri = idx[go_left], idx[~go_left]
        feature[node] = f
        threshold[node] = thr
        lnode, ltot = new_node(li)
        rnode, rtot = new_node(ri)
        left[node] = lnode
        right[node] = rnode
        # Right pushed first so the left subtree is numbered first.
        stack.append((rnode, ri, depth + 1, rtot))
        stack.append((lnode, li, depth + 1, ltot))

    return Tree(feature, threshold, left, right, np.vstack(value), weight, impurity, p)


def class_stats(y_idx, n_classes, sample_weight=None) -> np.ndarray:
    onehot = np.zeros((len(y_idx), n_classes))
    onehot[np.arange(len(y_idx)), y_idx] = 1.0
    if sample_weight is not None:
        onehot *= np.asarray(sample_weight, dtype=float)[:, None]
    return onehot


def regression_stats(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    return np.column_stack([np.ones_like(y), y, y * y])


def normalized(imp: np.ndarray) -> np.ndarray:
    s = imp.sum()
    return imp / s if s > 0 else imp


class DecisionTree(Learner):
    kind = LearnerKind.DECISION_TREE

    def _fit(self, X, y_idx):
        hp = self.hyperparams
        self.tree_ = build_tree(
            X, class_stats(y_idx, self.n_classes),
            max_depth=hp.get("max_depth"),
            min_samples_split=hp.get("min_samples_split", 2),
            max_features=hp.get("max_features"),
            rng=tree_seed(self.seed, 0),
        )

    def _decision(self, X):
        return self.tree_.predict_value(X)

    def feature_importances(self) -> np.ndarray:
        return normalized(self.tree_.feature_importances())

    def _params_to_dict(self):
        return {"tree": self.tree_.to_dict()}

    def _params_from_dict(self, d):
        self.tree_ = Tree.from_dict(d["tree"])
