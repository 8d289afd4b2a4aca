from __future__ import annotations

import math

import numpy as np

from .base import Learner, LearnerKind, tree_seed
from .tree import Tree, build_tree, class_stats, normalized, regression_stats


def _resolve_max_features(spec, p: int):
    if spec is None or spec == "all":
        return None
    if spec == "sqrt":
        return max(1, int(math.isqrt(p)))
    if isinstance(spec, float):
        return max(1, int(spec * p))
    return int(spec)


class RandomForest(Learner):
    """Bagged Gini trees with per-node feature subsampling; soft voting."""

    kind = LearnerKind.RANDOM_FOREST
    random_splits = False

    def _fit(self, X, y_idx):
        hp = self.hyperparams
        n, p = X.shape
        max_features = _resolve_max_features(hp.get("max_features", "sqrt"), p)
        bootstrap = hp.get("bootstrap", not self.random_splits)
        self.trees_ = []
        for t in range(int(hp.get("n_estimators", 50))):
            rng = tree_seed(self.seed, t)
            rows = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
            stats = class_stats(y_idx[rows], self.n_classes)
            self.trees_.append(build_tree(
                X[rows], stats,
                max_depth=hp.get("max_depth"),
                min_samples_split=hp.get("min_samples_split", 2),
                max_features=max_features,
                random_splits=self.random_splits,
                rng=rng,
            ))

    def _decision(self, X):
        proba = np.zeros((X.shape[0], self.n_classes))
        for tree in self.trees_:
            proba += tree.predict_value(X)
        return proba / len(self.trees_)

    def feature_importances(self) -> np.ndarray:
        per_tree = [normalized(t.feature_importances()) for t in self.trees_]
        return normalized(np.mean(per_tree, axis=0))

    def _params_to_dict(self):
        return {"trees": [t.to_dict() for t in self.trees_]}

    def _params_from_dict(self, d):
        self.trees_ = [Tree.from_dict(t) for t in d["trees"]]


class ExtraTrees(RandomForest):
    """Extremely randomised trees: one uniform random threshold per candidate feature."""

    kind = LearnerKind.EXTRA_TREES
    random_splits = True


class AdaBoost(Learner):
    """Multiclass SAMME boosting of depth-1 Gini stumps."""

    kind = LearnerKind.ADABOOST

    def _fit(self, X, y_idx):
        hp = self.hyperparams
        n = X.shape[0]
        K = self.n_classes
        w = np.full(n, 1.0 / n)
        self.stumps_, self.alphas_ = [], []
        for t in range(int(hp.get("n_estimators", 50))):
            stump = build_tree(X, class_stats(y_idx, K, w), max_depth=hp.get("max_depth", 1),
                               rng=tree_seed(self.seed, t))
            pred = np.argmax(stump.predict_value(X), axis=1)
            miss = pred != y_idx
            err = float(w[miss].sum() / w.sum())
            if err <= 1e-10:
                # Perfect weak learner: keep it with a capped weight and stop.
                self.stumps_.append(stump)
                self.alphas_.append(math.log((1.0 - 1e-10) / 1e-10) + math.log(K - 1.0))
                break
            if err >= 1.0 - 1.0 / K:
                if not self.stumps_:
                    self.stumps_.append(stump)
                    self.alphas_.append(1.0)
                break
            alpha = math.log((1.0 - err) / err) + math.log(K - 1.0)
            self.stumps_.append(stump)
            self.alphas_.append(alpha)
            w = w * np.exp(alpha * miss)
            w /= w.sum()

    def _decision(self, X):
        scores = np.zeros((X.shape[0], self.n_classes))
        rows = np.arange(X.shape[0])
        for stump, alpha in zip(self.stumps_, self.alphas_):
            scores[rows, np.argmax(stump.predict_value(X), axis=1)] += alpha
        return scores

    def _params_to_dict(self):
        return {"stumps": [s.to_dict() for s in self.stumps_], "alphas": list(self.alphas_)}

    def _params_from_dict(self, d):
        self.stumps_ = [Tree.from_dict(s) for s in d["stumps"]]
        self.alphas_ = [float(a) for a in d["alphas"]]


def _softmax(F):
    Z = F - F.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


class GradientBoosting(Learner):
    """Softmax gradient boosting, one squared-error regression tree per class per round.

    Leaf values are replaced by the usual one-step Newton estimate for the
    multinomial deviance.
    """

    kind = LearnerKind.GRADIENT_BOOSTING

    def _fit(self, X, y_idx):
        hp = self.hyperparams
        K = self.n_classes
        lr = float(hp.get("learning_rate", 0.1))
        Y = class_stats(y_idx, K)
        prior = np.clip(Y.mean(axis=0), 1e-12, None)
        self.init_ = np.log(prior)
        F = np.tile(self.init_, (X.shape[0], 1))
        self.rounds_ = []
        for t in range(int(hp.get("n_estimators", 50))):
            P = _softmax(F)
            round_trees = []
            for k in range(K):
                r = Y[:, k] - P[:, k]
                tree = build_tree(X, regression_stats(r), task="mse",
                                  max_depth=hp.get("max_depth", 3),
                                  rng=tree_seed(self.seed, t * K + k))
                leaves = tree.apply(X)
                values = np.zeros(tree.n_nodes)
                for leaf in np.unique(leaves):
                    rl = r[leaves == leaf]
                    den = float(np.sum(np.abs(rl) * (1.0 - np.abs(rl))))
                    values[leaf] = 0.0 if den < 1e-12 else (K - 1.0) / K * float(rl.sum()) / den
                tree.value = values[:, None]
                F[:, k] += lr * values[leaves]
                round_trees.append(tree)
            self.rounds_.append(round_trees)

    def _decision(self, X):
        lr = float(self.hyperparams.get("learning_rate", 0.1))
        F = np.tile(self.init_, (X.shape[0], 1))
        for round_trees in self.rounds_:
            for k, tree in enumerate(round_trees):
                F[:, k] += lr * tree.predict_value(X)[:, 0]
        return F

    def _params_to_dict(self):
        return {"init": self.init_.tolist(),
                "rounds": [[t.to_dict() for t in r] for r in self.rounds_]}

    def _params_from_dict(self, d):
        self.init_ = np.asarray(d["init"], dtype=float)
        self.rounds_ = [[Tree.from_dict(t) for t in r] for r in d["rounds"]]
