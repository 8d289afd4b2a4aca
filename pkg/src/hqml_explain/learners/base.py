from __future__ import annotations

from enum import Enum

import numpy as np


class LearnerKind(str, Enum):
    DECISION_TREE = "DecisionTree"
    RANDOM_FOREST = "RandomForest"
    EXTRA_TREES = "ExtraTrees"
    GRADIENT_BOOSTING = "GradientBoosting"
    ADABOOST = "AdaBoost"
    LDA = "LDA"
    LOGISTIC_REGRESSION = "LogisticRegression"
    GAUSSIAN_NB = "GaussianNB"
    PERCEPTRON = "Perceptron"
    RIDGE = "RidgeClassifier"
    KNN_PRECOMPUTED = "KNNPrecomputed"

    @classmethod
    def parse(cls, name: str) -> "LearnerKind":
        key = name.strip().lower().replace("-", "").replace("_", "").replace(".", "")
        for kind in cls:
            if kind.value.lower() == key:
                return kind
        if key in _ALIASES:
            return _ALIASES[key]
        raise ValueError(f"unknown learner kind {name!r}; valid kinds: {', '.join(valid_kind_names())}")


# Short model tags used for the hybrid model rows (QDT, QRF, ...).
SHORT_NAMES = {
    LearnerKind.ADABOOST: "QAda",
    LearnerKind.DECISION_TREE: "QDT",
    LearnerKind.EXTRA_TREES: "QExtra",
    LearnerKind.GRADIENT_BOOSTING: "QGB",
    LearnerKind.LDA: "QLDA",
    LearnerKind.LOGISTIC_REGRESSION: "QLogistic",
    LearnerKind.GAUSSIAN_NB: "QNB",
    LearnerKind.PERCEPTRON: "QPerceptron",
    LearnerKind.RANDOM_FOREST: "QRF",
    LearnerKind.RIDGE: "QRidge",
}
_ALIASES = {
    **{v.lower(): k for k, v in SHORT_NAMES.items()},
    "dt": LearnerKind.DECISION_TREE,
    "rf": LearnerKind.RANDOM_FOREST,
    "extratrees": LearnerKind.EXTRA_TREES,
    "gb": LearnerKind.GRADIENT_BOOSTING,
    "ada": LearnerKind.ADABOOST,
    "logistic": LearnerKind.LOGISTIC_REGRESSION,
    "logreg": LearnerKind.LOGISTIC_REGRESSION,
    "nb": LearnerKind.GAUSSIAN_NB,
    "ridge": LearnerKind.RIDGE,
    "knn": LearnerKind.KNN_PRECOMPUTED,
}

# The ten learner families that run on amplitude features.
AMPLITUDE_KINDS = tuple(SHORT_NAMES)


def valid_kind_names() -> list[str]:
    return [k.value for k in LearnerKind]


def tree_seed(seed: int, index: int) -> np.random.Generator:
    """Generator for the ``index``-th tree of an ensemble.

    The stream depends only on ``(seed, index)`` through numpy's SeedSequence
    hashing, so trees can be built in any order or in parallel.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, int(index)]))


def check_fit_inputs(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("X must be a non-empty 2-D matrix")
    if y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise ValueError(f"y must have one label per row ({X.shape[0]}), got shape {y.shape}")
    if X.shape[0] < 2:
        raise ValueError("need at least 2 training rows")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite entries")
    classes, y_idx = np.unique(y, return_inverse=True)
    if classes.size < 2:
        raise ValueError("training labels contain a single class")
    return X, classes, y_idx


def argmax_lowest(scores: np.ndarray) -> np.ndarray:
    # np.argmax returns the first maximal index, i.e. the lowest class index on ties.
    return np.argmax(scores, axis=1)


class Learner:
    """Common surface of every fitted classifier.

    Subclasses implement ``_fit(X, y_idx, rng)``, ``_decision(X)`` (per-class
    scores, higher is better) and the ``_params_to_dict``/``_params_from_dict``
    pair used by model persistence.
    """

    kind: LearnerKind

    def __init__(self, hyperparams: dict, seed: int = 0):
        self.hyperparams = dict(hyperparams)
        self.seed = int(seed)
        self.classes_: np.ndarray | None = None
        self.n_features_: int | None = None

    def fit(self, X, y):
        X, classes, y_idx = check_fit_inputs(X, y)
        self.classes_ = classes
        self.n_features_ = X.shape[1]
        self._fit(X, y_idx)
        return self

    def _check_predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.n_features_:
            raise ValueError(f"expected {self.n_features_} columns, got {X.shape[-1] if X.ndim else 0}")
        return X

    def predict_index(self, X) -> np.ndarray:
        X = self._check_predict(X)
        return argmax_lowest(self._decision(X))

    def predict(self, X) -> np.ndarray:
        return self.classes_[self.predict_index(X)]

    @property
    def n_classes(self) -> int:
        return len(self.classes_)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "seed": self.seed,
            "hyperparams": self.hyperparams,
            "classes": self.classes_.tolist(),
            "n_features": self.n_features_,
            "params": self._params_to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Learner":
        obj = cls(d["hyperparams"], d["seed"])
        obj.classes_ = np.asarray(d["classes"])
        obj.n_features_ = int(d["n_features"])
        obj._params_from_dict(d["params"])
        return obj

    def _fit(self, X, y_idx):
        raise NotImplementedError

    def _decision(self, X):
        raise NotImplementedError

    def _params_to_dict(self) -> dict:
        raise NotImplementedError

    def _params_from_dict(self, d: dict):
        raise NotImplementedError
