"""From-scratch classifiers with deterministic seeded training."""

from __future__ import annotations

import numpy as np

from .base import (AMPLITUDE_KINDS, SHORT_NAMES, Learner, LearnerKind, tree_seed,
                   valid_kind_names)
from .ensemble import AdaBoost, ExtraTrees, GradientBoosting, RandomForest
from .knn import KNNPrecomputed
from .linear import LDA, GaussianNB, LogisticRegression, Perceptron, RidgeClassifier
from .tree import DecisionTree, Tree

__all__ = [
    "AMPLITUDE_KINDS", "SHORT_NAMES", "Learner", "LearnerKind", "Tree", "DEFAULT_HYPERPARAMS",
    "default_hyperparams", "fit_learner", "predict_labels", "intrinsic_importances",
    "learner_from_dict", "tree_seed", "valid_kind_names",
]

LEARNER_CLASSES: dict[LearnerKind, type[Learner]] = {
    LearnerKind.DECISION_TREE: DecisionTree,
    LearnerKind.RANDOM_FOREST: RandomForest,
    LearnerKind.EXTRA_TREES: ExtraTrees,
    LearnerKind.GRADIENT_BOOSTING: GradientBoosting,
    LearnerKind.ADABOOST: AdaBoost,
    LearnerKind.LDA: LDA,
    LearnerKind.LOGISTIC_REGRESSION: LogisticRegression,
    LearnerKind.GAUSSIAN_NB: GaussianNB,
    LearnerKind.PERCEPTRON: Perceptron,
    LearnerKind.RIDGE: RidgeClassifier,
    LearnerKind.KNN_PRECOMPUTED: KNNPrecomputed,
}

DEFAULT_HYPERPARAMS: dict[LearnerKind, dict] = {
    LearnerKind.DECISION_TREE: {"max_depth": None, "min_samples_split": 2},
    LearnerKind.RANDOM_FOREST: {"n_estimators": 50, "max_features": "sqrt", "bootstrap": True,
                                "max_depth": None, "min_samples_split": 2},
    LearnerKind.EXTRA_TREES: {"n_estimators": 50, "max_features": "sqrt", "bootstrap": False,
                              "max_depth": None, "min_samples_split": 2},
    LearnerKind.GRADIENT_BOOSTING: {"n_estimators": 50, "learning_rate": 0.1, "max_depth": 3},
    LearnerKind.ADABOOST: {"n_estimators": 50, "max_depth": 1},
    LearnerKind.LDA: {"reg": 1e-6},
    LearnerKind.LOGISTIC_REGRESSION: {"learning_rate": 0.1, "n_iter": 500, "penalty": "l2",
                                      "l2": 1e-4, "l1": 0.01},
    LearnerKind.GAUSSIAN_NB: {"var_floor": 1e-9},
    LearnerKind.PERCEPTRON: {"n_epochs": 100, "learning_rate": 1.0},
    LearnerKind.RIDGE: {"alpha": 1.0},
    LearnerKind.KNN_PRECOMPUTED: {"n_neighbors": 5},
}

_POSITIVE = ("n_estimators", "learning_rate", "n_iter", "n_epochs", "n_neighbors",
             "min_samples_split", "max_depth")


def default_hyperparams(kind: LearnerKind, **overrides) -> dict:
    kind = LearnerKind(kind)
    hp = dict(DEFAULT_HYPERPARAMS[kind])
    unknown = set(overrides) - set(hp)
    if unknown:
        raise ValueError(f"unknown hyperparameters for {kind.value}: {sorted(unknown)}")
    hp.update(overrides)
    for key in _POSITIVE:
        if hp.get(key) is not None and hp[key] <= 0:
            raise ValueError(f"{key} must be positive, got {hp[key]}")
    return hp


def fit_learner(kind, X, y, hp: dict | None = None, seed: int = 0) -> Learner:
    kind = LearnerKind(kind)
    params = default_hyperparams(kind, **(hp or {}))
    return LEARNER_CLASSES[kind](params, seed).fit(X, y)


def predict_labels(model: Learner, X) -> np.ndarray:
    return model.predict(X)


def intrinsic_importances(model: Learner) -> np.ndarray:
    """Normalised Gini importances of a tree model (all zeros for a bare leaf)."""
    if model.kind not in (LearnerKind.DECISION_TREE, LearnerKind.RANDOM_FOREST,
                          LearnerKind.EXTRA_TREES):
        raise ValueError(f"intrinsic importances are not defined for {model.kind.value}")
    return model.feature_importances()


def learner_from_dict(d: dict) -> Learner:
    return LEARNER_CLASSES[LearnerKind(d["kind"])].from_dict(d)
