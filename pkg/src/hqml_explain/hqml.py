"""Hybrid models: quantum feature map followed by a classical learner.

Two hybrid branches exist. ``AMPLITUDE`` models feed the ``2**D`` basis
probabilities of the encoded state to any learner. ``KERNEL`` models keep the
(scaled) training rows and classify by k-nearest neighbours under the
fidelity-kernel distance ``sqrt(1 - k)``.

``ClassicalModel`` wraps a learner that consumes the scaled features directly
(identity encoding). It shares the prediction surface so the same explainer
code can be validated against interpretable classical models.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from . import __version__
from .encoding import FeatureMapSpec, amplitude_matrix, distance_matrix, kernel_matrix
from .learners import Learner, LearnerKind, SHORT_NAMES, fit_learner, learner_from_dict

FORMAT_VERSION = 1
DEFAULT_BLOCK_ROWS = 256


class ModelType(str, Enum):
    AMPLITUDE = "amplitude"
    KERNEL = "kernel"


@dataclass(eq=False)
class HQMLModel:
    learner: Learner
    map: FeatureMapSpec
    model_type: ModelType
    feature_labels: list[str]
    x_ref_train: np.ndarray | None = None
    k_ref: np.ndarray | None = None
    block_rows: int = DEFAULT_BLOCK_ROWS
    metadata: dict = field(default_factory=dict)

    @property
    def n_features(self) -> int:
        return self.map.n_qubits

    @property
    def descriptor(self) -> str:
        kind = self.learner.kind
        name = SHORT_NAMES.get(kind, "Q" + kind.value)
        return f"{name} ({self.model_type.value}, {self.map.n_qubits} qubits)"

    def represent(self, X: np.ndarray) -> np.ndarray:
        """Classical representation the learner consumes for rows ``X``."""
        if self.model_type is ModelType.AMPLITUDE:
            return amplitude_matrix(X, self.map)
        if self.k_ref is not None and X.shape == self.x_ref_train.shape \
                and np.array_equal(X, self.x_ref_train):
            return distance_matrix(self.k_ref)
        return distance_matrix(kernel_matrix(X, self.x_ref_train, self.block_rows))


@dataclass(eq=False)
class ClassicalModel:
    learner: Learner
    feature_labels: list[str]
    metadata: dict = field(default_factory=dict)

    @property
    def n_features(self) -> int:
        return self.learner.n_features_

    @property
    def descriptor(self) -> str:
        return f"{self.learner.kind.value} (classical)"

    def represent(self, X: np.ndarray) -> np.ndarray:
        return X


def _check_rows(model, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(f"expected rows of width {model.n_features}, got shape {X.shape}")
    return X


def train_hqml(X_tr, y_tr, kind, model_type, fmap: FeatureMapSpec | None = None,
               hp: dict | None = None, seed: int = 0, feature_labels=None,
               block_rows: int = DEFAULT_BLOCK_ROWS) -> HQMLModel:
    X_tr = np.asarray(X_tr, dtype=float)
    kind = LearnerKind(kind)
    model_type = ModelType(model_type)
    if fmap is None:
        fmap = FeatureMapSpec(n_qubits=X_tr.shape[1])
    if X_tr.ndim != 2 or X_tr.shape[1] != fmap.n_qubits:
        raise ValueError(f"feature map expects {fmap.n_qubits} features, got shape {X_tr.shape}")
    labels = list(feature_labels) if feature_labels is not None else \
        [f"x{j}" for j in range(X_tr.shape[1])]
    if model_type is ModelType.AMPLITUDE:
        if kind is LearnerKind.KNN_PRECOMPUTED:
            raise ValueError("KNNPrecomputed needs the kernel model type")
        fmap.check_amplitude_cap()
        feats = np.vstack([amplitude_matrix(X_tr[s:s + block_rows], fmap)
                           for s in range(0, X_tr.shape[0], block_rows)])
        learner = fit_learner(kind, feats, y_tr, hp, seed)
        return HQMLModel(learner, fmap, model_type, labels, block_rows=block_rows)
    if kind is not LearnerKind.KNN_PRECOMPUTED:
        raise ValueError(f"kernel models use KNNPrecomputed, not {kind.value}")
    k_ref = kernel_matrix(X_tr, X_tr, block_rows)
    learner = fit_learner(kind, distance_matrix(k_ref), y_tr, hp, seed)
    return HQMLModel(learner, fmap, model_type, labels, x_ref_train=X_tr.copy(),
                     k_ref=k_ref, block_rows=block_rows)


def train_classical(X_tr, y_tr, kind, hp: dict | None = None, seed: int = 0,
                    feature_labels=None) -> ClassicalModel:
    X_tr = np.asarray(X_tr, dtype=float)
    learner = fit_learner(kind, X_tr, y_tr, hp, seed)
    labels = list(feature_labels) if feature_labels is not None else \
        [f"x{j}" for j in range(X_tr.shape[1])]
    return ClassicalModel(learner, labels)


def predict_adapted(model, X_eval) -> np.ndarray:
    """Predict on rows in the original scaled feature space.

    The encoding stage is recomputed from ``X_eval`` on every call, so perturbed
    inputs propagate through the feature map before reaching the learner.
    """
    X = _check_rows(model, X_eval)
    if isinstance(model, HQMLModel) and model.model_type is ModelType.AMPLITUDE:
        step = model.block_rows
        return np.concatenate([model.learner.predict(model.represent(X[s:s + step]))
                               for s in range(0, X.shape[0], step)])
    return model.learner.predict(model.represent(X))


def score_accuracy(model, X, y) -> float:
    y = np.asarray(y)
    if y.shape[0] == 0:
        raise ValueError("cannot score an empty dataset")
    pred = predict_adapted(model, X)
    if pred.shape[0] != y.shape[0]:
        raise ValueError("X and y row counts differ")
    return float(np.mean(pred == y))


def array_fingerprint(X) -> str:
    X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
    h = hashlib.sha256(str(X.shape).encode())
    h.update(X.tobytes())
    return h.hexdigest()


def model_to_dict(model) -> dict:
    d = {
        "format_version": FORMAT_VERSION,
        "tool_version": __version__,
        "feature_labels": list(model.feature_labels),
        "learner": model.learner.to_dict(),
        "metadata": model.metadata,
    }
    if isinstance(model, ClassicalModel):
        d["model_type"] = "classical"
        return d
    d["model_type"] = model.model_type.value
    d["map"] = model.map.to_dict()
    d["block_rows"] = model.block_rows
    if model.x_ref_train is not None:
        d["x_ref_train"] = model.x_ref_train.tolist()
    if model.k_ref is not None:
        d["k_ref"] = model.k_ref.tolist()
    return d


def model_from_dict(d: dict):
    if d.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format_version {d.get('format_version')!r}")
    learner = learner_from_dict(d["learner"])
    if d["model_type"] == "classical":
        return ClassicalModel(learner, d["feature_labels"], d.get("metadata", {}))
    x_ref = d.get("x_ref_train")
    k_ref = d.get("k_ref")
    return HQMLModel(
        learner=learner,
        map=FeatureMapSpec.from_dict(d["map"]),
        model_type=ModelType(d["model_type"]),
        feature_labels=d["feature_labels"],
        x_ref_train=None if x_ref is None else np.asarray(x_ref, dtype=float),
        k_ref=None if k_ref is None else np.asarray(k_ref, dtype=float),
        block_rows=int(d.get("block_rows", DEFAULT_BLOCK_ROWS)),
        metadata=d.get("metadata", {}),
    )


def save_model(model, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1) + "\n")


def load_model(path):
    return model_from_dict(json.loads(Path(path).read_text()))
