from __future__ import annotations

import numpy as np

from .base import Learner, LearnerKind


class KNNPrecomputed(Learner):
    """k-nearest-neighbour vote over precomputed distances.

    Fitted on an ``n x n`` distance matrix among reference rows; prediction
    takes one distance row per query against those same references. Equal
    distances resolve to the lower reference index, equal votes to the lower
    class index.
    """

    kind = LearnerKind.KNN_PRECOMPUTED

    def fit(self, D, y):
        D = np.asarray(D, dtype=float)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise ValueError("KNNPrecomputed must be fitted on a square distance matrix")
        return super().fit(D, y)

    def _fit(self, D, y_idx):
        self.y_ref_ = y_idx.astype(np.int64)

    def _decision(self, D):
        k = min(int(self.hyperparams.get("n_neighbors", 5)), D.shape[1])
        nearest = np.argsort(D, axis=1, kind="stable")[:, :k]
        votes = np.zeros((D.shape[0], self.n_classes))
        rows = np.repeat(np.arange(D.shape[0]), k)
        np.add.at(votes, (rows, self.y_ref_[nearest].ravel()), 1.0)
        return votes

    def _params_to_dict(self):
        return {"y_ref": self.y_ref_.tolist()}

    def _params_from_dict(self, d):
        self.y_ref_ = np.asarray(d["y_ref"], dtype=np.int64)
