"""Linear and generative classifiers."""

from __future__ import annotations

import numpy as np

from .base import Learner, LearnerKind
from .tree import class_stats


def _standardizer(X):
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale < 1e-12] = 1.0
    return mean, scale


def _arr(d, key):
    return np.asarray(d[key], dtype=float)


class LogisticRegression(Learner):
    """Multinomial softmax regression fitted by full-batch gradient descent.

    Inputs are standardised with training statistics. ``penalty="l2"`` adds
    ``l2 * W`` to the gradient; ``penalty="l1"`` takes a proximal
    soft-threshold step with weight ``l1`` after every gradient step.
    """

    kind = LearnerKind.LOGISTIC_REGRESSION

    def _fit(self, X, y_idx):
        hp = self.hyperparams
        lr = float(hp.get("learning_rate", 0.1))
        n_iter = int(hp.get("n_iter", 500))
        penalty = hp.get("penalty", "l2")
        l2 = float(hp.get("l2", 1e-4))
        l1 = float(hp.get("l1", 0.01))
        self.mean_, self.scale_ = _standardizer(X)
        Z = (X - self.mean_) / self.scale_
        Y = class_stats(y_idx, self.n_classes)
        n, p = Z.shape
        W = np.zeros((p, self.n_classes))
        b = np.zeros(self.n_classes)
        for _ in range(n_iter):
            logits = Z @ W + b
            logits -= logits.max(axis=1, keepdims=True)
            P = np.exp(logits)
            P /= P.sum(axis=1, keepdims=True)
            G = P - Y
            gW = Z.T @ G / n
            gb = G.mean(axis=0)
            if penalty == "l2":
                gW += l2 * W
            W -= lr * gW
            b -= lr * gb
            if penalty == "l1":
                W = np.sign(W) * np.maximum(np.abs(W) - lr * l1, 0.0)
        self.coef_ = W
        self.intercept_ = b

    def _decision(self, X):
        return ((X - self.mean_) / self.scale_) @ self.coef_ + self.intercept_

    def _params_to_dict(self):
        return {"mean": self.mean_.tolist(), "scale": self.scale_.tolist(),
                "coef": self.coef_.tolist(), "intercept": self.intercept_.tolist()}

    def _params_from_dict(self, d):
        self.mean_, self.scale_ = _arr(d, "mean"), _arr(d, "scale")
        self.coef_ = _arr(d, "coef").reshape(self.n_features_, -1)
        self.intercept_ = _arr(d, "intercept")


class Perceptron(Learner):
    """One-vs-all perceptrons on standardised inputs, seeded epoch shuffles."""

    kind = LearnerKind.PERCEPTRON

    def _fit(self, X, y_idx):
        hp = self.hyperparams
        epochs = int(hp.get("n_epochs", 100))
        lr = float(hp.get("learning_rate", 1.0))
        self.mean_, self.scale_ = _standardizer(X)
        Z = (X - self.mean_) / self.scale_
        n, p = Z.shape
        T = np.where(class_stats(y_idx, self.n_classes) > 0, 1.0, -1.0)
        W = np.zeros((p, self.n_classes))
        b = np.zeros(self.n_classes)
        rng = np.random.default_rng(np.random.SeedSequence([self.seed & 0xFFFFFFFF, 0]))
        for _ in range(epochs):
            mistakes = 0
            for i in rng.permutation(n):
                wrong = T[i] * (Z[i] @ W + b) <= 0.0
                if wrong.any():
                    mistakes += 1
                    step = lr * T[i] * wrong
                    W += np.outer(Z[i], step)
                    b += step
            if mistakes == 0:
                break
        self.coef_ = W
        self.intercept_ = b

    _decision = LogisticRegression._decision
    _params_to_dict = LogisticRegression._params_to_dict
    _params_from_dict = LogisticRegression._params_from_dict


class RidgeClassifier(Learner):
    """Least squares on centred one-hot targets with an L2 penalty; argmax decode."""

    kind = LearnerKind.RIDGE

    def _fit(self, X, y_idx):
        lam = float(self.hyperparams.get("alpha", 1.0))
        Y = class_stats(y_idx, self.n_classes)
        self.x_mean_ = X.mean(axis=0)
        y_mean = Y.mean(axis=0)
        Xc = X - self.x_mean_
        Yc = Y - y_mean
        n, p = Xc.shape
        if p <= n:
            W = np.linalg.solve(Xc.T @ Xc + lam * np.eye(p), Xc.T @ Yc)
        else:
            W = Xc.T @ np.linalg.solve(Xc @ Xc.T + lam * np.eye(n), Yc)
        self.coef_ = W
        self.intercept_ = y_mean

    def _decision(self, X):
        return (X - self.x_mean_) @ self.coef_ + self.intercept_

    def _params_to_dict(self):
        return {"x_mean": self.x_mean_.tolist(), "coef": self.coef_.tolist(),
                "intercept": self.intercept_.tolist()}

    def _params_from_dict(self, d):
        self.x_mean_ = _arr(d, "x_mean")
        self.coef_ = _arr(d, "coef").reshape(self.n_features_, -1)
        self.intercept_ = _arr(d, "intercept")


class LDA(Learner):
    """Linear discriminant analysis with pooled covariance ``S + eps*I``.

    When there are more features than rows the inverse is applied through the
    Woodbury identity so the ``p x p`` matrix is never formed.
    """

    kind = LearnerKind.LDA

    def _fit(self, X, y_idx):
        eps = float(self.hyperparams.get("reg", 1e-6))
        K = self.n_classes
        n, p = X.shape
        means = np.vstack([X[y_idx == k].mean(axis=0) for k in range(K)])
        priors = np.bincount(y_idx, minlength=K) / n
        A = (X - means[y_idx]) / np.sqrt(max(n - K, 1))
        if p <= n:
            cov = A.T @ A + eps * np.eye(p)
            sol = np.linalg.solve(cov, means.T)
        else:
            inner = eps * np.eye(n) + A @ A.T
            sol = (means.T - A.T @ np.linalg.solve(inner, A @ means.T)) / eps
        self.coef_ = sol
        self.intercept_ = -0.5 * np.einsum("kp,pk->k", means, sol) + np.log(priors)

    def _decision(self, X):
        return X @ self.coef_ + self.intercept_

    def _params_to_dict(self):
        return {"coef": self.coef_.tolist(), "intercept": self.intercept_.tolist()}

    def _params_from_dict(self, d):
        self.coef_ = _arr(d, "coef").reshape(self.n_features_, -1)
        self.intercept_ = _arr(d, "intercept")


class GaussianNB(Learner):
    kind = LearnerKind.GAUSSIAN_NB

    def _fit(self, X, y_idx):
        floor = float(self.hyperparams.get("var_floor", 1e-9))
        K = self.n_classes
        self.theta_ = np.vstack([X[y_idx == k].mean(axis=0) for k in range(K)])
        var = np.vstack([X[y_idx == k].var(axis=0) for k in range(K)])
        self.var_ = np.maximum(var, floor)
        self.log_prior_ = np.log(np.bincount(y_idx, minlength=K) / X.shape[0])

    def _decision(self, X):
        out = np.empty((X.shape[0], self.n_classes))
        for k in range(self.n_classes):
            ll = -0.5 * np.sum(np.log(2.0 * np.pi * self.var_[k]))
            ll = ll - 0.5 * np.sum((X - self.theta_[k]) ** 2 / self.var_[k], axis=1)
            out[:, k] = ll + self.log_prior_[k]
        return out

    def _params_to_dict(self):
        return {"theta": self.theta_.tolist(), "var": self.var_.tolist(),
                "log_prior": self.log_prior_.tolist()}

    def _params_from_dict(self, d):
        self.theta_ = _arr(d, "theta")
        self.var_ = _arr(d, "var")
        self.log_prior_ = _arr(d, "log_prior")
