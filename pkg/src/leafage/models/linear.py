"""Linear-family reference classifiers: logistic regression, linear SVM
and linear discriminant analysis.

All three expose ``weights`` and ``intercept`` so tests can check that the
decision boundary really is the hyperplane ``weights @ x + intercept = 0``.
Labels are binary codes {0, 1}; a row is predicted 1 iff its score is
non-negative.
"""
from __future__ import annotations

import warnings

import numpy as np

from .base import BlackBoxModel, check_matrix, check_training_set


class LinearBinaryModel(BlackBoxModel):
    """Common prediction plumbing for models with an exposed hyperplane."""

    def __init__(self) -> None:
        self.weights: np.ndarray | None = None
        self.intercept: float = 0.0
        self.n_features: int = 0
        self.converged: bool = True

    def predict_scores(self, rows: np.ndarray) -> np.ndarray:
        rows = check_matrix(rows, self.n_features)
        return rows @ self.weights + self.intercept

    def predict_labels(self, rows: np.ndarray) -> np.ndarray:
        return (self.predict_scores(rows) >= 0.0).astype(np.int64)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -35.0, 35.0)))


class LogisticRegressionModel(LinearBinaryModel):
    """L2-penalized logistic regression trained by full-batch gradient
    descent with a Lipschitz step size."""

    descriptor = "lr"

    def __init__(self, l2: float = 1.0, max_iter: int = 1000, tol: float = 1e-6):
        super().__init__()
        self.l2 = l2
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, features: np.ndarray, labels: np.ndarray, seed: int = 0):
        check_training_set(features, labels)
        X = np.asarray(features, dtype=np.float64)
        y = np.asarray(labels, dtype=np.float64)
        n, d = X.shape
        self.n_features = d
        lam = self.l2 / n
        w = np.zeros(d)
        b = 0.0
        # Gradient Lipschitz constant of the mean logistic loss.
        lip = 0.25 * (np.linalg.norm(X, 2) ** 2 / n + 1.0) + lam
        step = 1.0 / lip
        self.converged = False
        for _ in range(self.max_iter):
            p = _sigmoid(X @ w + b)
            grad_w = X.T @ (p - y) / n + lam * w
            grad_b = float(np.mean(p - y))
            w -= step * grad_w
            b -= step * grad_b
            if max(np.max(np.abs(grad_w)), abs(grad_b)) < self.tol:
                self.converged = True
                break
        if not self.converged:
            warnings.warn(
                f"logistic regression did not reach tol={self.tol} within "
                f"{self.max_iter} iterations",
                stacklevel=2,
            )
        self.weights = w
        self.intercept = b
        return self


class LinearSVMModel(LinearBinaryModel):
    """Primal linear SVM trained by deterministic full-batch subgradient
    descent on the hinge loss (Pegasos-style decaying steps)."""

    descriptor = "svm"

    def __init__(self, c: float = 1.0, max_iter: int = 2000):
        super().__init__()
        self.c = c
        self.max_iter = max_iter

    def fit(self, features: np.ndarray, labels: np.ndarray, seed: int = 0):
        check_training_set(features, labels)
        X = np.asarray(features, dtype=np.float64)
        m = np.where(np.asarray(labels) == 1, 1.0, -1.0)
        n, d = X.shape
        self.n_features = d
        lam = 1.0 / (self.c * n)
        w = np.zeros(d)
        b = 0.0
        w_avg = np.zeros(d)
        b_avg = 0.0
        for t in range(1, self.max_iter + 1):
            margins = m * (X @ w + b)
            active = margins < 1.0
            grad_w = lam * w - (m[active, None] * X[active]).sum(axis=0) / n
            grad_b = -float(m[active].sum()) / n
            eta = 1.0 / (lam * (t + 1))
            w -= eta * grad_w
            b -= eta * grad_b
            # Pegasos projection onto the ball containing the optimum.
            norm = np.linalg.norm(w)
            limit = 1.0 / np.sqrt(lam)
            if norm > limit:
                w *= limit / norm
            w_avg += (w - w_avg) / t
            b_avg += (b - b_avg) / t
        # Averaged iterate: smoother boundary than the last subgradient step.
        self.weights = w_avg
        self.intercept = b_avg
        return self


class LDAModel(LinearBinaryModel):
    """Linear discriminant analysis with a pooled, lightly ridged
    covariance estimate."""

    descriptor = "lda"

    def __init__(self, ridge: float = 1e-6):
        super().__init__()
        self.ridge = ridge

    def fit(self, features: np.ndarray, labels: np.ndarray, seed: int = 0):
        check_training_set(features, labels)
        X = np.asarray(features, dtype=np.float64)
        y = np.asarray(labels, dtype=np.int64)
        n, d = X.shape
        self.n_features = d
        x0 = X[y == 0]
        x1 = X[y == 1]
        mu0 = x0.mean(axis=0)
        mu1 = x1.mean(axis=0)
        centered0 = x0 - mu0
        centered1 = x1 - mu1
        denom = max(n - 2, 1)
        pooled = (centered0.T @ centered0 + centered1.T @ centered1) / denom
        pooled += self.ridge * np.eye(d)
        w = np.linalg.solve(pooled, mu1 - mu0)
        prior_ratio = np.log(x1.shape[0] / x0.shape[0])
        b = float(-0.5 * w @ (mu0 + mu1) + prior_ratio)
        self.weights = w
        self.intercept = b
        return self
