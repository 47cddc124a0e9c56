"""Black-box classifier interface.

A model is queried only through ``predict_labels``; everything downstream
(neighbourhood sampling, surrogate fitting, fidelity scoring) treats it as
opaque.  ``predict_scores`` is optional and used nowhere in the
explanation pipeline itself.
"""
from __future__ import annotations

import abc

import numpy as np

from ..errors import ModelError


class BlackBoxModel(abc.ABC):
    """Opaque label-prediction interface.

    Implementations must be deterministic once trained: repeated calls on
    the same rows return the same labels.
    """

    descriptor: str = "blackbox"

    @abc.abstractmethod
    def predict_labels(self, rows: np.ndarray) -> np.ndarray:
        """Predicted class code (int64, one per row)."""

    def predict_scores(self, rows: np.ndarray) -> np.ndarray | None:
        """Real-valued score per row, higher = class 1; None if the model
        has no natural score."""
        return None


def check_matrix(rows: np.ndarray, n_features: int) -> np.ndarray:
    """Validate a prediction batch against the trained dimension."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2:
        raise ModelError(f"expected a 2-d batch of rows, got shape {rows.shape}")
    if rows.shape[1] != n_features:
        raise ModelError(
            f"dimension mismatch: model trained on {n_features} features, "
            f"batch has {rows.shape[1]}"
        )
    return rows


def check_training_set(features: np.ndarray, labels: np.ndarray) -> None:
    labels = np.asarray(labels)
    if features.shape[0] < 2:
        raise ModelError("need at least 2 training rows")
    if np.unique(labels).size < 2:
        raise ModelError("training set contains a single class")
