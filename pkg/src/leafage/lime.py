"""Simplified LIME-style baseline: kernel-weighted linear fit on synthetic
points sampled across the whole (standardized) input space.

Used as the comparison strategy in the fidelity experiments.  No feature
discretization; the surrogate is the same weighted logistic fit the local
method uses, so the two strategies differ only in where their training
points come from.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import LocalSurrogate, weighted_logistic_fit
from .data import Dataset
from .errors import ExplanationError

__all__ = ["LimeConfig", "default_sigma", "lime_sample", "kernel_weight", "lime_fit"]


@dataclass(frozen=True)
class LimeConfig:
    """Sampling size, kernel width and seed.

    ``sigma=None`` resolves to the conventional 0.75 * sqrt(d) at use.
    """

    n_samples: int = 5000
    sigma: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.sigma is not None and self.sigma <= 0:
            raise ExplanationError("sigma must be positive")

    def resolve_sigma(self, d: int) -> float:
        return self.sigma if self.sigma is not None else 0.75 * math.sqrt(d)

    def check_n_samples(self, d: int) -> None:
        if self.n_samples < 10 * d:
            raise ExplanationError(
                f"n_samples={self.n_samples} is below the minimum 10*d={10 * d}"
            )


def default_sigma(d: int) -> float:
    """Conventional kernel width 0.75 * sqrt(dimension)."""
    return 0.75 * math.sqrt(d)


def lime_sample(train: Dataset | int, z: np.ndarray, cfg: LimeConfig) -> np.ndarray:
    """Synthetic points drawn i.i.d. per feature from the standard normal.

    The training space is standardized, so unit normals cover the input
    distribution; samples are not centred on ``z``.  ``train`` may be a
    Dataset or just the dimension.
    """
    d = train if isinstance(train, int) else train.d
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (d,):
        raise ExplanationError(f"instance has shape {z.shape}, expected ({d},)")
    cfg.check_n_samples(d)
    rng = np.random.default_rng(cfg.seed)
    return rng.standard_normal((cfg.n_samples, d))


def kernel_weight(z: np.ndarray, x: np.ndarray, sigma: float) -> float:
    """Exponential proximity kernel exp(-||x - z||^2 / sigma^2)."""
    if sigma <= 0:
        raise ExplanationError("sigma must be positive")
    z = np.asarray(z, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    diff = x - z
    return float(np.exp(-(diff @ diff) / sigma**2))


def _kernel_weights(z: np.ndarray, rows: np.ndarray, sigma: float) -> np.ndarray:
    diff = rows - z
    return np.exp(-np.einsum("ij,ij->i", diff, diff) / sigma**2)


def lime_fit(model, z: np.ndarray, cfg: LimeConfig, d: int | None = None) -> LocalSurrogate:
    """Kernel-weighted logistic surrogate on black-box-labelled samples.

    ``z`` is in standardized space.  Degenerate (flagged) when the black
    box labels every sample identically.
    """
    z = np.asarray(z, dtype=np.float64)
    d = z.shape[0] if d is None else d
    samples = lime_sample(d, z, cfg)
    labels = np.asarray(model.predict_labels(samples), dtype=np.float64)
    if np.unique(labels).size < 2:
        return LocalSurrogate(
            weights=np.zeros(d), intercept=0.0, degenerate=True
        )
    sigma = cfg.resolve_sigma(d)
    weights, intercept = weighted_logistic_fit(
        samples, labels, sample_weight=_kernel_weights(z, samples, sigma)
    )
    degenerate = bool(np.linalg.norm(weights) < 1e-12)
    return LocalSurrogate(weights=weights, intercept=intercept, degenerate=degenerate)
