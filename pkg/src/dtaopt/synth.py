"""Bundled synthetic benchmark data with a known probability model.

Features are standard Gaussian, the positive-class probability is a
sigmoid of a fixed linear score, and the intercept is calibrated by
bisection (Gauss-Hermite quadrature over the score distribution) so the
marginal positive rate hits a target such as 10%.  Because the generator
is the ground truth, experiments on it can compare against exact
probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .data import Dataset

__all__ = ["SyntheticPair", "generate_sigmoid_data", "sigmoid_probabilities"]


@dataclass(frozen=True)
class SyntheticPair:
    train: Dataset
    test: Dataset
    eta_train: np.ndarray
    eta_test: np.ndarray
    weights: np.ndarray
    bias: float


def _calibrated_bias(weight_norm: float, positive_rate: float) -> float:
    """Intercept b with E[sigmoid(z + b)] = positive_rate for z ~ N(0, s^2)."""
    nodes, quad_weights = np.polynomial.hermite_e.hermegauss(64)
    quad_weights = quad_weights / quad_weights.sum()

    def mean_rate(b: float) -> float:
        return float(quad_weights @ expit(weight_norm * nodes + b))

    lo, hi = -30.0, 30.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mean_rate(mid) < positive_rate:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sigmoid_probabilities(X: np.ndarray, weights: np.ndarray, bias: float) -> np.ndarray:
    return expit(X @ weights + bias)


def generate_sigmoid_data(
    n_train: int = 2000,
    n_test: int = 500,
    d: int = 5,
    seed: int = 0,
    positive_rate: float = 0.1,
    weight_norm: float = 2.0,
) -> SyntheticPair:
    """Draw one train/test pair from the sigmoid generator.

    The weight direction is drawn per seed and rescaled to a fixed norm so
    probabilities stay spread out rather than saturating at 0/1.
    """
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(d)
    w *= weight_norm / np.linalg.norm(w)
    b = _calibrated_bias(weight_norm, positive_rate)

    X_train = rng.standard_normal((n_train, d))
    X_test = rng.standard_normal((n_test, d))
    eta_train = sigmoid_probabilities(X_train, w, b)
    eta_test = sigmoid_probabilities(X_test, w, b)
    y_train = (rng.random(n_train) < eta_train).astype(np.int64)
    y_test = (rng.random(n_test) < eta_test).astype(np.int64)
    return SyntheticPair(
        train=Dataset(X_train, y_train, name=f"synthetic-train-{seed}"),
        test=Dataset(X_test, y_test, name=f"synthetic-test-{seed}"),
        eta_train=eta_train,
        eta_test=eta_test,
        weights=w,
        bias=b,
    )
