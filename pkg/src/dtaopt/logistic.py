"""L2-regularized logistic regression, fitted deterministically.

Full-batch gradient descent with backtracking line search from a zero
start, so the same inputs always produce the same model; downstream
prediction comparisons must be reproducible.  The intercept is not
regularized.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from scipy.special import expit

__all__ = [
    "LinearModel",
    "train_logistic",
    "predict_proba",
    "loss_and_gradient",
    "save_model",
    "load_model",
]

PROB_CLAMP = 1e-12
MODEL_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    bias: float
    lam: float
    iterations: int
    grad_norm: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.weights).all() or not np.isfinite(self.bias):
            raise ValueError("model parameters must be finite")
        if self.lam < 0.0:
            raise ValueError("lam must be non-negative")


def _check_xy(X, y):
    X = np.asarray(X, dtype=np.float64) if not hasattr(X, "tocsr") else X
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    if y.shape != (n,):
        raise ValueError(f"labels shape {y.shape} does not match {n} rows")
    if n == 0:
        raise ValueError("empty training set")
    if not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("labels must be binary 0/1")
    if not hasattr(X, "tocsr") and not np.isfinite(X).all():
        raise ValueError("features must be finite")
    return X, y


def loss_and_gradient(X, y, weights, bias, lam):
    """Mean logistic loss plus (lam/2)*||w||^2, with its exact gradient."""
    n = X.shape[0]
    z = X @ weights + bias
    # log(1 + e^z) - y*z, stable for large |z|
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    loss += 0.5 * lam * float(weights @ weights)
    residual = expit(z) - y
    grad_w = (X.T @ residual) / n + lam * weights
    grad_w = np.asarray(grad_w).ravel()
    grad_b = float(residual.mean())
    return loss, grad_w, grad_b


def train_logistic(X, y, lam: float = 1e-3, max_iters: int = 500, tol: float = 1e-6) -> LinearModel:
    """Fit by full-batch descent with Armijo backtracking, zero init.

    Stops when the gradient norm (weights and bias jointly) drops to
    ``tol`` or after ``max_iters`` accepted steps.  Single-class label
    vectors are allowed; regularization keeps the optimum finite.
    """
    X, y = _check_xy(X, y)
    if lam < 0.0:
        raise ValueError("lam must be non-negative")
    d = X.shape[1]
    weights = np.zeros(d)
    bias = 0.0
    loss, grad_w, grad_b = loss_and_gradient(X, y, weights, bias, lam)
    iterations = 0
    for _ in range(max_iters):
        grad_norm = float(np.sqrt(grad_w @ grad_w + grad_b * grad_b))
        if grad_norm <= tol:
            break
        step = 1.0
        target_drop = 1e-4 * grad_norm * grad_norm
        for _ in range(60):
            trial_w = weights - step * grad_w
            trial_b = bias - step * grad_b
            trial_loss, trial_gw, trial_gb = loss_and_gradient(X, y, trial_w, trial_b, lam)
            if trial_loss <= loss - step * target_drop:
                break
            step *= 0.5
        else:
            break
        weights, bias = trial_w, trial_b
        loss, grad_w, grad_b = trial_loss, trial_gw, trial_gb
        iterations += 1
    grad_norm = float(np.sqrt(grad_w @ grad_w + grad_b * grad_b))
    return LinearModel(weights=weights, bias=float(bias), lam=float(lam),
                       iterations=iterations, grad_norm=grad_norm)


def predict_proba(model: LinearModel, X) -> np.ndarray:
    """Positive-class probabilities, clamped away from exact 0 and 1.

    The clamp keeps downstream label-count distributions strictly
    positive everywhere.
    """
    d = X.shape[1]
    if d != model.weights.size:
        raise ValueError(f"feature count {d} does not match model dimension {model.weights.size}")
    z = np.asarray(X @ model.weights).ravel() + model.bias
    return np.clip(expit(z), PROB_CLAMP, 1.0 - PROB_CLAMP)


def save_model(model: LinearModel, path: Union[str, Path]) -> None:
    record = {
        "schema_version": MODEL_SCHEMA_VERSION,
        "d": int(model.weights.size),
        "weights": [float(w) for w in model.weights],
        "bias": model.bias,
        "lambda": model.lam,
        "iterations": model.iterations,
        "grad_norm": model.grad_norm,
    }
    Path(path).write_text(json.dumps(record, indent=2) + "\n")


def load_model(path: Union[str, Path]) -> LinearModel:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"model file not found: {path}")
    try:
        record = json.loads(path.read_text())
        weights = np.asarray(record["weights"], dtype=np.float64)
        if weights.size != int(record["d"]):
            raise ValueError("weight count does not match declared dimension")
        return LinearModel(
            weights=weights,
            bias=float(record["bias"]),
            lam=float(record["lambda"]),
            iterations=int(record.get("iterations", 0)),
            grad_norm=float(record.get("grad_norm", 0.0)),
        )
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValueError(f"corrupt model file {path}: {exc}") from exc
