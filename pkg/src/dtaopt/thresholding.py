"""Plugin threshold classifiers: the comparison methods.

A plugin classifier predicts positive wherever the estimated probability
clears a cutoff delta.  The cutoff is either fixed (0.5 accuracy-style
baseline) or tuned on held-out validation data to extremize the empirical
metric; the empirical objective is piecewise constant in delta, so
searching the observed probability values plus midpoints is exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metrics import MetricSpec, confusion_triple, phi_eval

__all__ = ["PluginThreshold", "classify_threshold", "select_threshold"]


@dataclass(frozen=True)
class PluginThreshold:
    """Selected cutoff with its achieved validation utility and the
    candidate grid that was searched."""

    delta: float
    achieved_val_utility: float
    grid: np.ndarray


def classify_threshold(etas, delta: float) -> np.ndarray:
    """Predict positive where eta >= delta (ties go to positive)."""
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta={delta} outside [0, 1]")
    etas = np.asarray(etas, dtype=np.float64)
    return (etas >= delta).astype(np.int64)


def select_threshold(metric: MetricSpec, etas_val, y_val) -> PluginThreshold:
    """Pick the cutoff extremizing the empirical metric on validation data.

    Candidates are the sorted unique probabilities, midpoints between
    neighbours, and the endpoints 0 and 1.  Ties resolve to the smallest
    cutoff.
    """
    etas_val = np.asarray(etas_val, dtype=np.float64)
    y_val = np.asarray(y_val)
    if etas_val.size == 0:
        raise ValueError("empty validation set")
    if etas_val.shape != y_val.shape:
        raise ValueError("probabilities and labels must have matching shape")

    uniques = np.unique(etas_val)
    midpoints = (uniques[:-1] + uniques[1:]) / 2.0
    grid = np.unique(np.concatenate([uniques, midpoints, [0.0, 1.0]]))
    grid = grid[(grid >= 0.0) & (grid <= 1.0)]

    best_delta = None
    best_value = None
    for delta in grid:
        s = classify_threshold(etas_val, float(delta))
        value = phi_eval(metric, confusion_triple(s, y_val))
        better = (
            best_value is None
            or (metric.maximize and value > best_value)
            or (not metric.maximize and value < best_value)
        )
        if better:
            best_delta = float(delta)
            best_value = value
    return PluginThreshold(delta=best_delta, achieved_val_utility=best_value, grid=grid)
