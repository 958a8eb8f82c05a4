"""Distribution of the number of positive labels among independent instances.

For per-instance positive probabilities ``eta_1..eta_m`` the label count
follows a Poisson-binomial distribution whose mass function equals the
coefficient vector of the polynomial ``prod_j (eta_j z + (1 - eta_j))``.
Tables are plain float64 numpy arrays: entry ``i`` is P(exactly i of the
m labels are 1).  Direct convolution keeps every entry inside [0, 1]
(each step is a convex combination), which is adequate up to m ~ 1e4.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "CoefficientTable",
    "coefficients",
    "split_coefficients",
    "shrink_suffix",
    "prefix_tables",
    "suffix_tables",
]

CoefficientTable = np.ndarray


def _check_probs(etas: np.ndarray) -> np.ndarray:
    etas = np.asarray(etas, dtype=np.float64)
    if etas.ndim != 1:
        raise ValueError("expected a 1-d probability vector")
    if etas.size and (etas.min() < 0.0 or etas.max() > 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    return etas


def coefficients(etas) -> CoefficientTable:
    """Label-count distribution over the given instances.

    Runs m sequential degree-1 convolutions in index order, O(m^2) total.
    """
    etas = _check_probs(etas)
    table = np.ones(1)
    for eta in etas:
        grown = np.zeros(table.size + 1)
        grown[:-1] = table * (1.0 - eta)
        grown[1:] += table * eta
        table = grown
    return table


def split_coefficients(etas_sorted, k: int) -> tuple[CoefficientTable, CoefficientTable]:
    """Count distributions over the first k and the remaining instances."""
    etas_sorted = _check_probs(etas_sorted)
    n = etas_sorted.size
    if not 0 <= k <= n:
        raise ValueError(f"k={k} outside 0..{n}")
    return coefficients(etas_sorted[:k]), coefficients(etas_sorted[k:])


def shrink_suffix(suffix_table: CoefficientTable, eta: float) -> CoefficientTable:
    """Extend a suffix count distribution by one more instance in front.

    If ``suffix_table`` describes the labels of instances k+1..n, the
    result describes k..n: ``out[i] = eta * in[i-1] + (1 - eta) * in[i]``
    with out-of-range entries treated as zero.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta={eta} outside [0, 1]")
    table = np.asarray(suffix_table, dtype=np.float64)
    grown = np.zeros(table.size + 1)
    grown[:-1] = table * (1.0 - eta)
    grown[1:] += table * eta
    return grown


def prefix_tables(etas_sorted) -> np.ndarray:
    """All prefix count distributions as one (n+1, n+1) matrix.

    Row k holds the distribution over the first k instances, zero-padded;
    row k is built from row k-1 with the same update as
    :func:`coefficients`, so the rows match it bitwise.
    """
    etas_sorted = _check_probs(etas_sorted)
    n = etas_sorted.size
    out = np.zeros((n + 1, n + 1))
    out[0, 0] = 1.0
    for k in range(1, n + 1):
        eta = etas_sorted[k - 1]
        prev = out[k - 1, :k]
        out[k, :k] = prev * (1.0 - eta)
        out[k, 1 : k + 1] += prev * eta
    return out


def suffix_tables(etas_sorted) -> np.ndarray:
    """All suffix count distributions as one (n+1, n+1) matrix.

    Row k holds the distribution over instances k+1..n (so row n is the
    empty product and row 0 covers everything), built back to front with
    :func:`shrink_suffix`'s update.
    """
    etas_sorted = _check_probs(etas_sorted)
    n = etas_sorted.size
    out = np.zeros((n + 1, n + 1))
    out[n, 0] = 1.0
    for k in range(n, 0, -1):
        eta = etas_sorted[k - 1]
        prev = out[k, : n - k + 1]
        out[k - 1, : n - k + 1] = prev * (1.0 - eta)
        out[k - 1, 1 : n - k + 2] += prev * eta
    return out
