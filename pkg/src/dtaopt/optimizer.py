"""Expected-utility-optimal test-set predictions.

Given per-instance positive-class probabilities, the expected value of a
confusion-matrix metric over the random labels factorizes through the
label-count distributions of the predicted-positive and predicted-negative
groups.  For metrics where ranking by probability is optimal, only the
n+1 "top k" prediction vectors need scoring:

* :func:`optimize_general` scores all cutoffs in O(n^3) for any metric,
* :func:`optimize_sfl` does it in O(n^2) for ratios of affine functions
  of (u, v) over (u, v, p) with rational denominator coefficients,
* :func:`brute_force` searches all 2^n prediction vectors exactly and is
  the oracle the fast paths are validated against,
* :func:`verify_prp` checks that some exhaustive optimum is a
  probability-ranked prediction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from numba import njit

from .metrics import MetricSpec
from .poisson_binomial import (
    coefficients,
    prefix_tables,
    split_coefficients,
    suffix_tables,
)

__all__ = [
    "SortedEtas",
    "Prediction",
    "PrpResult",
    "expected_utility_topk",
    "expected_utility_arbitrary",
    "expected_utility_by_enumeration",
    "optimize_general",
    "optimize_sfl",
    "brute_force",
    "verify_prp",
    "BRUTE_FORCE_MAX_N",
]

#: exhaustive search evaluates 2^n predictions; keep that tractable
BRUTE_FORCE_MAX_N = 15

#: two cutoffs whose expected utilities differ by at most this are a tie
TIE_TOL = 1e-12

#: tolerance for "equally optimal" in the exhaustive ranking check
UTILITY_TOL = 1e-9

# cap on elements per phi evaluation block in the cubic path; modest so
# the working set stays cache-friendly at every test-set size
_CHUNK_BUDGET = 250_000


@dataclass(frozen=True)
class SortedEtas:
    """Probabilities in non-increasing order plus the sort permutation.

    ``perm[i]`` is the original index of the i-th largest probability;
    equal values keep their original relative order.
    """

    values: np.ndarray
    perm: np.ndarray

    @classmethod
    def from_probabilities(cls, etas) -> "SortedEtas":
        etas = _check_probs(etas)
        perm = np.argsort(-etas, kind="stable")
        return cls(values=etas[perm], perm=perm)

    @property
    def n(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class Prediction:
    """Optimal cutoff and prediction vector for one probability vector.

    ``utility_curve[k]`` is the expected metric value of predicting the k
    most probable instances positive; ``s_star`` is in original instance
    order.  For the exhaustive search the optimum may not be a cutoff, but
    the curve is still reported.
    """

    k_star: int
    s_star: np.ndarray
    utility: float
    utility_curve: np.ndarray


@dataclass(frozen=True)
class PrpResult:
    """Whether some exhaustively-optimal prediction is probability-ranked."""

    holds: bool
    witness: Optional[np.ndarray] = None

    def __bool__(self) -> bool:
        return self.holds


def _check_probs(etas) -> np.ndarray:
    etas = np.asarray(etas, dtype=np.float64)
    if etas.ndim != 1:
        raise ValueError("expected a 1-d probability vector")
    if etas.size == 0:
        raise ValueError("empty probability vector")
    if etas.min() < 0.0 or etas.max() > 1.0:
        raise ValueError("probabilities must lie in [0, 1]")
    return etas


def _sorted_values(etas: Union[SortedEtas, Sequence[float], np.ndarray]) -> np.ndarray:
    if isinstance(etas, SortedEtas):
        return etas.values
    values = _check_probs(etas)
    if values.size > 1 and (np.diff(values) > 0.0).any():
        raise ValueError("probabilities must be sorted in non-increasing order")
    return values


def _phi_block(metric: MetricSpec, n: int, k: int) -> np.ndarray:
    """phi on the (k1, k2) grid reachable when the top k are predicted."""
    k1 = np.arange(k + 1)
    k2 = np.arange(n - k + 1)
    u = (k1 / n)[:, None]
    p = np.add.outer(k1, k2) / n
    block = np.asarray(metric.phi(u, np.float64(k / n), p), dtype=np.float64)
    # metrics that ignore an argument come back partially broadcast
    return np.broadcast_to(block, (k + 1, n - k + 1))


def expected_utility_topk(metric: MetricSpec, etas, k: int) -> float:
    """Expected metric value of predicting the k most probable positive.

    ``etas`` must be non-increasing (or a :class:`SortedEtas`).  O(n^2).
    """
    values = _sorted_values(etas)
    n = values.size
    if not 0 <= k <= n:
        raise ValueError(f"k={k} outside 0..{n}")
    pos_counts, neg_counts = split_coefficients(values, k)
    block = _phi_block(metric, n, k)
    return float(pos_counts @ (block @ neg_counts))


def expected_utility_arbitrary(metric: MetricSpec, etas, s) -> float:
    """Expected metric value of an arbitrary prediction vector.

    Factorizes the label distribution over the predicted-positive and
    predicted-negative index sets, so the cost is O(n^2) instead of 2^n.
    """
    etas = _check_probs(etas)
    s = np.asarray(s)
    if s.shape != etas.shape:
        raise ValueError(f"shape mismatch: etas{etas.shape} vs s{s.shape}")
    if not np.isin(s, (0, 1)).all():
        raise ValueError("s contains non-binary entries")
    sel = s.astype(bool)
    n = etas.size
    k = int(sel.sum())
    pos_counts = coefficients(etas[sel])
    neg_counts = coefficients(etas[~sel])
    block = _phi_block(metric, n, k)
    return float(pos_counts @ (block @ neg_counts))


def expected_utility_by_enumeration(metric: MetricSpec, etas, s) -> float:
    """Slow reference: sum metric values over all 2^n label outcomes.

    Exists to validate the factorized evaluation; refuses large n.
    """
    etas = _check_probs(etas)
    s = np.asarray(s, dtype=np.float64)
    n = etas.size
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"n={n} too large for exhaustive label enumeration")
    outcomes = np.arange(2**n, dtype=np.int64)
    bits = ((outcomes[:, None] >> np.arange(n)[None, :]) & 1).astype(np.float64)
    prob = np.prod(np.where(bits == 1.0, etas, 1.0 - etas), axis=1)
    u = bits @ s / n
    p = bits.sum(axis=1) / n
    v = float(s.sum()) / n
    vals = np.asarray(metric.phi(u, np.full_like(u, v), p), dtype=np.float64)
    return float(prob @ np.broadcast_to(vals, u.shape))


# ---------------------------------------------------------------------------
# cutoff optimization, general metrics


def _utility_curve_general(metric: MetricSpec, values: np.ndarray) -> np.ndarray:
    """Expected utility of every cutoff k = 0..n, O(n^3) total.

    The per-cutoff double sum over (k1, k2) is evaluated as a tensor
    contraction over blocks of cutoffs; cells outside the reachable
    (k1, k2) ranges are zeroed before contraction since their coefficient
    weight is zero.
    """
    n = values.size
    prefixes = prefix_tables(values)
    suffixes = suffix_tables(values)
    idx = np.arange(n + 1)
    u_row = (idx / n)[None, :, None]
    p_grid = (np.add.outer(idx, idx) / n)[None, :, :]
    curve = np.empty(n + 1)
    chunk = max(1, _CHUNK_BUDGET // ((n + 1) * (n + 1)))
    for start in range(0, n + 1, chunk):
        stop = min(start + chunk, n + 1)
        ks = idx[start:stop]
        shape = (stop - start, n + 1, n + 1)
        # materialize the broadcast inputs so phi's per-cell cost does not
        # depend on chunk geometry
        u3 = np.ascontiguousarray(np.broadcast_to(u_row, shape))
        v3 = np.ascontiguousarray(np.broadcast_to((ks / n)[:, None, None], shape))
        p3 = np.ascontiguousarray(np.broadcast_to(p_grid, shape))
        block = np.asarray(metric.phi(u3, v3, p3), dtype=np.float64)
        reachable = (idx[None, :, None] <= ks[:, None, None]) & (
            idx[None, None, :] <= n - ks[:, None, None]
        )
        block = np.where(reachable, block, 0.0)
        partial = np.einsum("kab,kb->ka", block, suffixes[start:stop])
        curve[start:stop] = np.einsum("ka,ka->k", partial, prefixes[start:stop])
    return curve


def _finalize(metric: MetricSpec, perm: np.ndarray, curve: np.ndarray) -> Prediction:
    # smallest cutoff within the tie tolerance of the extremum
    if metric.maximize:
        k_star = int(np.argmax(curve >= curve.max() - TIE_TOL))
    else:
        k_star = int(np.argmax(curve <= curve.min() + TIE_TOL))
    s_star = np.zeros(perm.size, dtype=np.int64)
    s_star[perm[:k_star]] = 1
    return Prediction(
        k_star=k_star,
        s_star=s_star,
        utility=float(curve[k_star]),
        utility_curve=curve,
    )


def optimize_general(metric: MetricSpec, etas) -> Prediction:
    """Best cutoff prediction for any metric, O(n^3)."""
    sorted_etas = SortedEtas.from_probabilities(etas)
    curve = _utility_curve_general(metric, sorted_etas.values)
    return _finalize(metric, sorted_etas.perm, curve)


# ---------------------------------------------------------------------------
# cutoff optimization, special fractional-linear metrics


@njit(cache=True)
def _sfl_curve_kernel(etas_raw, c0, c1, c2, j0, ju1, ju2, jv, scale, phi_zero):
    """Curve for cutoffs 1..n of a fractional-linear metric, O(n^2).

    ``S[i]`` tracks the expected reciprocal of the metric denominator over
    the suffix label count: at cutoff k, S holds sum_j D_k[j] * scale /
    (i + j0*n + scaled j-steps), maintained by one convex-combination
    sweep per cutoff.  Index i encodes the denominator value scaled by
    the common multiple of the rational coefficients' denominators, so
    each cutoff's score is a single pass over the prefix count
    distribution.  Cutoff 0 is evaluated from the full count distribution
    and ``phi_zero``.  Returns the curve and the stable descending sort
    order that was applied.
    """
    n = etas_raw.shape[0]
    order = np.argsort(-etas_raw, kind="mergesort")
    etas = etas_raw[order]

    prefixes = np.zeros((n + 1, n + 1))
    prefixes[0, 0] = 1.0
    for k in range(1, n + 1):
        e = etas[k - 1]
        prefixes[k, 0] = prefixes[k - 1, 0] * (1.0 - e)
        for i in range(1, k + 1):
            prefixes[k, i] = prefixes[k - 1, i - 1] * e + prefixes[k - 1, i] * (1.0 - e)

    width = (abs(ju1) + abs(ju2) + abs(jv)) * n
    S = np.empty(width + 1)
    for i in range(width + 1):
        den = float(i + j0 * n)
        S[i] = scale / den if den != 0.0 else np.nan

    curve = np.zeros(n + 1)
    step = ju1 + ju2
    for k in range(n, 0, -1):
        acc = 0.0
        for k1 in range(k + 1):
            acc += (c0 * n + c1 * k1 + c2 * k) * prefixes[k, k1] * S[step * k1 + jv * k]
        curve[k] = acc
        if ju2 != 0:
            e = etas[k - 1]
            for i in range(1, (abs(ju1) + abs(ju2) + abs(jv)) * (k - 1) + 1):
                S[i] = (1.0 - e) * S[i] + e * S[i + ju2]

    acc0 = 0.0
    for j in range(n + 1):
        acc0 += prefixes[n, j] * phi_zero[j]
    curve[0] = acc0
    return curve, order


# memoization keyed by object identity: hashing Fractions and dataclasses
# costs more than the cached work; entries pin their keys alive
_INDEX_CONSTANTS_CACHE: dict = {}
_PHI_ZERO_CACHE: dict = {}


def _index_constants(fl) -> tuple[int, int, int, int, float]:
    """Integer index constants of the rational denominator coefficients."""
    cached = _INDEX_CONSTANTS_CACHE.get(id(fl))
    if cached is not None and cached[0] is fl:
        return cached[1]
    r = [frac.denominator for frac in (fl.d0, fl.d1, fl.d2, fl.d3)]
    q = [frac.numerator for frac in (fl.d0, fl.d1, fl.d2, fl.d3)]
    j0 = r[1] * r[2] * r[3] * q[0]
    ju1 = r[0] * r[2] * r[3] * q[1]
    ju2 = r[0] * r[1] * r[2] * q[3]
    jv = r[0] * r[1] * r[3] * q[2]
    scale = float(r[0] * r[1] * r[2] * r[3])
    result = (j0, ju1, ju2, jv, scale)
    if len(_INDEX_CONSTANTS_CACHE) > 512:
        _INDEX_CONSTANTS_CACHE.clear()
    _INDEX_CONSTANTS_CACHE[id(fl)] = (fl, result)
    return result


def _phi_zero_row(metric: MetricSpec, n: int) -> np.ndarray:
    """phi(0, 0, j/n) for j = 0..n: the cutoff-0 column of the curve."""
    cached = _PHI_ZERO_CACHE.get((id(metric), n))
    if cached is not None and cached[0] is metric:
        return cached[1]
    counts = np.arange(n + 1, dtype=np.float64)
    row = np.asarray(metric.phi(np.zeros(n + 1), np.zeros(n + 1), counts / n), dtype=np.float64)
    row = np.ascontiguousarray(np.broadcast_to(row, (n + 1,)))
    row.setflags(write=False)
    if len(_PHI_ZERO_CACHE) > 512:
        _PHI_ZERO_CACHE.clear()
    _PHI_ZERO_CACHE[(id(metric), n)] = (metric, row)
    return row


def optimize_sfl(metric: MetricSpec, etas) -> Prediction:
    """Best cutoff prediction for eligible fractional-linear metrics, O(n^2).

    Requires ``metric.fl_params`` with a zero p-coefficient in the
    numerator, c1 > d1, and rational denominator coefficients with a
    non-negative p-coefficient.
    """
    fl = metric.fl_params
    if fl is None:
        raise ValueError(f"metric {metric.name!r} has no fractional-linear parameters")
    if not fl.sfl_eligible:
        raise ValueError(
            f"metric {metric.name!r} is not eligible: need c3 = 0 and c1 > d1"
        )
    j0, ju1, ju2, jv, scale = _index_constants(fl)
    if ju2 < 0:
        raise ValueError("negative p-coefficient in the denominator is not supported")

    values = _check_probs(etas)
    n = values.size
    width = (abs(ju1) + abs(ju2) + abs(jv)) * n
    if width > 50_000_000:
        raise ValueError("denominator rationals too large for the index array")
    step = ju1 + ju2
    corners = (jv, jv * n, (step + jv), (step + jv) * n)
    if min(corners) < 0 or max(corners) > width:
        raise ValueError("index constants fall outside the allocated array")
    if min(corners) == 0 and ju2 != 0:
        raise ValueError("index 0 is reachable but not maintained by the sweep")

    curve, perm = _sfl_curve_kernel(
        values, fl.c0, fl.c1, fl.c2, j0, ju1, ju2, jv, scale,
        _phi_zero_row(metric, n),
    )
    if np.isnan(curve).any():
        raise ArithmeticError(
            f"metric {metric.name!r}: denominator hit zero at a visited index"
        )
    return _finalize(metric, perm, curve)


# ---------------------------------------------------------------------------
# exhaustive search


@njit(cache=True)
def _subset_utilities_kernel(etas, phi_pad):
    """Expected utility of every prediction vector via the count
    factorization; phi_pad[k, k1, k2] holds phi(k1/n, k/n, (k1+k2)/n)."""
    n = etas.shape[0]
    total = 1 << n
    out = np.empty(total)
    pos = np.empty(n + 1)
    neg = np.empty(n + 1)
    for mask in range(total):
        pos[0] = 1.0
        neg[0] = 1.0
        a = 0
        b = 0
        for i in range(n):
            e = etas[i]
            if (mask >> (n - 1 - i)) & 1:
                pos[a + 1] = pos[a] * e
                for j in range(a, 0, -1):
                    pos[j] = pos[j - 1] * e + pos[j] * (1.0 - e)
                pos[0] *= 1.0 - e
                a += 1
            else:
                neg[b + 1] = neg[b] * e
                for j in range(b, 0, -1):
                    neg[j] = neg[j - 1] * e + neg[j] * (1.0 - e)
                neg[0] *= 1.0 - e
                b += 1
        acc = 0.0
        for ia in range(a + 1):
            inner = 0.0
            for ib in range(b + 1):
                inner += phi_pad[a, ia, ib] * neg[ib]
            acc += pos[ia] * inner
        out[mask] = acc
    return out


def _subset_utilities(metric: MetricSpec, etas: np.ndarray) -> np.ndarray:
    """Expected utility of every prediction vector, indexed by bitmask.

    Bit n-1-i of the mask carries s_i, so ascending mask order is
    lexicographic order of the prediction vectors.
    """
    n = etas.size
    phi_pad = np.zeros((n + 1, n + 1, n + 1))
    for k in range(n + 1):
        phi_pad[k, : k + 1, : n - k + 1] = _phi_block(metric, n, k)
    return _subset_utilities_kernel(etas, phi_pad)


def _mask_to_vector(mask: int, n: int) -> np.ndarray:
    return np.array([(mask >> (n - 1 - i)) & 1 for i in range(n)], dtype=np.int64)


def brute_force(metric: MetricSpec, etas) -> Prediction:
    """Exact optimum over all 2^n prediction vectors.

    Ties resolve to the lexicographically smallest prediction vector.  The
    reported curve still describes cutoff predictions in sorted order.
    """
    etas = _check_probs(etas)
    n = etas.size
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"n={n} too large for brute force (max {BRUTE_FORCE_MAX_N})")
    utilities = _subset_utilities(metric, etas)
    best_mask = int(np.argmax(utilities) if metric.maximize else np.argmin(utilities))
    s_star = _mask_to_vector(best_mask, n)

    sorted_etas = SortedEtas.from_probabilities(etas)
    curve = np.array(
        [expected_utility_topk(metric, sorted_etas, k) for k in range(n + 1)]
    )
    return Prediction(
        k_star=int(s_star.sum()),
        s_star=s_star,
        utility=float(utilities[best_mask]),
        utility_curve=curve,
    )


def verify_prp(metric: MetricSpec, etas) -> PrpResult:
    """Check the probability ranking property by exhaustive search.

    Holds when at least one utility-optimal prediction (ties at 1e-9)
    puts every predicted positive at a probability no smaller than every
    predicted negative.  Otherwise the lexicographically smallest optimum
    is returned as the violating witness.
    """
    etas = _check_probs(etas)
    n = etas.size
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"n={n} too large for brute force (max {BRUTE_FORCE_MAX_N})")
    utilities = _subset_utilities(metric, etas)
    best = utilities.max() if metric.maximize else utilities.min()
    tied = np.nonzero(np.abs(utilities - best) <= UTILITY_TOL)[0]
    for mask in tied:
        sel = _mask_to_vector(int(mask), n).astype(bool)
        lowest_in = etas[sel].min() if sel.any() else np.inf
        highest_out = etas[~sel].max() if (~sel).any() else -np.inf
        if lowest_in >= highest_out:
            return PrpResult(holds=True)
    return PrpResult(holds=False, witness=_mask_to_vector(int(tied[0]), n))
