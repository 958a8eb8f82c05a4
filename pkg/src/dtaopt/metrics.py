"""Confusion-matrix metrics in the three-argument representation.

Every binary test-set metric here is expressed as a function
``phi(u, v, p)`` of three normalized confusion quantities:

* ``u``: true-positive rate over the whole set, ``(1/n) * sum(s_i * y_i)``
* ``v``: predicted-positive rate, ``(1/n) * sum(s_i)``
* ``p``: positive-label rate, ``(1/n) * sum(y_i)``

The remaining cells follow from identities ``fp = v - u``, ``fn = p - u``
and ``tn = 1 - v - p + u``.  Working in (u, v, p) is what makes the
expected-utility optimizers quadratic/cubic instead of exponential.

All ``phi`` callables are vectorized over numpy arrays, total on the whole
[0,1]^3 box (never NaN/inf), and apply the configured degenerate-point
conventions where a textbook ratio would be 0/0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "Orientation",
    "ConfusionTriple",
    "DegenerateRules",
    "FractionalLinearParams",
    "MetricSpec",
    "TpMonotonicity",
    "confusion_triple",
    "phi_eval",
    "registry_lookup",
    "registry_names",
    "check_tp_monotonic",
    "check_tpn_monotonic",
    "check_fl_regularity",
    "tp_plus_v_metric",
    "fp_minus_tp_metric",
    "precision_metric",
]

PhiFn = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


class Orientation(str, Enum):
    MAXIMIZE = "maximize"
    MINIMIZE = "minimize"


@dataclass(frozen=True)
class ConfusionTriple:
    """Normalized confusion summary (u, v, p) of a prediction/label pair."""

    u: float
    v: float
    p: float

    def __post_init__(self) -> None:
        for name in ("u", "v", "p"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name}={val} outside [0, 1]")
        if self.u > min(self.v, self.p) + 1e-12:
            raise ValueError(f"u={self.u} exceeds min(v, p)=({self.v}, {self.p})")
        if self.v - self.u > 1.0 - self.p + 1e-12:
            raise ValueError("false-positive rate exceeds negative-label rate")

    @property
    def fp(self) -> float:
        return self.v - self.u

    @property
    def fn(self) -> float:
        return self.p - self.u

    @property
    def tn(self) -> float:
        return 1.0 - self.v - self.p + self.u


@dataclass(frozen=True)
class DegenerateRules:
    """Values substituted where a metric's defining ratio is 0/0.

    The defaults treat an empty reference set as perfectly handled: recall
    over zero positives is 1, specificity over zero negatives is 1,
    precision over zero predictions is 1, and positive-ratio metrics score
    1 when predictions and labels are both all-negative.
    """

    tpr_when_p_zero: float = 1.0
    tnr_when_p_one: float = 1.0
    prec_when_v_zero: float = 1.0
    value_when_all_empty: float = 1.0

    def __post_init__(self) -> None:
        for name in (
            "tpr_when_p_zero",
            "tnr_when_p_one",
            "prec_when_v_zero",
            "value_when_all_empty",
        ):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name}={val} outside [0, 1]")


@dataclass(frozen=True)
class FractionalLinearParams:
    """Coefficients of a ratio of two affine functions of (u, v, p).

    The metric value is ``(c0 + c1*u + c2*v + c3*p) / (d0 + d1*u + d2*v
    + d3*p)``.  Denominator coefficients are exact rationals because the
    quadratic optimizer indexes an array by their integer numerators and
    denominators.
    """

    c0: float
    c1: float
    c2: float
    c3: float
    d0: Fraction
    d1: Fraction
    d2: Fraction
    d3: Fraction

    @classmethod
    def from_values(
        cls,
        c: Sequence[float],
        d: Sequence[Fraction | int | str],
    ) -> "FractionalLinearParams":
        if len(c) != 4 or len(d) != 4:
            raise ValueError("need four numerator and four denominator coefficients")
        return cls(*(float(x) for x in c), *(Fraction(x) for x in d))

    @property
    def sfl_eligible(self) -> bool:
        """True when the quadratic algorithm applies: c3 = 0 and c1 > d1."""
        return self.c3 == 0.0 and self.c1 > float(self.d1)

    def numerator(self, u, v, p):
        return self.c0 + self.c1 * u + self.c2 * v + self.c3 * p

    def denominator(self, u, v, p):
        return (
            float(self.d0)
            + float(self.d1) * u
            + float(self.d2) * v
            + float(self.d3) * p
        )


@dataclass(frozen=True)
class MetricSpec:
    """A named performance metric evaluated through ``phi(u, v, p)``.

    ``phi`` must accept broadcastable numpy arrays and return finite values
    everywhere on [0,1]^3; optimizers evaluate it on rectangular grids whose
    infeasible cells carry zero probability weight.
    """

    name: str
    phi: PhiFn
    orientation: Orientation = Orientation.MAXIMIZE
    conventions: DegenerateRules = field(default_factory=DegenerateRules)
    fl_params: Optional[FractionalLinearParams] = None

    @property
    def maximize(self) -> bool:
        return self.orientation is Orientation.MAXIMIZE

    @property
    def sfl_eligible(self) -> bool:
        return self.fl_params is not None and self.fl_params.sfl_eligible


def confusion_triple(s, y) -> ConfusionTriple:
    """Compute (u, v, p) from binary prediction and label vectors."""
    s = np.asarray(s)
    y = np.asarray(y)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError(f"shape mismatch: s{s.shape} vs y{y.shape}")
    n = s.shape[0]
    if n == 0:
        raise ValueError("empty vectors")
    for name, vec in (("s", s), ("y", y)):
        if not np.isin(vec, (0, 1)).all():
            raise ValueError(f"{name} contains non-binary entries")
    s = s.astype(np.float64)
    y = y.astype(np.float64)
    return ConfusionTriple(
        u=float(np.dot(s, y)) / n,
        v=float(s.sum()) / n,
        p=float(y.sum()) / n,
    )


def phi_eval(metric: MetricSpec, triple: ConfusionTriple) -> float:
    """Evaluate a metric at a confusion triple, conventions included."""
    return float(metric.phi(np.float64(triple.u), np.float64(triple.v), np.float64(triple.p)))


# ---------------------------------------------------------------------------
# vectorized building blocks


def _div(num, den, fill):
    """Elementwise num/den with `fill` wherever den == 0."""
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    bad = den == 0.0
    out = num / np.where(bad, 1.0, den)
    return np.where(bad, float(fill), out)


def _rates(u, v, p, rules: DegenerateRules):
    """(recall, specificity) with degenerate substitutions at p in {0, 1}."""
    tpr = _div(u, p, rules.tpr_when_p_zero)
    tn = 1.0 - v - p + u
    # the four-term sum leaves ~1e-15 residue when the true value is an
    # exact zero; square-root metrics amplify that, so snap it out (real
    # nonzero values are at least 1/n, far above the threshold)
    tn = np.where(np.abs(tn) < 1e-13, 0.0, tn)
    tnr = _div(tn, 1.0 - p, rules.tnr_when_p_one)
    return tpr, tnr


def _phi_am(rules: DegenerateRules) -> PhiFn:
    def phi(u, v, p):
        tpr, tnr = _rates(u, v, p, rules)
        return 0.5 * (tpr + tnr)

    return phi


def _phi_fbeta(beta: float, rules: DegenerateRules) -> PhiFn:
    b2 = beta * beta

    def phi(u, v, p):
        return _div((1.0 + b2) * np.asarray(u, dtype=np.float64), b2 * np.asarray(p) + np.asarray(v), rules.value_when_all_empty)

    return phi


def _phi_jaccard(rules: DegenerateRules) -> PhiFn:
    def phi(u, v, p):
        return _div(u, np.asarray(p) + np.asarray(v) - np.asarray(u), rules.value_when_all_empty)

    return phi


def _phi_gtppr(rules: DegenerateRules) -> PhiFn:
    def phi(u, v, p):
        u = np.asarray(u, dtype=np.float64)
        v = np.asarray(v, dtype=np.float64)
        p = np.asarray(p, dtype=np.float64)
        tpr = _div(u, p, rules.tpr_when_p_zero)
        prec = _div(u, v, rules.prec_when_v_zero)
        val = np.sqrt(np.maximum(tpr * prec, 0.0))
        empty = (v == 0.0) & (p == 0.0)
        return np.where(empty, rules.value_when_all_empty, val)

    return phi


def _phi_gmean(rules: DegenerateRules) -> PhiFn:
    def phi(u, v, p):
        tpr, tnr = _rates(u, v, p, rules)
        return np.sqrt(np.maximum(tpr * tnr, 0.0))

    return phi


def _phi_hmean(rules: DegenerateRules) -> PhiFn:
    def phi(u, v, p):
        tpr, tnr = _rates(u, v, p, rules)
        return _div(2.0 * tpr * tnr, tpr + tnr, 0.0)

    return phi


def _phi_qmean(rules: DegenerateRules) -> PhiFn:
    def phi(u, v, p):
        tpr, tnr = _rates(u, v, p, rules)
        return 1.0 - 0.5 * ((1.0 - tpr) ** 2 + (1.0 - tnr) ** 2)

    return phi


def _phi_sec(rules: DegenerateRules) -> PhiFn:
    def phi(u, v, p):
        d = np.asarray(p, dtype=np.float64) - np.asarray(v, dtype=np.float64)
        return d * d + 0.0 * np.asarray(u)

    return phi


# ---------------------------------------------------------------------------
# registry

_CANONICAL = {
    "am": "AM",
    "fbeta": "F_beta",
    "f_beta": "F_beta",
    "jaccard": "Jaccard",
    "gtppr": "G-TPPR",
    "g-tppr": "G-TPPR",
    "gtp/pr": "G-TPPR",
    "g-tp/pr": "G-TPPR",
    "gmean": "G-Mean",
    "g-mean": "G-Mean",
    "hmean": "H-Mean",
    "h-mean": "H-Mean",
    "qmean": "Q-Mean",
    "q-mean": "Q-Mean",
    "sec": "SEC",
}


def registry_names() -> list[str]:
    """Canonical metric names accepted by :func:`registry_lookup`."""
    return ["AM", "F_beta", "Jaccard", "G-TPPR", "G-Mean", "H-Mean", "Q-Mean", "SEC"]


def registry_lookup(
    name: str,
    beta: float = 1.0,
    conventions: Optional[DegenerateRules] = None,
) -> MetricSpec:
    """Build a fully configured metric by name.

    ``beta`` only affects ``F_beta`` and must be positive; its square must
    be exactly representable as a rational (floats always are) for the
    fractional-linear parameters.
    """
    rules = conventions or DegenerateRules()
    key = _CANONICAL.get(name.strip().lower().replace(" ", ""))
    if key is None:
        raise KeyError(f"unknown metric {name!r}; expected one of {registry_names()}")

    if key == "AM":
        return MetricSpec("AM", _phi_am(rules), Orientation.MAXIMIZE, rules)
    if key == "F_beta":
        if not beta > 0.0 or not math.isfinite(beta):
            raise ValueError(f"beta must be finite and positive, got {beta}")
        b2 = Fraction(beta) * Fraction(beta)
        fl = FractionalLinearParams.from_values(
            c=(0.0, 1.0 + float(b2), 0.0, 0.0), d=(0, 0, 1, b2)
        )
        label = "F_1" if beta == 1.0 else f"F_{beta:g}"
        return MetricSpec(label, _phi_fbeta(beta, rules), Orientation.MAXIMIZE, rules, fl)
    if key == "Jaccard":
        fl = FractionalLinearParams.from_values(c=(0.0, 1.0, 0.0, 0.0), d=(0, -1, 1, 1))
        return MetricSpec("Jaccard", _phi_jaccard(rules), Orientation.MAXIMIZE, rules, fl)
    if key == "G-TPPR":
        return MetricSpec("G-TPPR", _phi_gtppr(rules), Orientation.MAXIMIZE, rules)
    if key == "G-Mean":
        return MetricSpec("G-Mean", _phi_gmean(rules), Orientation.MAXIMIZE, rules)
    if key == "H-Mean":
        return MetricSpec("H-Mean", _phi_hmean(rules), Orientation.MAXIMIZE, rules)
    if key == "Q-Mean":
        return MetricSpec("Q-Mean", _phi_qmean(rules), Orientation.MAXIMIZE, rules)
    if key == "SEC":
        return MetricSpec("SEC", _phi_sec(rules), Orientation.MINIMIZE, rules)
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# non-registry fixtures


def tp_plus_v_metric() -> MetricSpec:
    """phi = u + v: strictly rising in captured positives at fixed v,
    yet not jointly monotone in (recall, specificity)."""
    return MetricSpec("tp-plus-v", lambda u, v, p: np.asarray(u, dtype=np.float64) + v)


def fp_minus_tp_metric() -> MetricSpec:
    """phi = v - 2u, i.e. false-positive rate minus true-positive rate.

    Rewards predicting positives on unlikely instances, so ranking by the
    positive-class probability is provably not optimal for it.  Used as an
    adversarial fixture for the ranking-property verifier.
    """
    return MetricSpec("fp-minus-tp", lambda u, v, p: np.asarray(v, dtype=np.float64) - 2.0 * np.asarray(u))


def precision_metric(conventions: Optional[DegenerateRules] = None) -> MetricSpec:
    """phi = u / v with the empty-prediction convention.

    Fractional-linear with a zero coefficient on p in the denominator,
    which exercises the quadratic optimizer's constant-suffix path.
    """
    rules = conventions or DegenerateRules()

    def phi(u, v, p):
        return _div(u, v, rules.prec_when_v_zero)

    fl = FractionalLinearParams.from_values(c=(0.0, 1.0, 0.0, 0.0), d=(0, 0, 1, 0))
    return MetricSpec("precision", phi, Orientation.MAXIMIZE, rules, fl)


# ---------------------------------------------------------------------------
# property checkers


@dataclass(frozen=True)
class TpMonotonicity:
    """Outcome of the first-argument monotonicity scan."""

    monotonic: bool
    tp_independent: bool

    def __bool__(self) -> bool:
        return self.monotonic


def _valid_u_counts(cv: int, cp: int, n: int) -> range:
    lo = max(0, cv + cp - n)
    hi = min(cv, cp)
    return range(lo, hi + 1)


def check_tp_monotonic(metric: MetricSpec, n: int) -> TpMonotonicity:
    """Scan the 1/n grid for strict growth of phi in u at fixed (v, p).

    Minimize-oriented metrics skip the growth scan (it is not meaningful
    for them) and only report whether phi ignores u entirely.
    """
    if not 1 <= n <= 200:
        raise ValueError("grid size n must be in 1..200")
    strictly_increasing = True
    independent = True
    for cv in range(n + 1):
        for cp in range(n + 1):
            counts = _valid_u_counts(cv, cp, n)
            if len(counts) < 2:
                continue
            us = np.arange(counts.start, counts.stop) / n
            vals = np.asarray(metric.phi(us, np.full_like(us, cv / n), np.full_like(us, cp / n)))
            diffs = np.diff(vals)
            if not (diffs > 0.0).all():
                strictly_increasing = False
            if np.abs(vals - vals[0]).max() > 1e-12:
                independent = False
            if not strictly_increasing and not independent and metric.maximize:
                return TpMonotonicity(False, False)
    if not metric.maximize:
        return TpMonotonicity(False, independent)
    return TpMonotonicity(strictly_increasing, independent)


def check_tpn_monotonic(metric: MetricSpec, n: int) -> bool:
    """Check joint monotonicity in (recall, specificity) at fixed p.

    With G(r_p, r_n, p) = phi(r_p*p, r_p*p + (1-r_n)(1-p), p), the property
    requires G to strictly increase whenever both rates strictly increase.
    The two rates move jointly; a metric may be flat along one axis at a
    boundary (e.g. a geometric mean at zero) and still qualify.  p = 0 and
    p = 1 are excluded because one of the rates is undefined there.
    """
    if not 2 <= n <= 200:
        raise ValueError("grid size n must be in 2..200")
    for cp in range(1, n):
        p = cp / n
        kp, kn = cp, n - cp
        r_p = (np.arange(kp + 1) / kp)[:, None]
        r_n = (np.arange(kn + 1) / kn)[None, :]
        u = r_p * p
        v = u + (1.0 - r_n) * (1.0 - p)
        grid = np.asarray(metric.phi(u, v, np.full_like(v, p)))
        if not _strict_quadrant_increase(grid):
            return False
    return True


def _strict_quadrant_increase(grid: np.ndarray) -> bool:
    """True iff every cell is < the min of its strict upper-right quadrant."""
    rows, cols = grid.shape
    quad_min = np.full(cols, np.inf)
    for i in range(rows - 2, -1, -1):
        row_below = grid[i + 1]
        suffix = np.minimum.accumulate(row_below[::-1])[::-1]
        # exclusive suffix minimum of the row below: min(grid[i+1, j+1:])
        row_min = np.full(cols, np.inf)
        row_min[:-1] = suffix[1:]
        quad_min = np.minimum(quad_min, row_min)
        if not (grid[i, :-1] < quad_min[:-1]).all():
            return False
    return True


def check_fl_regularity(params: FractionalLinearParams) -> bool:
    """First-argument growth condition for fractional-linear metrics."""
    return params.c1 > float(params.d1)
