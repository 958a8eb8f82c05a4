"""Experiment orchestration shared by the command-line interface and tests.

Three experiment families:

* a synthetic ranking-property check (Gaussian features, sigmoid
  probabilities, exhaustive search over all prediction vectors),
* train/test comparisons of the expected-utility optimizer against the
  fixed-0.5 and tuned plugin-threshold classifiers, macro-averaged over
  one-vs-rest tasks,
* wall-clock scaling of the two optimizers over a list of test-set sizes.

Everything is deterministic given the seed; per-task work may fan out
over a thread pool capped by the DTA_OPT_THREADS environment variable.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import expit

from .data import Dataset, macro_average, make_tasks, split
from .logistic import predict_proba, train_logistic
from .metrics import MetricSpec, confusion_triple, fp_minus_tp_metric, phi_eval, registry_lookup
from .optimizer import brute_force, optimize_general, optimize_sfl, verify_prp
from .thresholding import classify_threshold, select_threshold

__all__ = [
    "ComparisonRow",
    "default_compare_metrics",
    "dta_predict",
    "max_workers",
    "resolve_metrics",
    "run_comparison",
    "run_prp_experiment",
    "run_scaling_benchmark",
]

SCHEMA_VERSION = 1


def max_workers() -> int:
    """Parallelism cap from DTA_OPT_THREADS (default: sequential)."""
    raw = os.environ.get("DTA_OPT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_tasks(fn, items):
    workers = max_workers()
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def resolve_metrics(names: Sequence[str], beta: float = 1.0) -> list[MetricSpec]:
    return [registry_lookup(name, beta=beta) for name in names]


def default_compare_metrics() -> list[tuple[MetricSpec, str]]:
    """Default comparison set with each metric's optimizer route."""
    return [
        (registry_lookup("F_beta", beta=1.0), "sfl"),
        (registry_lookup("Jaccard"), "sfl"),
        (registry_lookup("AM"), "general"),
        (registry_lookup("G-TPPR"), "general"),
    ]


def dta_predict(metric: MetricSpec, etas: np.ndarray, algorithm: str = "auto"):
    """Route a probability vector to the requested optimizer."""
    if algorithm == "auto":
        algorithm = "sfl" if metric.sfl_eligible else "general"
    if algorithm == "general":
        return optimize_general(metric, etas)
    if algorithm == "sfl":
        return optimize_sfl(metric, etas)
    if algorithm == "brute":
        return brute_force(metric, etas)
    raise ValueError(f"unknown algorithm {algorithm!r}")


# ---------------------------------------------------------------------------
# synthetic ranking-property experiment


def run_prp_experiment(
    metrics: Sequence[MetricSpec],
    n: int = 10,
    trials: int = 100,
    seed: int = 0,
    include_adversarial: bool = False,
) -> dict:
    """Sample sigmoid probabilities and exhaustively check the ranking rule.

    Per trial: features and the score vector are standard Gaussian, the
    positive-class probability is the sigmoid of the linear score, and
    the optimum over all 2^n predictions is compared against the cutoff
    optimizers.  Returns per-trial records (sorted probabilities plus the
    optimal prediction in sorted order) and per-metric pass counts.
    """
    metrics = list(metrics)
    if include_adversarial:
        metrics = metrics + [fp_minus_tp_metric()]
    rng = np.random.default_rng(seed)
    trial_inputs = []
    for t in range(trials):
        X = rng.standard_normal((n, 2))
        w = rng.standard_normal(2)
        trial_inputs.append((t, expit(X @ w)))

    def one_trial(item):
        t, etas = item
        order = np.argsort(-etas, kind="stable")
        records = []
        for metric in metrics:
            prp = verify_prp(metric, etas)
            exhaustive = brute_force(metric, etas)
            cubic = optimize_general(metric, etas)
            record = {
                "trial": t,
                "metric": metric.name,
                "n": n,
                "etas_sorted": [float(x) for x in etas[order]],
                "s_star_sorted": [int(x) for x in exhaustive.s_star[order]],
                "k_star": int(exhaustive.s_star.sum()),
                "prp_holds": bool(prp.holds),
                "utility_brute": exhaustive.utility,
                "utility_general": cubic.utility,
                "general_gap": abs(exhaustive.utility - cubic.utility),
            }
            if prp.witness is not None:
                record["witness"] = [int(x) for x in prp.witness]
            if metric.sfl_eligible:
                quadratic = optimize_sfl(metric, etas)
                record["utility_sfl"] = quadratic.utility
                record["sfl_gap"] = abs(quadratic.utility - cubic.utility)
            records.append(record)
        return records

    all_records = [r for batch in _map_tasks(one_trial, trial_inputs) for r in batch]
    summary = []
    for metric in metrics:
        rows = [r for r in all_records if r["metric"] == metric.name]
        summary.append(
            {
                "metric": metric.name,
                "trials": len(rows),
                "prp_passes": sum(r["prp_holds"] for r in rows),
                "max_general_gap": max(r["general_gap"] for r in rows),
                "max_sfl_gap": max((r.get("sfl_gap", 0.0) for r in rows), default=0.0),
            }
        )
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "verify-prp",
        "config": {
            "metrics": [m.name for m in metrics],
            "n": n,
            "trials": trials,
            "seed": seed,
            "adversarial": include_adversarial,
        },
        "trials": all_records,
        "summary": summary,
    }


# ---------------------------------------------------------------------------
# train/test comparison


@dataclass(frozen=True)
class ComparisonRow:
    dataset: str
    metric: str
    min_positives: int
    utility_dta: float
    utility_baseline: float
    utility_eum: float
    algorithm: str
    n_classes: int


def run_comparison(
    train: Dataset,
    test: Dataset,
    metrics: Optional[Sequence[tuple[MetricSpec, str]]] = None,
    min_positives: int = 1,
    lam: float = 1e-3,
    split_fraction: float = 0.5,
    seed: int = 0,
    max_iters: int = 500,
    tol: float = 1e-6,
    eum_delta_override: Optional[float] = None,
) -> list[ComparisonRow]:
    """Compare optimizer predictions against both threshold baselines.

    Per retained class: a logistic model fitted on the full training split
    drives the optimizer and the fixed-0.5 baseline; the tuned-threshold
    classifier refits on half the training data and selects its cutoff on
    the other half.  Utilities are the empirical metric against the true
    test labels, macro-averaged over classes.  Test labels are never seen
    before evaluation.
    """
    pairs = list(metrics) if metrics is not None else default_compare_metrics()
    tasks = make_tasks(train, test, min_positives)

    def run_task(task):
        model = train_logistic(task.train.features, task.train.labels, lam, max_iters, tol)
        eta_test = predict_proba(model, task.test.features)
        y_test = task.test.labels

        if eum_delta_override is None:
            est_part, val_part = split(task.train, split_fraction, seed)
            half_model = train_logistic(est_part.features, est_part.labels, lam, max_iters, tol)
            eta_val = predict_proba(half_model, val_part.features)
            eta_test_half = predict_proba(half_model, task.test.features)

        per_metric = {}
        for metric, algorithm in pairs:
            s_dta = dta_predict(metric, eta_test, algorithm).s_star
            s_base = classify_threshold(eta_test, 0.5)
            if eum_delta_override is None:
                plugin = select_threshold(metric, eta_val, val_part.labels)
                s_eum = classify_threshold(eta_test_half, plugin.delta)
            else:
                s_eum = classify_threshold(eta_test, eum_delta_override)
            per_metric[metric.name] = (
                phi_eval(metric, confusion_triple(s_dta, y_test)),
                phi_eval(metric, confusion_triple(s_base, y_test)),
                phi_eval(metric, confusion_triple(s_eum, y_test)),
            )
        return per_metric

    per_task = _map_tasks(run_task, tasks)
    dataset_name = train.name or "dataset"
    rows = []
    for metric, algorithm in pairs:
        dta_vals = [result[metric.name][0] for result in per_task]
        base_vals = [result[metric.name][1] for result in per_task]
        eum_vals = [result[metric.name][2] for result in per_task]
        rows.append(
            ComparisonRow(
                dataset=dataset_name,
                metric=metric.name,
                min_positives=min_positives,
                utility_dta=macro_average(dta_vals),
                utility_baseline=macro_average(base_vals),
                utility_eum=macro_average(eum_vals),
                algorithm=algorithm,
                n_classes=len(tasks),
            )
        )
    return rows


def comparison_report(rows: list[ComparisonRow], config: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "compare",
        "config": config,
        "rows": [asdict(row) for row in rows],
    }


# ---------------------------------------------------------------------------
# wall-clock scaling


def run_scaling_benchmark(
    metric: MetricSpec,
    ns: Sequence[int] = (100, 200, 400),
    seed: int = 0,
    repeats: int = 5,
) -> dict:
    """Time both optimizers on random probabilities for each test-set size.

    Each round times every (algorithm, size) pair once, interleaved, so
    slow drifts in machine load hit all sizes alike; the reported number
    is the per-pair median over ``repeats`` rounds.  Every pair is called
    once untimed first to keep JIT compilation and allocator warmup out
    of the measurements.
    """
    ns = sorted(ns)
    rng = np.random.default_rng(seed)
    inputs = {n: rng.random(n) for n in ns}
    algorithms: list[tuple[str, object]] = [("general", optimize_general)]
    if metric.sfl_eligible:
        algorithms.append(("sfl", optimize_sfl))

    rows = []
    for name, fn in algorithms:
        # one phase per algorithm: a sub-millisecond path measured right
        # after a multi-second one only times cache refills
        samples: dict[int, list[float]] = {n: [] for n in ns}
        for n in ns:
            fn(metric, inputs[n])  # warmup
        for _ in range(max(1, repeats)):
            for n in ns:
                start = time.perf_counter()
                fn(metric, inputs[n])
                samples[n].append(time.perf_counter() - start)
        prev = None
        for n in ns:
            seconds = float(np.median(samples[n]))
            rows.append(
                {
                    "algorithm": name,
                    "n": n,
                    "seconds": seconds,
                    "ratio_vs_prev": None if prev is None else seconds / prev,
                }
            )
            prev = seconds
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "bench",
        "config": {"metric": metric.name, "ns": list(ns), "seed": seed, "repeats": repeats},
        "rows": rows,
    }
