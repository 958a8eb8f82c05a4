"""Command-line harness.

Subcommands: ``verify-prp`` (synthetic exhaustive ranking check),
``compare`` (optimizer vs threshold baselines on train/test files),
``bench`` (wall-clock scaling), ``train`` / ``predict`` (model files and
prediction files), and ``make-synth`` (materialize the bundled synthetic
corpus).  Reports are JSON or CSV; when written to a file, matplotlib
figures land next to the report unless ``--no-figures`` is given.
Failures exit non-zero with a JSON error record on stderr.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import harness, plots
from .data import Dataset, parse_csv, parse_svmlight, read_manifest, write_svmlight
from .logistic import load_model, predict_proba, save_model, train_logistic
from .metrics import registry_lookup
from .optimizer import BRUTE_FORCE_MAX_N
from .synth import generate_sigmoid_data
from .thresholding import classify_threshold

SCHEMA_VERSION = harness.SCHEMA_VERSION


def _fail(message: str, kind: str = "error") -> None:
    sys.stderr.write(json.dumps({"error": message, "kind": kind}) + "\n")
    sys.exit(1)


def _load_dataset(path: str, input_format: str, label_column, header: bool) -> Dataset:
    suffix = Path(path).suffix.lower()
    fmt = input_format
    if fmt == "auto":
        fmt = "csv" if suffix == ".csv" else "svmlight"
    if fmt == "csv":
        column = label_column if label_column is not None else -1
        if isinstance(column, str) and column.lstrip("-").isdigit():
            column = int(column)
        return parse_csv(path, label_column=column, header=header)
    return parse_svmlight(path)


def _flatten(record: dict) -> dict:
    out = {}
    for key, value in record.items():
        if isinstance(value, (list, tuple)):
            out[key] = " ".join(str(x) for x in value)
        else:
            out[key] = value
    return out


def _to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    flat = [_flatten(r) for r in rows]
    fields = list(flat[0].keys())
    for row in flat[1:]:
        for key in row:
            if key not in fields:
                fields.append(key)
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(flat)
    return buffer.getvalue()


def _emit(report: dict, fmt: str, output: str | None, rows_key: str,
          figures: bool, figure_fn=None, figure_tag: str = "figure") -> None:
    if fmt == "csv":
        text = _to_csv(report.get(rows_key, []))
    else:
        text = json.dumps(report, indent=2) + "\n"
    if output:
        out_path = Path(output)
        out_path.write_text(text)
        if figures and figure_fn is not None:
            fig_path = out_path.with_name(out_path.stem + f"_{figure_tag}.png")
            figure_fn(report, fig_path)
            click.echo(f"wrote {out_path} and {fig_path}")
        else:
            click.echo(f"wrote {out_path}")
    else:
        click.echo(text, nl=False)


format_option = click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
                             default="json", show_default=True)
output_option = click.option("--output", type=click.Path(dir_okay=False), default=None,
                             help="Write the report here instead of stdout.")
figures_option = click.option("--figures/--no-figures", default=True, show_default=True,
                              help="Render PNG figures next to --output.")
seed_option = click.option("--seed", type=int, default=0, show_default=True)


@click.group()
def main() -> None:
    """Expected-utility-optimal predictions for set-level metrics."""


@main.command("verify-prp")
@click.option("--metric", "metric_names", multiple=True,
              help="Registry metric, repeatable. Default: AM, F_beta, Jaccard, G-TPPR.")
@click.option("--beta", type=float, default=1.0, show_default=True)
@click.option("--n", type=int, default=10, show_default=True)
@click.option("--trials", type=int, default=100, show_default=True)
@click.option("--adversarial", is_flag=True,
              help="Also run an adversarial metric that violates the ranking rule.")
@seed_option
@format_option
@output_option
@figures_option
def cmd_verify_prp(metric_names, beta, n, trials, adversarial, seed, fmt, output, figures):
    """Exhaustively check that optimal predictions are probability-ranked."""
    try:
        if trials < 1:
            raise ValueError("trials must be >= 1")
        names = list(metric_names) or ["AM", "F_beta", "Jaccard", "G-TPPR"]
        metrics = harness.resolve_metrics(names, beta=beta)
        report = harness.run_prp_experiment(
            metrics, n=n, trials=trials, seed=seed, include_adversarial=adversarial
        )
        _emit(report, fmt, output, "trials", figures, plots.plot_prp_trials, "cutoffs")
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        _fail(str(exc), type(exc).__name__)


@main.command("compare")
@click.option("--train", "train_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--test", "test_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--manifest", type=click.Path(exists=True, dir_okay=False),
              help="key=value file with train=, test=, and optional format/label_column/header/name.")
@click.option("--metric", "metric_names", multiple=True,
              help="Registry metric, repeatable. Default: F_beta, Jaccard via the quadratic "
                   "path and AM, G-TPPR via the cubic one.")
@click.option("--beta", type=float, default=1.0, show_default=True)
@click.option("--algorithm", type=click.Choice(["auto", "general", "sfl", "brute"]),
              default="auto", show_default=True)
@click.option("--lambda", "lam", type=float, default=1e-3, show_default=True)
@click.option("--split-fraction", type=float, default=0.5, show_default=True)
@click.option("--min-positives", "-T", type=int, default=1, show_default=True)
@click.option("--input-format", type=click.Choice(["auto", "svmlight", "csv"]), default="auto")
@click.option("--label-column", default=None, help="CSV label column (index or name).")
@click.option("--header", is_flag=True, help="CSV input has a header row.")
@click.option("--force-eum-delta", type=float, default=None,
              help="Skip threshold tuning and use this fixed cutoff for the tuned column.")
@seed_option
@format_option
@output_option
@figures_option
def cmd_compare(train_path, test_path, manifest, metric_names, beta, algorithm, lam,
                split_fraction, min_positives, input_format, label_column, header,
                force_eum_delta, seed, fmt, output, figures):
    """Compare the optimizer against fixed and tuned threshold classifiers."""
    try:
        name = None
        if manifest:
            conf = read_manifest(manifest)
            base = Path(manifest).parent
            if not train_path and conf.get("train"):
                train_path = str(base / conf["train"])
            if not test_path and conf.get("test"):
                test_path = str(base / conf["test"])
            input_format = conf.get("format", input_format)
            label_column = conf.get("label_column", label_column)
            header = header or conf.get("header", "").lower() in ("1", "true", "yes")
            name = conf.get("name")
        if not train_path or not test_path:
            raise ValueError("need --train and --test files (or a --manifest naming them)")
        train = _load_dataset(train_path, input_format, label_column, header)
        test = _load_dataset(test_path, input_format, label_column, header)
        if name:
            train.name = name
        if metric_names:
            pairs = []
            for metric in harness.resolve_metrics(list(metric_names), beta=beta):
                route = algorithm
                if route == "auto":
                    route = "sfl" if metric.sfl_eligible else "general"
                pairs.append((metric, route))
        else:
            pairs = harness.default_compare_metrics()
        rows = harness.run_comparison(
            train, test, pairs, min_positives=min_positives, lam=lam,
            split_fraction=split_fraction, seed=seed, eum_delta_override=force_eum_delta,
        )
        config = {
            "train": str(train_path), "test": str(test_path),
            "metrics": [m.name for m, _ in pairs], "algorithm": algorithm,
            "lambda": lam, "split_fraction": split_fraction,
            "min_positives": min_positives, "seed": seed,
            "force_eum_delta": force_eum_delta,
        }
        report = harness.comparison_report(rows, config)
        _emit(report, fmt, output, "rows", figures, plots.plot_comparison, "comparison")
    except Exception as exc:  # noqa: BLE001
        _fail(str(exc), type(exc).__name__)


@main.command("bench")
@click.option("--metric", "metric_name", default="F_beta", show_default=True)
@click.option("--beta", type=float, default=1.0, show_default=True)
@click.option("--n", "ns", type=int, multiple=True,
              help="Test-set size, repeatable. Default: 100 200 400.")
@click.option("--repeats", type=int, default=3, show_default=True)
@seed_option
@format_option
@output_option
@figures_option
def cmd_bench(metric_name, beta, ns, repeats, seed, fmt, output, figures):
    """Measure wall-clock scaling of the optimizers."""
    try:
        metric = registry_lookup(metric_name, beta=beta)
        report = harness.run_scaling_benchmark(
            metric, ns=list(ns) or [100, 200, 400], seed=seed, repeats=repeats
        )
        _emit(report, fmt, output, "rows", figures, plots.plot_bench, "scaling")
    except Exception as exc:  # noqa: BLE001
        _fail(str(exc), type(exc).__name__)


@main.command("train")
@click.argument("train_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--model", "model_path", type=click.Path(dir_okay=False), required=True,
              help="Where to write the fitted model (JSON).")
@click.option("--lambda", "lam", type=float, default=1e-3, show_default=True)
@click.option("--max-iters", type=int, default=500, show_default=True)
@click.option("--tol", type=float, default=1e-6, show_default=True)
@click.option("--input-format", type=click.Choice(["auto", "svmlight", "csv"]), default="auto")
@click.option("--label-column", default=None)
@click.option("--header", is_flag=True)
def cmd_train(train_file, model_path, lam, max_iters, tol, input_format, label_column, header):
    """Fit the probability model on a binary-labelled dataset."""
    try:
        data = _load_dataset(train_file, input_format, label_column, header)
        if not set(np.unique(data.labels)) <= {0, 1}:
            raise ValueError("training labels must be binary; use compare for multiclass data")
        model = train_logistic(data.features, data.labels, lam, max_iters, tol)
        save_model(model, model_path)
        click.echo(json.dumps({
            "schema_version": SCHEMA_VERSION,
            "model": str(model_path),
            "iterations": model.iterations,
            "grad_norm": model.grad_norm,
        }))
    except Exception as exc:  # noqa: BLE001
        _fail(str(exc), type(exc).__name__)


@main.command("predict")
@click.argument("test_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--metric", "metric_name", default="F_beta", show_default=True)
@click.option("--beta", type=float, default=1.0, show_default=True)
@click.option("--algorithm", type=click.Choice(["auto", "general", "sfl", "brute", "fixed"]),
              default="auto", show_default=True)
@click.option("--delta", type=float, default=0.5, show_default=True,
              help="Cutoff for --algorithm fixed.")
@click.option("--input-format", type=click.Choice(["auto", "svmlight", "csv"]), default="auto")
@click.option("--label-column", default=None)
@click.option("--header", is_flag=True)
@format_option
@output_option
def cmd_predict(test_file, model_path, metric_name, beta, algorithm, delta,
                input_format, label_column, header, fmt, output):
    """Estimate probabilities and emit the optimal prediction vector."""
    try:
        model = load_model(model_path)
        data = _load_dataset(test_file, input_format, label_column, header)
        etas = predict_proba(model, data.features)
        metric = registry_lookup(metric_name, beta=beta)
        if algorithm == "brute" and etas.size > BRUTE_FORCE_MAX_N:
            raise ValueError(
                f"n={etas.size} too large for brute force (max {BRUTE_FORCE_MAX_N})"
            )
        if algorithm == "fixed":
            s = classify_threshold(etas, delta)
            k_star, utility = int(s.sum()), None
        else:
            prediction = harness.dta_predict(metric, etas, algorithm)
            s, k_star, utility = prediction.s_star, prediction.k_star, prediction.utility
        report = {
            "schema_version": SCHEMA_VERSION,
            "command": "predict",
            "config": {
                "model": str(model_path), "test": str(test_file),
                "metric": metric.name, "algorithm": algorithm, "delta": delta,
            },
            "k_star": k_star,
            "expected_utility": utility,
            "predictions": [
                {"index": i, "eta": float(e), "s": int(si)}
                for i, (e, si) in enumerate(zip(etas, s))
            ],
        }
        _emit(report, fmt, output, "predictions", figures=False)
    except Exception as exc:  # noqa: BLE001
        _fail(str(exc), type(exc).__name__)


@main.command("make-synth")
@click.option("--output-dir", type=click.Path(file_okay=False), required=True)
@click.option("--n-train", type=int, default=2000, show_default=True)
@click.option("--n-test", type=int, default=500, show_default=True)
@click.option("--d", type=int, default=5, show_default=True)
@click.option("--positive-rate", type=float, default=0.1, show_default=True)
@seed_option
def cmd_make_synth(output_dir, n_train, n_test, d, positive_rate, seed):
    """Write the bundled synthetic corpus as svmlight files plus a manifest."""
    try:
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        pair = generate_sigmoid_data(n_train, n_test, d=d, seed=seed,
                                     positive_rate=positive_rate)
        write_svmlight(pair.train, out / "train.svm")
        write_svmlight(pair.test, out / "test.svm")
        (out / "dataset.manifest").write_text(
            f"name=synthetic-{seed}\ntrain=train.svm\ntest=test.svm\nformat=svmlight\n"
        )
        click.echo(json.dumps({
            "schema_version": SCHEMA_VERSION,
            "train": str(out / "train.svm"),
            "test": str(out / "test.svm"),
            "manifest": str(out / "dataset.manifest"),
            "positives_train": int(pair.train.labels.sum()),
            "positives_test": int(pair.test.labels.sum()),
        }))
    except Exception as exc:  # noqa: BLE001
        _fail(str(exc), type(exc).__name__)


if __name__ == "__main__":
    main()
