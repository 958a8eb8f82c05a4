import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from dtaopt.cli import main
from dtaopt.data import parse_svmlight, write_svmlight
from dtaopt.synth import generate_sigmoid_data


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def corpus(tmp_path):
    pair = generate_sigmoid_data(n_train=150, n_test=80, d=3, seed=2, positive_rate=0.3)
    train, test = tmp_path / "train.svm", tmp_path / "test.svm"
    write_svmlight(pair.train, train)
    write_svmlight(pair.test, test)
    return train, test


class TestVerifyPrp:
    def test_json_report_with_figure(self, runner, tmp_path):
        out = tmp_path / "prp.json"
        result = runner.invoke(main, [
            "verify-prp", "--metric", "F_beta", "--metric", "AM",
            "--n", "6", "--trials", "3", "--seed", "1", "--output", str(out),
        ])
        assert result.exit_code == 0, result.output
        report = json.loads(out.read_text())
        assert report["schema_version"] == 1
        assert report["config"]["metrics"] == ["F_1", "AM"]
        assert all(s["prp_passes"] == 3 for s in report["summary"])
        assert (tmp_path / "prp_cutoffs.png").exists()

    def test_csv_to_stdout(self, runner):
        result = runner.invoke(main, [
            "verify-prp", "--metric", "Jaccard", "--n", "5", "--trials", "2",
            "--format", "csv",
        ])
        assert result.exit_code == 0
        header = result.output.splitlines()[0]
        assert "prp_holds" in header and "etas_sorted" in header

    def test_adversarial_flag(self, runner):
        result = runner.invoke(main, [
            "verify-prp", "--metric", "F_beta", "--n", "10", "--trials", "2",
            "--adversarial",
        ])
        assert result.exit_code == 0
        report = json.loads(result.output)
        adversarial = [s for s in report["summary"] if s["metric"] == "fp-minus-tp"]
        assert adversarial and adversarial[0]["prp_passes"] == 0

    def test_bad_trials_fail_with_error_record(self, runner):
        result = runner.invoke(main, ["verify-prp", "--trials", "0"])
        assert result.exit_code == 1
        record = json.loads(result.stderr.strip().splitlines()[-1])
        assert "trials" in record["error"]


class TestCompare:
    def test_compare_files(self, runner, corpus, tmp_path):
        train, test = corpus
        out = tmp_path / "cmp.json"
        result = runner.invoke(main, [
            "compare", "--train", str(train), "--test", str(test),
            "--metric", "F_beta", "--min-positives", "1", "--lambda", "0.01",
            "--output", str(out),
        ])
        assert result.exit_code == 0, result.output
        report = json.loads(out.read_text())
        assert report["config"]["min_positives"] == 1
        row = report["rows"][0]
        assert row["metric"] == "F_1"
        assert 0.0 <= row["utility_dta"] <= 1.0
        assert (tmp_path / "cmp_comparison.png").exists()

    def test_manifest_input_and_csv(self, runner, corpus, tmp_path):
        train, test = corpus
        manifest = tmp_path / "data.manifest"
        manifest.write_text(
            f"name=demo\ntrain={train.name}\ntest={test.name}\nformat=svmlight\n"
        )
        result = runner.invoke(main, [
            "compare", "--manifest", str(manifest), "--metric", "Jaccard",
            "--lambda", "0.01", "--format", "csv",
        ])
        assert result.exit_code == 0, result.output
        lines = result.output.strip().splitlines()
        assert lines[0].startswith("dataset,metric")
        assert lines[1].startswith("demo,Jaccard")

    def test_missing_file_error_record(self, runner, tmp_path):
        result = runner.invoke(main, [
            "compare", "--train", "--test",
        ])
        assert result.exit_code != 0

    def test_forced_delta_matches_baseline(self, runner, corpus):
        train, test = corpus
        result = runner.invoke(main, [
            "compare", "--train", str(train), "--test", str(test),
            "--metric", "F_beta", "--lambda", "0.01", "--force-eum-delta", "0.5",
        ])
        assert result.exit_code == 0
        row = json.loads(result.output)["rows"][0]
        assert row["utility_eum"] == pytest.approx(row["utility_baseline"], abs=1e-12)


class TestBench:
    def test_bench_report(self, runner, tmp_path):
        out = tmp_path / "bench.csv"
        result = runner.invoke(main, [
            "bench", "--metric", "F_beta", "--n", "16", "--n", "32",
            "--repeats", "1", "--format", "csv", "--output", str(out),
        ])
        assert result.exit_code == 0, result.output
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "algorithm,n,seconds,ratio_vs_prev"
        assert len(lines) == 5
        assert (tmp_path / "bench_scaling.png").exists()


class TestTrainPredict:
    def test_round_trip(self, runner, corpus, tmp_path):
        train, test = corpus
        model_path = tmp_path / "model.json"
        result = runner.invoke(main, [
            "train", str(train), "--model", str(model_path), "--lambda", "0.01",
        ])
        assert result.exit_code == 0, result.output
        summary = json.loads(result.output)
        assert Path(summary["model"]).exists()

        out1 = tmp_path / "pred1.json"
        out2 = tmp_path / "pred2.json"
        for out in (out1, out2):
            result = runner.invoke(main, [
                "predict", str(test), "--model", str(model_path),
                "--metric", "F_beta", "--output", str(out),
            ])
            assert result.exit_code == 0, result.output
        assert out1.read_text() == out2.read_text()
        report = json.loads(out1.read_text())
        assert report["k_star"] == sum(p["s"] for p in report["predictions"])

    def test_brute_guard(self, runner, corpus, tmp_path):
        train, test = corpus
        model_path = tmp_path / "model.json"
        runner.invoke(main, ["train", str(train), "--model", str(model_path)])
        result = runner.invoke(main, [
            "predict", str(test), "--model", str(model_path), "--algorithm", "brute",
        ])
        assert result.exit_code == 1
        record = json.loads(result.stderr.strip().splitlines()[-1])
        assert "too large for brute force" in record["error"]

    def test_sec_prediction_counts_expected_positives(self, runner, corpus, tmp_path):
        train, test = corpus
        model_path = tmp_path / "model.json"
        runner.invoke(main, ["train", str(train), "--model", str(model_path),
                             "--lambda", "0.01"])
        result = runner.invoke(main, [
            "predict", str(test), "--model", str(model_path), "--metric", "SEC",
            "--algorithm", "general",
        ])
        assert result.exit_code == 0, result.output
        report = json.loads(result.output)
        etas = np.array([p["eta"] for p in report["predictions"]])
        n = etas.size
        closed = np.sum(etas * (1 - etas)) / n**2 + (etas.mean() - np.arange(n + 1) / n) ** 2
        assert report["k_star"] == int(np.argmin(closed))

    def test_fixed_threshold_prediction(self, runner, corpus, tmp_path):
        train, test = corpus
        model_path = tmp_path / "model.json"
        runner.invoke(main, ["train", str(train), "--model", str(model_path)])
        result = runner.invoke(main, [
            "predict", str(test), "--model", str(model_path),
            "--algorithm", "fixed", "--delta", "0.0",
        ])
        assert result.exit_code == 0
        report = json.loads(result.output)
        assert all(p["s"] == 1 for p in report["predictions"])

    def test_multiclass_train_rejected(self, runner, tmp_path):
        path = tmp_path / "multi.svm"
        path.write_text("0 1:1.0\n1 1:2.0\n2 1:3.0\n")
        result = runner.invoke(main, [
            "train", str(path), "--model", str(tmp_path / "m.json"),
        ])
        assert result.exit_code == 1
        record = json.loads(result.stderr.strip().splitlines()[-1])
        assert "binary" in record["error"]


class TestMakeSynth:
    def test_writes_corpus_and_manifest(self, runner, tmp_path):
        out_dir = tmp_path / "corpus"
        result = runner.invoke(main, [
            "make-synth", "--output-dir", str(out_dir), "--n-train", "60",
            "--n-test", "30", "--seed", "3",
        ])
        assert result.exit_code == 0, result.output
        summary = json.loads(result.output)
        ds = parse_svmlight(summary["train"])
        assert ds.n == 60
        manifest = Path(summary["manifest"])
        assert manifest.exists()
        compare = runner.invoke(main, [
            "compare", "--manifest", str(manifest), "--metric", "F_beta",
            "--lambda", "0.1",
        ])
        assert compare.exit_code == 0, compare.output
