import json

import numpy as np
import pytest

from prediagnose import config as cfgmod
from prediagnose.cli import main
from prediagnose.core import FormatError


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestConfigFiles:
    def test_defaults_without_file(self):
        clot = cfgmod.load_clot_config(None)
        assert clot.svm_c == 10.0 and clot.window == 5
        cardio = cfgmod.load_cardio_config(None)
        assert cardio.mfcc.n_coeffs == 13 and cardio.task == "lung"

    def test_overrides(self, tmp_path):
        path = tmp_path / "cfg.ini"
        path.write_text(
            "[imageproc]\ncanny_sigma = 2.0\nhog_view = edge\n"
            "[ml]\nsvm_c = 3.5\nwindow = 7\n"
            "[pipeline]\ntask = heart\n"
        )
        clot = cfgmod.load_clot_config(path)
        assert clot.canny_sigma == 2.0 and clot.svm_c == 3.5
        assert clot.window == 7 and clot.hog_view == "edge"
        cardio = cfgmod.load_cardio_config(path)
        assert cardio.task == "heart"

    def test_unknown_section_rejected(self, tmp_path):
        path = tmp_path / "cfg.ini"
        path.write_text("[teleport]\nspeed = 9\n")
        with pytest.raises(FormatError, match="unknown config section"):
            cfgmod.load_clot_config(path)

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "cfg.ini"
        path.write_text("[ml]\nlearning_rate = 0.1\n")
        with pytest.raises(FormatError, match="unknown config key"):
            cfgmod.load_clot_config(path)

    def test_bad_value_rejected(self, tmp_path):
        path = tmp_path / "cfg.ini"
        path.write_text("[ml]\nsvm_c = fast\n")
        with pytest.raises(FormatError, match="bad value"):
            cfgmod.load_clot_config(path)

    def test_snapshot_round_trip(self):
        cfg = cfgmod.load_clot_config(None)
        snap = cfgmod.clot_config_snapshot(cfg)
        assert cfgmod.clot_config_from_snapshot(snap) == cfg
        ccfg = cfgmod.load_cardio_config(None)
        assert cfgmod.cardio_config_from_snapshot(cfgmod.cardio_config_snapshot(ccfg)) == ccfg


class TestExitCodes:
    def test_usage_error_is_1(self, capsys):
        code, _, err = run(capsys, "train", "warp", "--data", "x", "--out", "y")
        assert code == 1
        assert "usage error" in err

    def test_missing_data_is_2(self, capsys, tmp_path):
        code, _, err = run(
            capsys, "train", "clot", "--data", str(tmp_path / "nope"), "--out",
            str(tmp_path / "m.pdmodel.json"),
        )
        assert code == 2
        assert "data error" in err

    def test_single_class_training_is_3(self, capsys, tmp_path):
        data = tmp_path / "data"
        code, _, _ = run(
            capsys, "synth", "thermal", "--out", str(data), "--n", "4",
            "--positive-frac", "0", "--seed", "1",
        )
        assert code == 0
        code, _, err = run(
            capsys, "train", "clot", "--data", str(data), "--out",
            str(tmp_path / "m.pdmodel.json"),
        )
        assert code == 3
        assert "training error" in err


@pytest.fixture(scope="module")
def thermal_ws(tmp_path_factory):
    base = tmp_path_factory.mktemp("thermal")
    assert main(["synth", "thermal", "--out", str(base / "train"), "--n", "16",
                 "--seed", "100"]) == 0
    assert main(["synth", "thermal", "--out", str(base / "test"), "--n", "8",
                 "--seed", "200"]) == 0
    assert main(["synth", "thermal", "--out", str(base / "seq"), "--n", "1",
                 "--positive-frac", "1", "--seed", "300", "--frames", "5"]) == 0
    return base


@pytest.fixture(scope="module")
def cardio_ws(tmp_path_factory):
    base = tmp_path_factory.mktemp("cardio")
    assert main(["synth", "cardio", "--task", "heart", "--out", str(base / "train"),
                 "--n", "10", "--seed", "7", "--rate", "4000", "--duration", "2.0"]) == 0
    assert main(["synth", "cardio", "--task", "heart", "--out", str(base / "test"),
                 "--n", "6", "--seed", "8", "--rate", "4000", "--duration", "2.0"]) == 0
    return base


class TestThermalFlow:
    def test_train_predict_eval(self, thermal_ws, capsys):
        workspace = thermal_ws
        model = workspace / "clot.pdmodel.json"
        code, out, _ = run(capsys, "train", "clot", "--data", str(workspace / "train"),
                           "--out", str(model))
        assert code == 0
        doc = json.loads(out)
        assert doc["pipeline"] == "clot" and doc["n_train"] == 16

        sample = next((workspace / "test").glob("*.pgm"))
        code, out, _ = run(capsys, "predict", "clot", "--model", str(model),
                           "--input", str(sample))
        assert code == 0
        pred = json.loads(out)
        assert pred["label"] in (0, 1) and "score" in pred and "latency_ms" in pred

        code, out, err = run(capsys, "eval", "--model", str(model),
                             "--data", str(workspace / "test"),
                             "--roc-csv", str(workspace / "roc.csv"))
        assert code == 0
        report = json.loads(out)
        assert report["pipeline"] == "clot"
        assert set(report["confusion"]) == {"tp", "fp", "fn", "tn"}
        assert "Accuracy" in err  # human table goes to stderr
        assert (workspace / "roc.csv").read_text().startswith("fpr,tpr")

    def test_predict_deterministic_modulo_latency(self, thermal_ws, capsys):
        workspace = thermal_ws
        model = workspace / "clot.pdmodel.json"
        if not model.exists():
            run(capsys, "train", "clot", "--data", str(workspace / "train"),
                "--out", str(model))
            capsys.readouterr()
        sample = next((workspace / "test").glob("*.pgm"))
        outs = []
        for _ in range(2):
            _, out, _ = run(capsys, "predict", "clot", "--model", str(model),
                            "--input", str(sample))
            doc = json.loads(out)
            doc.pop("latency_ms")
            outs.append(doc)
        assert outs[0] == outs[1]

    def test_sequence_prediction(self, thermal_ws, capsys):
        workspace = thermal_ws
        model = workspace / "clot.pdmodel.json"
        if not model.exists():
            run(capsys, "train", "clot", "--data", str(workspace / "train"),
                "--out", str(model))
            capsys.readouterr()
        code, out, _ = run(capsys, "predict", "clot", "--model", str(model),
                           "--sequence", str(workspace / "seq" / "seq0000"))
        assert code == 0
        doc = json.loads(out)
        assert doc["n_frames"] == 5 and doc["label"] in (0, 1)

    def test_model_pipeline_mismatch_is_2(self, thermal_ws, capsys):
        workspace = thermal_ws
        model = workspace / "clot.pdmodel.json"
        sample = next((workspace / "test").glob("*.pgm"))
        code, _, err = run(capsys, "predict", "skin", "--model", str(model),
                           "--input", str(sample))
        assert code == 2
        assert "clot pipeline" in err


class TestCardioFlow:
    def test_train_predict_eval_kfold(self, cardio_ws, capsys):
        workspace = cardio_ws
        cfg = workspace / "cfg.ini"
        cfg.write_text("[ml]\nn_trees = 20\n[pipeline]\ntask = heart\n")
        model = workspace / "cardio.pdmodel.json"
        code, out, _ = run(capsys, "train", "cardio", "--data", str(workspace / "train"),
                           "--config", str(cfg), "--out", str(model))
        assert code == 0
        assert json.loads(out)["pipeline"] == "cardio"

        sample = next((workspace / "test").glob("*.wav"))
        code, out, _ = run(capsys, "predict", "cardio", "--model", str(model),
                           "--input", str(sample))
        assert code == 0
        doc = json.loads(out)
        assert 0.0 <= doc["prob"] <= 1.0

        code, out, _ = run(capsys, "eval", "--model", str(model),
                           "--data", str(workspace / "train"), "--kfold", "2", "--seed", "5")
        assert code == 0
        report = json.loads(out)
        assert report["confusion"]["tp"] + report["confusion"]["fn"] == 5


class TestReport:
    def test_concatenates_modules(self, tmp_path, capsys):
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        a.write_text('{"pipeline": "clot", "accuracy": 0.9}')
        b.write_text('{"pipeline": "cardio", "accuracy": 0.8}')
        out_path = tmp_path / "combined.json"
        code, out, _ = run(capsys, "report", "--inputs", str(a), str(b),
                           "--out", str(out_path))
        assert code == 0
        doc = json.loads(out_path.read_text())
        assert doc["report_version"] == 1
        assert [m["pipeline"] for m in doc["modules"]] == ["clot", "cardio"]

    def test_bad_input_is_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{nope")
        code, _, err = run(capsys, "report", "--inputs", str(bad),
                           "--out", str(tmp_path / "o.json"))
        assert code == 2
        assert "data error" in err
