import json
import os

import numpy as np
import pytest
import yaml

from wtasnn.cli import METRICS_HEADER, main


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("synth")
    rc = main(["synth", "--out-dir", str(d), "--pixels", "4", "--steps", "5",
               "--train-per-class", "4", "--test-per-class", "2",
               "--period-us", "1000", "--seed", "1"])
    assert rc == 0
    return d


def _write_config(path, synth_dir, seed=0, **overrides):
    cfg = {
        "seed": seed,
        "epochs": 1,
        "topology": {"hidden": 2, "hidden_size": 2, "output_size": 2},
        "filters": {"count": 2, "duration": 5},
        "data": {
            "train_manifest": str(synth_dir / "train_manifest.txt"),
            "test_manifest": str(synth_dir / "test_manifest.txt"),
            "period_us": 1000,
            "crop_ms": 5,
            "width": 4,
            "height": 1,
            "encoding": "wta",
        },
    }
    cfg.update(overrides)
    path.write_text(yaml.safe_dump(cfg))
    return path


def test_synth_writes_dataset(synth_dir):
    assert (synth_dir / "train_manifest.txt").exists()
    assert (synth_dir / "test_manifest.txt").exists()
    meta = json.loads((synth_dir / "meta.json").read_text())
    assert meta["n_pixels"] == 4 and meta["T"] == 5


def test_train_eval_inspect_pipeline(synth_dir, tmp_path, capsys):
    cfg_path = _write_config(tmp_path / "cfg.yaml", synth_dir)
    out = tmp_path / "run"
    rc = main(["train", "--config", str(cfg_path), "--out-dir", str(out)])
    captured = capsys.readouterr().out
    assert rc == 0
    assert "resolved configuration" in captured
    assert '"gamma": 0.2' in captured  # defaults printed for provenance
    lines = (out / "metrics.csv").read_text().strip().split("\n")
    assert lines[0] == METRICS_HEADER
    final = lines[-1].split(",")
    assert final[0] == "0" and final[1] == "8"  # epoch, examples seen
    assert float(final[2]) < 0.0  # mean reward is a log-likelihood
    assert 0.0 <= float(final[3]) <= 1.0
    assert (out / "checkpoint.json").exists()

    rc = main(["eval", "--checkpoint", str(out / "checkpoint.json"),
               "--manifest", str(synth_dir / "test_manifest.txt")])
    captured = capsys.readouterr().out
    assert rc == 0
    assert "accuracy:" in captured

    rc = main(["inspect", "--checkpoint", str(out / "checkpoint.json")])
    captured = capsys.readouterr().out
    assert rc == 0
    assert "learnable parameters" in captured
    assert "epoch 1" in captured


def test_train_rejects_unknown_config_key(synth_dir, tmp_path):
    cfg_path = _write_config(tmp_path / "cfg.yaml", synth_dir, bogus_key=1)
    assert main(["train", "--config", str(cfg_path), "--out-dir",
                 str(tmp_path / "run")]) == 2


def test_train_missing_manifest_is_data_error(synth_dir, tmp_path):
    cfg_path = _write_config(tmp_path / "cfg.yaml", synth_dir)
    cfg = yaml.safe_load(cfg_path.read_text())
    cfg["data"]["train_manifest"] = str(tmp_path / "nope.txt")
    cfg_path.write_text(yaml.safe_dump(cfg))
    assert main(["train", "--config", str(cfg_path), "--out-dir",
                 str(tmp_path / "run")]) == 3


def test_data_root_env_var_resolves_relative_manifests(synth_dir, tmp_path, monkeypatch):
    cfg_path = _write_config(tmp_path / "cfg.yaml", synth_dir)
    cfg = yaml.safe_load(cfg_path.read_text())
    cfg["data"]["train_manifest"] = "train_manifest.txt"
    cfg["data"]["test_manifest"] = None
    cfg_path.write_text(yaml.safe_dump(cfg))
    monkeypatch.setenv("WTASNN_DATA_ROOT", str(synth_dir))
    assert main(["train", "--config", str(cfg_path), "--out-dir",
                 str(tmp_path / "run")]) == 0


def test_gradcheck_subcommand(capsys):
    rc = main(["gradcheck", "--networks", "5", "--samples", "500"])
    captured = capsys.readouterr().out
    assert rc == 0
    assert "PASS" in captured and "FAIL" not in captured


def test_eval_memorized_single_example(synth_dir, tmp_path):
    # overfitting a one-example manifest must reach accuracy 1.0 on it
    entries = (synth_dir / "train_manifest.txt").read_text().strip().split("\n")
    single = tmp_path / "single_manifest.txt"
    first = entries[0].rsplit(",", 1)
    single.write_text(f"{os.path.join(str(synth_dir), first[0])},{first[1]}\n")
    cfg_path = _write_config(tmp_path / "cfg.yaml", synth_dir, epochs=12,
                             learner={"eta": 0.3, "alpha": 0.0,
                                      "halve_lr": False})
    cfg = yaml.safe_load(cfg_path.read_text())
    cfg["data"]["train_manifest"] = str(single)
    cfg["data"]["test_manifest"] = None
    cfg_path.write_text(yaml.safe_dump(cfg))
    out = tmp_path / "run"
    assert main(["train", "--config", str(cfg_path), "--out-dir", str(out)]) == 0
    lines = (out / "metrics.csv").read_text().strip().split("\n")
    final_train_acc = float(lines[-1].split(",")[4])
    assert final_train_acc == 1.0
