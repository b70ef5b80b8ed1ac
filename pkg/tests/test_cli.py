import csv
import json

import numpy as np
import pytest

from tsdtrack.bench.dataset import load_sequence, parse_groundtruth
from tsdtrack.cli import ablation_rows, main
from tsdtrack.config import ConfigError, TrackerConfig, parse_config_text, resolve_config


def synth(root, name, seed, *extra):
    assert main(["synth", "--out", str(root), "--name", name, "--frames", "8",
                 "--seed", str(seed), "--velocity", "1,0.5", *extra]) == 0
    return root / name


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("data")
    synth(root, "s1", 1)
    synth(root, "s2", 2, "--occlude", "4:5")
    return root


def test_synth_track_evaluate(tmp_path, dataset, capsys):
    out = tmp_path / "run"
    assert main(["track", "--seq", str(dataset / "s1"), "--out", str(out), "--mode", "tsd"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "track" and manifest["config"]["mode"] == "tsd"
    reports = [json.loads(l) for l in (out / "s1.jsonl").read_text().splitlines()]
    assert [r["frame"] for r in reports] == list(range(2, 9))
    boxes = parse_groundtruth((out / "s1.txt").read_text())
    assert boxes.shape == (8, 4)
    capsys.readouterr()
    assert main(["evaluate", "--seq", str(dataset / "s1"), "--boxes", str(out / "s1.txt"),
                 "--out", str(tmp_path / "ev")]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["name"] == "s1" and summary["frames"] == 8
    assert (tmp_path / "ev" / "curves.csv").exists()


def test_track_baseline(tmp_path, dataset):
    out = tmp_path / "b"
    assert main(["track", "--seq", str(dataset / "s1"), "--out", str(out), "--mode", "baseline"]) == 0
    reports = [json.loads(l) for l in (out / "s1.jsonl").read_text().splitlines()]
    assert all(r["set_size"] == 1 and r["slot"] == 1 for r in reports)


def test_usage_errors(tmp_path, capsys):
    assert main(["track", "--seq", "x", "--bogus"]) == 2
    assert "usage" in capsys.readouterr().err
    assert main([]) == 2
    assert main(["track", "--seq", str(tmp_path / "missing")]) == 2
    assert main(["synth", "--occlude", "5:2"]) == 2
    assert main(["synth", "--out", str(tmp_path), "--target", "400x400"]) == 2


def test_empty_dataset(tmp_path):
    assert main(["bench", "--dataset", str(tmp_path), "--out", str(tmp_path / "r")]) == 2


def test_corrupt_sequence_isolated(tmp_path, dataset):
    import shutil

    root = tmp_path / "mixed"
    for name in ("s1", "s2"):
        shutil.copytree(dataset / name, root / name)
    shutil.copytree(dataset / "s1", root / "broken")
    (root / "broken" / "groundtruth.txt").write_text("1,2,3,4\n")
    out = tmp_path / "r"
    assert main(["bench", "--dataset", str(root), "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert [s["name"] for s in summary["sequences"]] == ["s1", "s2"]
    assert summary["errors"][0]["name"] == "broken"
    assert summary["aggregate"]["sequences"] == 2


def test_bench_lists_attributes(tmp_path, dataset):
    out = tmp_path / "r"
    assert main(["bench", "--dataset", str(dataset), "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["attributes"]["full_occlusion"]["sequences"] == 1


def test_ablate_table_and_consistency(tmp_path, dataset):
    out = tmp_path / "ab"
    assert main(["ablate", "--dataset", str(dataset), "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out / "ablation.csv")))
    assert [r["step"] for r in rows] == ["baseline", "+discard", "+fusion", "+response_reg"]
    assert rows[0]["rel_imp_precision"] == "-" and rows[0]["rel_imp_auc"] == "-"
    assert main(["bench", "--dataset", str(dataset), "--out", str(tmp_path / "full")]) == 0
    full = json.loads((tmp_path / "full" / "summary.json").read_text())
    last = json.loads((out / "response_reg" / "summary.json").read_text())
    assert full["aggregate"]["precision@20"] == last["aggregate"]["precision@20"]
    assert full["aggregate"]["auc"] == last["aggregate"]["auc"]


def test_ablation_rows_relative_improvement():
    class Agg:
        def __init__(self, p, a):
            self.precision_at_20, self.auc = p, a

    rows = ablation_rows([("a", Agg(0.5, 0.4)), ("b", Agg(0.6, 0.3))])
    assert rows[1]["rel_imp_precision"] == "0.2000" and rows[1]["rel_imp_auc"] == "-0.2500"


def test_synth_default_seed_deterministic(tmp_path):
    for d in ("a", "b"):
        assert main(["synth", "--out", str(tmp_path / d), "--frames", "3"]) == 0
    fa = sorted((tmp_path / "a" / "synth-0" / "img").iterdir())
    fb = sorted((tmp_path / "b" / "synth-0" / "img").iterdir())
    assert [p.read_bytes() for p in fa] == [p.read_bytes() for p in fb]
    assert len(load_sequence(tmp_path / "a" / "synth-0")) == 3


def test_config_precedence(tmp_path, dataset):
    path = tmp_path / "cfg.txt"
    path.write_text("# tuned\ngamma = 2.5\nnu=0.3\nfusion = false\n")
    cfg = resolve_config(path, {"gamma": "4"})
    assert cfg.gamma == 4.0 and cfg.nu == 0.3 and cfg.fusion is False
    assert cfg.q == TrackerConfig().q
    out = tmp_path / "r"
    assert main(["track", "--seq", str(dataset / "s1"), "--config", str(path),
                 "--set", "nu=0.5", "--no-discard", "--out", str(out)]) == 0
    snap = json.loads((out / "manifest.json").read_text())["config"]
    assert snap["gamma"] == 2.5 and snap["nu"] == 0.5 and snap["discard"] is False


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="unknown key 'v'"):
        parse_config_text("v = 0.2")
    with pytest.raises(ConfigError):
        parse_config_text("gamma 3")
    with pytest.raises(ConfigError):
        parse_config_text("fusion = maybe")
    with pytest.raises(ConfigError):
        TrackerConfig(scale_count=4)
    bad = tmp_path / "bad.txt"
    bad.write_text("F_max = 0\n")
    assert main(["bench", "--dataset", str(tmp_path), "--config", str(bad)]) == 2


def test_defaults_carry_published_values():
    cfg = TrackerConfig()
    assert (cfg.gamma, cfg.nu, cfg.f0, cfg.q, cfg.tr, cfg.F_max, cfg.mu_scale, cfg.lam) == \
        (3.02, 0.201, 10, 0.0408, 14.0, 50, 2.0, 0.01)


def test_manifest_precedes_results(tmp_path, dataset):
    out = tmp_path / "r"
    assert main(["bench", "--dataset", str(dataset), "--out", str(out)]) == 0
    manifest = out / "manifest.json"
    assert manifest.stat().st_mtime_ns <= (out / "summary.json").stat().st_mtime_ns
    assert json.loads(manifest.read_text())["inputs"] == [str(dataset)]
    assert np.isfinite(json.loads((out / "summary.json").read_text())["aggregate"]["fps"])
