"""Tests for the batch runner."""

import json

import pytest

from hexch.cli import CapError, ConfigError, main, run_experiment


def minimal_config(**overrides):
    cfg = {
        "scenario": "uniform-leaf",
        "r": 1,
        "m": 4,
        "seed": 99,
        "tests": [{"name": "hexch", "n_reps": 20, "n_resamples": 99}],
    }
    cfg.update(overrides)
    return cfg


def test_minimal_run_emits_four_files(tmp_path):
    code, files = run_experiment(minimal_config(), tmp_path / "out")
    assert code == 0
    assert set(files) == {"array.csv", "reports.jsonl", "summary.csv", "manifest.json"}
    for name in files:
        assert (tmp_path / "out" / name).exists()


def test_run_twice_is_byte_identical(tmp_path):
    run_experiment(minimal_config(), tmp_path / "a")
    run_experiment(minimal_config(), tmp_path / "b")
    for name in ("array.csv", "reports.jsonl", "summary.csv", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_threads_do_not_affect_results(tmp_path):
    cfg = minimal_config(
        tests=[
            {"name": "hexch", "n_reps": 20, "n_resamples": 99},
            {"name": "conditional_iid"},
        ],
        r=2,
    )
    run_experiment(cfg, tmp_path / "t1", threads=1)
    run_experiment(cfg, tmp_path / "t4", threads=4)
    for name in ("array.csv", "reports.jsonl", "summary.csv"):
        assert (tmp_path / "t1" / name).read_bytes() == (tmp_path / "t4" / name).read_bytes()


def test_summary_has_one_row_per_test(tmp_path):
    cfg = minimal_config(
        r=2,
        tests=[
            {"name": "hexch", "n_reps": 20, "n_resamples": 99},
            {"name": "conditional_iid"},
            {"name": "cond_indep"},
        ],
    )
    code, _ = run_experiment(cfg, tmp_path / "out")
    lines = (tmp_path / "out" / "summary.csv").read_text().strip().splitlines()
    assert len(lines) == 1 + 3


def test_manifest_references_all_files_with_checksums(tmp_path):
    import hashlib

    code, _ = run_experiment(minimal_config(), tmp_path / "out")
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    for name, meta in manifest["files"].items():
        if name == "manifest.json":
            continue
        digest = hashlib.sha256((tmp_path / "out" / name).read_bytes()).hexdigest()
        assert meta["sha256"] == digest


def test_hierarchy_and_resynthesis_outputs(tmp_path):
    cfg = minimal_config(
        scenario="product", r=2, m=4, extract=True, resynthesize_m=3, tests=[]
    )
    code, files = run_experiment(cfg, tmp_path / "out")
    assert code == 0
    assert "hierarchy.json" in files and "resynthesized.csv" in files
    h = json.loads((tmp_path / "out" / "hierarchy.json").read_text())
    assert h["r"] == 2 and "0" in h["measures"]
    lines = (tmp_path / "out" / "resynthesized.csv").read_text().strip().splitlines()
    assert len(lines) == 1 + 9


def test_field_scenario_pipeline(tmp_path):
    cfg = {
        "scenario": "depth-shift",
        "r": 2,
        "m": 16,
        "seed": 5,
        "tests": [{"name": "level_homogeneity"}],
    }
    code, files = run_experiment(cfg, tmp_path / "out")
    assert code == 0  # depth-shift is expected to be rejected, and it is
    assert "field_values.csv" in files


def test_verdict_mismatch_exits_one(tmp_path):
    # a label-leak scenario with the leak turned off cannot be rejected, so
    # its expected verdict fails
    cfg = minimal_config(
        scenario="label-leak",
        r=2,
        m=4,
        params={"weight": 0.0},
        tests=[{"name": "hexch", "n_reps": 20, "n_resamples": 99}],
    )
    code, _ = run_experiment(cfg, tmp_path / "out")
    assert code == 1


def test_array_to_csv_formats():
    import numpy as np

    from hexch.cli import array_to_csv
    from hexch.fields import SigmaModel, sample_multi

    model = SigmaModel("mix", 4, lambda p: p.mean(axis=1))
    x = sample_multi(model, (1, 1), (2, 2), seed=5)
    text = array_to_csv(x, (1, 1), (2, 2))
    lines = text.strip().splitlines()
    assert lines[0] == "vertex_1,vertex_2,value"
    assert len(lines) == 1 + 4
    assert lines[1].startswith("1/1,1/1,")
    # replica form carries the column index
    ah = array_to_csv(np.zeros((2, 3)), 1, 2, n=3)
    rows = ah.strip().splitlines()
    assert rows[0] == "vertex,i,value"
    assert rows[1].startswith("1/1,1,")


def test_config_errors():
    with pytest.raises(ConfigError):
        run_experiment({"scenario": "uniform-leaf"}, "unused")
    with pytest.raises(ConfigError):
        run_experiment(minimal_config(scenario="nope"), "unused")
    with pytest.raises(ConfigError):
        run_experiment(minimal_config(tests=[{"name": "bogus"}]), "unused")
    with pytest.raises(ConfigError):
        run_experiment(minimal_config(tests=[{"name": "cond_indep"}]), "unused")


def test_cap_exceeded(tmp_path, monkeypatch):
    monkeypatch.setenv("HEXCH_MAX_CELLS", "100")
    with pytest.raises(CapError):
        run_experiment(minimal_config(r=4, m=4), tmp_path / "out")


def test_cli_run_exit_codes(tmp_path, monkeypatch, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(minimal_config()))
    assert main(["run", str(cfg_path), "--out", str(tmp_path / "o")]) == 0

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", str(bad)]) == 2

    assert main(["run", str(tmp_path / "missing.json")]) == 2

    monkeypatch.setenv("HEXCH_MAX_CELLS", "2")
    assert main(["run", str(cfg_path), "--out", str(tmp_path / "o2")]) == 3


def test_cli_verify_unknown_suite():
    assert main(["verify", "bogus"]) == 2


def test_cli_verify_fast_passes_quickly(capsys):
    import time

    t0 = time.time()
    assert main(["verify", "fast"]) == 0
    assert time.time() - t0 < 120.0
    out = capsys.readouterr().out
    assert out.count("PASS") >= 5


def test_cli_list_scenarios(capsys):
    assert main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    assert "uniform-leaf" in out and "depth-shift" in out
