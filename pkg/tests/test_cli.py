"""Command-line flows: exit codes, produced files, manifests, and reruns."""

import json
import subprocess
import sys

import numpy as np
import pytest

from faircf.cli import main
from faircf.data import read_ratings
from faircf.model import load_params


def run_ok(argv):
    assert main(argv) == 0


def read_manifest(directory):
    return json.loads((directory / "manifest.json").read_text(encoding="utf-8"))


def make_dataset(tmp_path, name="data", extra=()):
    out = tmp_path / name
    run_ok(["generate", "--scenario", "P+O", "--users", "20", "--items", "15",
            "--seed", "3", "--out", str(out), *extra])
    return out


def test_usage_errors_exit_2(tmp_path):
    with pytest.raises(SystemExit) as info:
        main([])                                    # subcommand required
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["generate", "--scenario", "Z", "--out", str(tmp_path)])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["train", "--seed", "abc"])            # type failure
    assert info.value.code == 2
    assert main(["generate", "--scenario", "U"]) == 2          # --out missing
    assert main(["generate", "--out", str(tmp_path)]) == 2     # neither source
    spec = tmp_path / "spec.json"
    spec.write_text("{}", encoding="utf-8")
    assert main(["generate", "--scenario", "U", "--spec", str(spec),
                 "--out", str(tmp_path)]) == 2                  # both sources


def test_data_errors_exit_1(tmp_path):
    assert main(["train", "--data", str(tmp_path / "nowhere"),
                 "--out", str(tmp_path / "model")]) == 1
    bad = tmp_path / "broken.json"
    bad.write_text("{not json", encoding="utf-8")
    assert main(["generate", "--scenario", "U", "--out", str(tmp_path / "x"),
                 "--config", str(bad)]) == 1


def test_generate_writes_dataset_and_manifest(tmp_path):
    out = make_dataset(tmp_path)
    for name in ("ratings.tsv", "groups.tsv", "expected.tsv", "manifest.json"):
        assert (out / name).is_file()
    doc = read_manifest(out)
    assert doc["tool"] == "faircf" and doc["command"] == "generate"
    assert doc["params"]["scenario"] == "P+O" and doc["params"]["seed"] == 3
    assert doc["outputs"] == ["expected.tsv", "groups.tsv", "ratings.tsv"]
    assert doc["dataset"]["num_users"] == 20
    assert doc["wall_clock_seconds"] >= 0.0
    ratings = read_ratings(out / "ratings.tsv")
    expected = read_ratings(out / "expected.tsv")
    assert len(ratings) + len(expected) == 20 * 15


def test_generate_from_spec_file(tmp_path):
    from faircf.synthetic import builtin_specs, spec_to_json
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(spec_to_json(builtin_specs(num_users=12, num_items=9,
                                                    seed=5)["P"]),
                         encoding="utf-8")
    out = tmp_path / "from-spec"
    run_ok(["generate", "--spec", str(spec_path), "--out", str(out)])
    assert read_manifest(out)["dataset"]["num_users"] == 12     # spec dims win
    override = tmp_path / "override"
    run_ok(["generate", "--spec", str(spec_path), "--users", "8",
            "--out", str(override)])
    assert read_manifest(override)["dataset"]["num_users"] == 8


def test_train_evaluate_flow(tmp_path):
    data = make_dataset(tmp_path)
    model_dir = tmp_path / "model"
    run_ok(["train", "--data", str(data), "--iterations", "40",
            "--penalty", "value", "--out", str(model_dir)])
    assert (model_dir / "model.txt").is_file()
    trace = (model_dir / "trace.csv").read_text(encoding="utf-8").splitlines()
    assert trace[0] == "iteration,objective,penalty" and len(trace) == 41
    params = load_params(model_dir / "model.txt")
    assert params.num_users == 20 and params.num_items == 15

    report_dir = tmp_path / "report"
    run_ok(["evaluate", "--model", str(model_dir / "model.txt"),
            "--data", str(data), "--out", str(report_dir)])
    lines = (report_dir / "report.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "error,value,absolute,under,over,nonparity"
    assert len([float(x) for x in lines[1].split(",")]) == 6


def test_experiment_flow(tmp_path):
    out = tmp_path / "exp"
    run_ok(["experiment", "--scenario", "synthetic_U", "--trials", "2",
            "--users", "20", "--items", "15", "--iterations", "25",
            "--penalties", "none,value", "--out", str(out)])
    for name in ("results.csv", "table.txt", "table.csv", "summary.json",
                 "manifest.json"):
        assert (out / name).is_file()
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["penalties"] == ["none", "value"] and summary["trials"] == 2
    rows = (out / "results.csv").read_text(encoding="utf-8").splitlines()
    assert len(rows) == 1 + 2 * 2 * 6


def test_prepare_movielens_flow(tmp_path, mini_ml_dir):
    out = tmp_path / "prep"
    run_ok(["prepare-movielens", "--ml-dir", str(mini_ml_dir),
            "--min-ratings", "2", "--out", str(out)])
    for name in ("ratings.tsv", "groups.tsv", "user_map.tsv", "movie_map.tsv",
                 "genre_stats.csv", "genre_stats.txt"):
        assert (out / name).is_file()
    doc = read_manifest(out)
    assert doc["dataset"]["num_users"] == 4 and doc["dataset"]["num_items"] == 4
    assert (out / "user_map.tsv").read_text(encoding="utf-8").splitlines()[0] == "0\t1"

    # the prepared directory feeds train directly, dims come from the manifest
    model_dir = tmp_path / "ml-model"
    run_ok(["train", "--data", str(out), "--iterations", "10",
            "--out", str(model_dir)])
    assert load_params(model_dir / "model.txt").num_items == 4


def test_rerun_reproduces_bytes(tmp_path):
    data = make_dataset(tmp_path)
    model_dir = tmp_path / "model"
    run_ok(["train", "--data", str(data), "--iterations", "30",
            "--out", str(model_dir)])
    before = {name: (model_dir / name).read_bytes()
              for name in ("model.txt", "trace.csv")}
    redo = tmp_path / "redo"
    run_ok(["rerun", str(model_dir / "manifest.json"), "--out", str(redo)])
    for name, blob in before.items():
        assert (redo / name).read_bytes() == blob
    # in-place rerun rewrites identical bytes too
    run_ok(["rerun", str(model_dir / "manifest.json")])
    for name, blob in before.items():
        assert (model_dir / name).read_bytes() == blob


def test_rerun_detects_changed_inputs(tmp_path):
    data = make_dataset(tmp_path)
    model_dir = tmp_path / "model"
    run_ok(["train", "--data", str(data), "--iterations", "10",
            "--out", str(model_dir)])
    with (data / "ratings.tsv").open("a", encoding="utf-8") as fh:
        fh.write("0\t1\t1.0\n")
    assert main(["rerun", str(model_dir / "manifest.json"),
                 "--out", str(tmp_path / "redo")]) == 1


def test_precedence_flag_over_config_over_env(tmp_path, monkeypatch):
    monkeypatch.setenv("FAIRCF_SEED", "5")
    env_only = tmp_path / "env"
    run_ok(["generate", "--scenario", "U", "--users", "10", "--items", "8",
            "--out", str(env_only)])
    assert read_manifest(env_only)["params"]["seed"] == 5

    config = tmp_path / "config.json"
    config.write_text('{"seed": 7}', encoding="utf-8")
    with_config = tmp_path / "cfg"
    run_ok(["generate", "--scenario", "U", "--users", "10", "--items", "8",
            "--config", str(config), "--out", str(with_config)])
    assert read_manifest(with_config)["params"]["seed"] == 7

    with_flag = tmp_path / "flag"
    run_ok(["generate", "--scenario", "U", "--users", "10", "--items", "8",
            "--config", str(config), "--seed", "9", "--out", str(with_flag)])
    assert read_manifest(with_flag)["params"]["seed"] == 9


def test_console_script_is_installed():
    proc = subprocess.run([sys.executable, "-m", "faircf.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "faircf" in proc.stdout


def test_jobs_flag_gives_identical_tables(tmp_path):
    serial = tmp_path / "serial"
    parallel = tmp_path / "parallel"
    args = ["experiment", "--scenario", "synthetic_U", "--trials", "2",
            "--users", "15", "--items", "12", "--iterations", "15",
            "--penalties", "none"]
    run_ok(args + ["--out", str(serial)])
    run_ok(args + ["--jobs", "2", "--out", str(parallel)])
    assert (serial / "table.csv").read_bytes() == (parallel / "table.csv").read_bytes()
    assert (serial / "results.csv").read_bytes() == (parallel / "results.csv").read_bytes()
