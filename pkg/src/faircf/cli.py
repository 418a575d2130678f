"""Command-line front end.

Commands: ``generate`` (synthetic datasets), ``train`` (one model),
``evaluate`` (score a saved model), ``experiment`` (multi-trial sweeps),
``prepare-movielens`` (archive filtering), and ``rerun`` (repeat a recorded
run from its manifest).

Every command writes a ``manifest.json`` into its output directory holding
the resolved parameters, input checksums, output names, tool version, and
wall-clock time; ``rerun`` replays it and reproduces the result files byte
for byte.  Parameter precedence: explicit flags > --config file > FAIRCF_*
environment variables > built-in defaults.  Exit codes: 0 success, 2 usage
error, 1 data/runtime error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import os

from . import __version__
from .data import read_groups, read_ratings, write_groups, write_ratings
from .experiments import (ExperimentPlan, SCENARIOS, evaluate, render, render_settings,
                          run_bias_settings_study, run_experiment, write_long_csv)
from .ingest import filter_dataset, genre_stats, parse, split
from .model import PENALTY_KINDS, TrainConfig, load_params, save_params
from .synthetic import builtin_specs, evaluation_set, generate, load_spec
from .trainer import train

ENV_PREFIX = "FAIRCF_"

GENERATE_SCENARIOS = {
    "U": "U", "O": "O", "P": "P", "P+O": "P+O",
    "synthetic_U": "U", "synthetic_O": "O", "synthetic_P": "P", "synthetic_PO": "P+O",
}

_TRAIN_PARAMS = {
    "dim": (int, 2, "latent dimension"),
    "reg": (float, 1e-3, "L2 weight on the factor matrices"),
    "iterations": (int, 250, "full-gradient update count"),
    "learning-rate": (float, 0.01, "Adam learning rate"),
    "beta1": (float, 0.9, "Adam first-moment decay"),
    "beta2": (float, 0.999, "Adam second-moment decay"),
    "epsilon": (float, 1e-8, "Adam denominator offset"),
    "penalty-weight": (float, 1.0, "scale on the fairness penalty"),
}

# name -> (type, default, required, help); None default means "unset".
_SCHEMAS = {
    "generate": {
        "scenario": (str, None, False, "builtin setting: " + ", ".join(sorted(set(GENERATE_SCENARIOS)))),
        "spec": (str, None, False, "JSON block-model spec file (instead of --scenario)"),
        "users": (int, None, False, "number of users (default 400, or the spec file's)"),
        "items": (int, None, False, "number of items (default 300, or the spec file's)"),
        "seed": (int, None, False, "root seed (default 0, or the spec file's)"),
        "out": (str, None, True, "output directory"),
    },
    "train": {
        "data": (str, None, True, "dataset directory with ratings.tsv and groups.tsv"),
        "out": (str, None, True, "output directory"),
        "penalty": (str, "none", False, "fairness penalty kind"),
        "seed": (int, 0, False, "initialization seed"),
        **{k: (t, d, False, h) for k, (t, d, h) in _TRAIN_PARAMS.items()},
    },
    "evaluate": {
        "model": (str, None, True, "saved model file"),
        "data": (str, None, True, "dataset directory with groups.tsv"),
        "targets": (str, None, False, "target rating file (default: <data>/expected.tsv)"),
        "out": (str, None, True, "output directory"),
    },
    "experiment": {
        "scenario": (str, None, True, "one of " + ", ".join(SCENARIOS) + ", fig1"),
        "trials": (int, None, False, "trial count (default 3 synthetic, 5 fig1/movielens)"),
        "penalties": (str, "none,value,absolute,under,over,nonparity", False,
                      "comma-separated penalty kinds"),
        "users": (int, 400, False, "synthetic user count"),
        "items": (int, 300, False, "synthetic item count"),
        "seed": (int, 0, False, "root seed"),
        "ml-dir": (str, None, False, "MovieLens-1M directory (movielens scenario)"),
        "test-fraction": (float, 0.2, False, "held-out fraction for movielens"),
        "jobs": (int, 1, False, "parallel trial workers"),
        "out": (str, None, True, "output directory"),
        **{k: (t, d, False, h) for k, (t, d, h) in _TRAIN_PARAMS.items()},
    },
    "prepare-movielens": {
        "ml-dir": (str, None, True, "MovieLens-1M directory (users/movies/ratings.dat)"),
        "out": (str, None, True, "output directory"),
        "genres": (str, "action,crime,musical,romance,sci-fi", False,
                   "comma-separated genre filter"),
        "min-ratings": (int, 50, False, "activity threshold on selected-genre ratings"),
    },
}

_CHOICES = {
    ("generate", "scenario"): sorted(set(GENERATE_SCENARIOS)),
    ("train", "penalty"): list(PENALTY_KINDS),
    ("experiment", "scenario"): list(SCENARIOS) + ["fig1"],
}


class UsageError(Exception):
    pass


def _checksum(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return "sha256:" + digest.hexdigest()


def _sha256_text(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()


def _resolve(command: str, cli_values: dict, config_path: str | None) -> dict:
    """Merge flags > config file > environment > defaults for one command."""
    schema = _SCHEMAS[command]
    file_values = {}
    if config_path:
        try:
            doc = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValueError(f"{config_path}: invalid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise ValueError(f"{config_path}: config must be a JSON object")
        file_values = doc
    params = {}
    for name, (typ, default, required, _) in schema.items():
        key = name.replace("-", "_")
        value = default
        env_name = ENV_PREFIX + key.upper()
        if env_name in os.environ:
            value = os.environ[env_name]
        if name in file_values or key in file_values:
            value = file_values.get(name, file_values.get(key))
        if cli_values.get(key) is not None:
            value = cli_values[key]
        if value is not None and not isinstance(value, typ):
            try:
                value = typ(value)
            except (TypeError, ValueError):
                raise UsageError(f"--{name}: expected {typ.__name__}, got {value!r}") from None
        if required and value is None:
            raise UsageError(f"--{name} is required for '{command}'")
        choices = _CHOICES.get((command, name))
        if choices and value is not None and value not in choices:
            raise UsageError(f"--{name}: invalid choice {value!r} (choose from {', '.join(choices)})")
        params[key] = value
    return params


def _write_manifest(out_dir: Path, command: str, params: dict, inputs: dict,
                    outputs: list, dataset: dict, seconds: float):
    doc = {
        "tool": "faircf",
        "version": __version__,
        "command": command,
        "params": params,
        "input_checksums": inputs,
        "outputs": sorted(outputs),
        "dataset": dataset,
        "wall_clock_seconds": seconds,
    }
    with (out_dir / "manifest.json").open("w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _train_config(params: dict, penalty: str, seed: int) -> TrainConfig:
    return TrainConfig(d=params["dim"], lambda_reg=params["reg"],
                       iterations=params["iterations"], learning_rate=params["learning_rate"],
                       adam_beta1=params["beta1"], adam_beta2=params["beta2"],
                       adam_epsilon=params["epsilon"], seed=seed, penalty=penalty,
                       penalty_weight=params["penalty_weight"])


def _dataset_dims(data_dir: Path):
    """Grid dimensions recorded by a previous generate/prepare run, if any."""
    manifest = data_dir / "manifest.json"
    if manifest.exists():
        try:
            doc = json.loads(manifest.read_text(encoding="utf-8"))
            ds = doc.get("dataset", {})
            if "num_users" in ds and "num_items" in ds:
                return int(ds["num_users"]), int(ds["num_items"])
        except (json.JSONDecodeError, TypeError, ValueError):
            pass
    return None, None


def _load_dataset(data_dir: Path):
    ratings_path = data_dir / "ratings.tsv"
    groups_path = data_dir / "groups.tsv"
    if not ratings_path.exists():
        raise FileNotFoundError(f"missing {ratings_path}")
    if not groups_path.exists():
        raise FileNotFoundError(f"missing {groups_path}")
    groups = read_groups(groups_path)
    num_users, num_items = _dataset_dims(data_dir)
    ratings = read_ratings(ratings_path, num_users=num_users or groups.num_users,
                           num_items=num_items)
    groups.check_against(ratings)
    return ratings, groups, {str(ratings_path): _checksum(ratings_path),
                             str(groups_path): _checksum(groups_path)}


def _cmd_generate(params: dict):
    if (params["scenario"] is None) == (params["spec"] is None):
        raise UsageError("generate needs exactly one of --scenario or --spec")
    inputs = {}
    if params["spec"]:
        spec = load_spec(params["spec"])
        inputs[params["spec"]] = _checksum(params["spec"])
        if params["seed"] is not None:
            spec = replace(spec, seed=params["seed"])
        if params["users"] is not None:
            spec = replace(spec, num_users=params["users"])
        if params["items"] is not None:
            spec = replace(spec, num_items=params["items"])
    else:
        setting = GENERATE_SCENARIOS[params["scenario"]]
        spec = builtin_specs(params["users"] if params["users"] is not None else 400,
                             params["items"] if params["items"] is not None else 300,
                             seed=params["seed"] if params["seed"] is not None else 0)[setting]
    ds = generate(spec)
    held_out = evaluation_set(ds)
    out = Path(params["out"])
    write_ratings(ds.observed, out / "ratings.tsv")
    write_groups(ds.groups, out / "groups.tsv")
    write_ratings(held_out, out / "expected.tsv")
    dataset = {
        "num_users": spec.num_users,
        "num_items": spec.num_items,
        "num_observed": len(ds.observed),
        "num_expected": len(held_out),
        "seed": spec.seed,
    }
    return inputs, ["ratings.tsv", "groups.tsv", "expected.tsv"], dataset


def _cmd_train(params: dict):
    data_dir = Path(params["data"])
    ratings, groups, inputs = _load_dataset(data_dir)
    config = _train_config(params, params["penalty"], params["seed"])
    model, trace = train(ratings, groups, config)
    out = Path(params["out"])
    save_params(model, out / "model.txt")
    trace.write_csv(out / "trace.csv")
    dataset = {"num_users": ratings.num_users, "num_items": ratings.num_items,
               "num_ratings": len(ratings)}
    return inputs, ["model.txt", "trace.csv"], dataset


def _cmd_evaluate(params: dict):
    model_path = Path(params["model"])
    data_dir = Path(params["data"])
    model = load_params(model_path)
    groups_path = data_dir / "groups.tsv"
    groups = read_groups(groups_path)
    targets_path = Path(params["targets"]) if params["targets"] else data_dir / "expected.tsv"
    if not targets_path.exists():
        raise FileNotFoundError(
            f"no target file: {targets_path} (pass --targets to point at one)")
    targets = read_ratings(targets_path, num_users=model.num_users, num_items=model.num_items)
    report = evaluate(model, targets, groups)
    out = Path(params["out"])
    (out / "report.csv").write_text(report.to_csv(), encoding="utf-8")
    inputs = {str(p): _checksum(p) for p in (model_path, groups_path, targets_path)}
    dataset = {"num_targets": len(targets)}
    return inputs, ["report.csv"], dataset


def _experiment_trials(params: dict) -> int:
    if params["trials"] is not None:
        return params["trials"]
    return 3 if params["scenario"].startswith("synthetic") else 5


def _cmd_experiment(params: dict):
    scenario = params["scenario"]
    trials = _experiment_trials(params)
    config = _train_config(params, "none", 0)
    inputs = {}
    if scenario == "movielens":
        ml_dir = params["ml_dir"]
        if not ml_dir:
            raise UsageError("--ml-dir is required for the movielens scenario")
        for name in ("users.dat", "movies.dat", "ratings.dat"):
            p = Path(ml_dir) / name
            if p.exists():
                inputs[str(p)] = _checksum(p)
    out = Path(params["out"])
    if scenario == "fig1":
        results = run_bias_settings_study(trials=trials, num_users=params["users"],
                                          num_items=params["items"], config=config,
                                          seed=params["seed"], jobs=params["jobs"])
        rows = []
        for setting in ("U", "O", "P", "P+O"):
            rows.extend(results[setting].long_rows())
        table = render_settings(results)
        csv_table = render_settings(results, fmt="csv")
        summary = {"settings": {name: res.summary_dict() for name, res in results.items()}}
        dataset = {"trials": trials, "settings": list(results)}
    else:
        penalties = tuple(p.strip() for p in params["penalties"].split(",") if p.strip())
        plan = ExperimentPlan(scenario=scenario, penalties=penalties, trials=trials,
                              config=config, seed=params["seed"], num_users=params["users"],
                              num_items=params["items"], ml_dir=params["ml_dir"],
                              test_fraction=params["test_fraction"], jobs=params["jobs"])
        result = run_experiment(plan)
        rows = result.long_rows()
        table = render(result)
        csv_table = render(result, fmt="csv")
        summary = result.summary_dict()
        dataset = {"trials": trials, "penalties": list(penalties)}
    write_long_csv(rows, out / "results.csv")
    (out / "table.txt").write_text(table, encoding="utf-8")
    (out / "table.csv").write_text(csv_table, encoding="utf-8")
    with (out / "summary.json").open("w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return inputs, ["results.csv", "table.txt", "table.csv", "summary.json"], dataset


def _cmd_prepare_movielens(params: dict):
    ml_dir = Path(params["ml_dir"])
    genres = tuple(g.strip() for g in params["genres"].split(",") if g.strip())
    raw = parse(ml_dir)
    data = filter_dataset(raw, genres=genres, min_ratings=params["min_ratings"])
    stats = genre_stats(data)
    out = Path(params["out"])
    write_ratings(data.ratings, out / "ratings.tsv")
    write_groups(data.groups, out / "groups.tsv")
    user_map = "".join(f"{i}\t{uid}\n" for i, uid in enumerate(data.user_ids.tolist()))
    movie_map = "".join(f"{j}\t{mid}\n" for j, mid in enumerate(data.movie_ids.tolist()))
    (out / "user_map.tsv").write_text(user_map, encoding="utf-8")
    (out / "movie_map.tsv").write_text(movie_map, encoding="utf-8")
    (out / "genre_stats.csv").write_text(stats.to_csv(), encoding="utf-8")
    (out / "genre_stats.txt").write_text(stats.render(), encoding="utf-8")
    inputs = {str(ml_dir / n): _checksum(ml_dir / n)
              for n in ("users.dat", "movies.dat", "ratings.dat")}
    dataset = {
        "num_users": data.ratings.num_users,
        "num_items": data.ratings.num_items,
        "num_ratings": len(data.ratings),
        "user_map_sha256": _sha256_text(user_map),
        "movie_map_sha256": _sha256_text(movie_map),
    }
    outputs = ["ratings.tsv", "groups.tsv", "user_map.tsv", "movie_map.tsv",
               "genre_stats.csv", "genre_stats.txt"]
    return inputs, outputs, dataset


_HANDLERS = {
    "generate": _cmd_generate,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "experiment": _cmd_experiment,
    "prepare-movielens": _cmd_prepare_movielens,
}


def _run_command(command: str, params: dict) -> int:
    out = Path(params["out"])
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    inputs, outputs, dataset = _HANDLERS[command](params)
    _write_manifest(out, command, params, inputs, outputs, dataset,
                    time.perf_counter() - start)
    return 0


def _cmd_rerun(manifest_path: str, out_override: str | None) -> int:
    path = Path(manifest_path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    command = doc.get("command")
    if command not in _HANDLERS:
        raise ValueError(f"{path}: manifest has no runnable command")
    params = dict(doc.get("params", {}))
    for input_path, recorded in doc.get("input_checksums", {}).items():
        if not Path(input_path).exists():
            raise FileNotFoundError(f"manifest input missing: {input_path}")
        actual = _checksum(input_path)
        if actual != recorded:
            raise ValueError(f"manifest input changed since the recorded run: {input_path}")
    if out_override:
        params["out"] = out_override
    return _run_command(command, params)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="faircf",
                                     description="fairness-aware collaborative filtering")
    parser.add_argument("--version", action="version", version=f"faircf {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for command, schema in _SCHEMAS.items():
        sp = sub.add_parser(command, help=f"{command} command")
        sp.add_argument("--config", default=None, help="JSON file with parameter overrides")
        for name, (typ, default, required, help_text) in schema.items():
            choices = _CHOICES.get((command, name))
            shown = "required" if required else f"default: {default}"
            sp.add_argument(f"--{name}", dest=name.replace("-", "_"), type=typ, default=None,
                            choices=choices, help=f"{help_text} ({shown})")
    rerun = sub.add_parser("rerun", help="repeat a recorded run from its manifest")
    rerun.add_argument("manifest", help="manifest.json written by a previous run")
    rerun.add_argument("--out", default=None, help="redirect outputs (default: recorded dir)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "rerun":
            return _cmd_rerun(args.manifest, args.out)
        cli_values = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
        params = _resolve(args.command, cli_values, args.config)
        return _run_command(args.command, params)
    except UsageError as exc:
        print(f"faircf {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError, KeyError) as exc:
        print(f"faircf {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
