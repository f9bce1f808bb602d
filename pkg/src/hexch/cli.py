"""Batch experiment runner: config-driven sampling, extraction and testing.

One JSON config describes a scenario, a truncation, a seed and the tests to
run; the runner emits the sampled array, optional hierarchy and
resynthesis dumps, per-test reports and a manifest with content checksums.
For a fixed seed the emitted files are byte-identical across runs and
thread counts.

Exit codes: 0 all expected verdicts met, 1 verdict mismatch, 2 config or
usage error, 3 truncation cap exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .definetti import extract_hierarchy, hierarchy_to_json_obj, resynthesize
from .fields import derive_seed
from .scenarios import builtin, list_scenarios, make_level_values, make_source
from .stattests import (
    TestReport,
    cond_indep_test,
    conditional_iid_test,
    hexch_test,
    level_homogeneity_test,
)
from .tree import DEFAULT_CELL_CAP, leaves, product_leaves

__all__ = ["main", "run_experiment", "array_to_csv", "ConfigError", "CapError"]


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


class CapError(ValueError):
    """Requested truncation exceeds the configured cell cap."""


_ARRAY_TESTS = {"hexch", "conditional_iid", "cond_indep"}
_FIELD_TESTS = {"level_homogeneity"}


def _cell_cap() -> int:
    raw = os.environ.get("HEXCH_MAX_CELLS")
    if raw is None:
        return DEFAULT_CELL_CAP
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"HEXCH_MAX_CELLS must be an integer, got {raw!r}") from None


def _parse_config(obj) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    for key in ("scenario", "seed", "r", "m"):
        if key not in obj:
            raise ConfigError(f"config is missing required key {key!r}")
    try:
        spec = builtin(obj["scenario"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    cfg = {
        "scenario": obj["scenario"],
        "seed": int(obj["seed"]),
        "r": int(obj["r"]),
        "m": int(obj["m"]),
        "n": None if obj.get("n") is None else int(obj["n"]),
        "params": dict(obj.get("params", {})),
        "extract": bool(obj.get("extract", False)),
        "resynthesize_m": (
            None if obj.get("resynthesize_m") is None else int(obj["resynthesize_m"])
        ),
        "tests": [],
        "out": obj.get("out", "hexch-out"),
    }
    if cfg["r"] < 1 or cfg["m"] < 1:
        raise ConfigError("r and m must be >= 1")
    if spec.form == "sigma-replica" and cfg["n"] is None:
        cfg["n"] = int(spec.defaults.get("n", 20))
    tests = obj.get("tests", [])
    if not isinstance(tests, list):
        raise ConfigError("tests must be a list")
    for i, t in enumerate(tests):
        if not isinstance(t, dict) or "name" not in t:
            raise ConfigError(f"tests[{i}] must be an object with a 'name'")
        name = t["name"]
        if name not in _ARRAY_TESTS | _FIELD_TESTS:
            raise ConfigError(f"unknown test {name!r}")
        if name in _ARRAY_TESTS and spec.form == "ifield":
            raise ConfigError(f"test {name!r} needs an array scenario")
        if name in _FIELD_TESTS and spec.form != "ifield":
            raise ConfigError(f"test {name!r} needs a field scenario")
        if name == "cond_indep" and cfg["r"] < 2:
            raise ConfigError("cond_indep needs r >= 2")
        entry = {
            "name": name,
            "n_reps": int(t.get("n_reps", 50)),
            "n_resamples": int(t.get("n_resamples", 199)),
            "level": float(t.get("level", 0.05)),
        }
        cfg["tests"].append(entry)
    cap = _cell_cap()
    cells = cfg["m"] ** cfg["r"] * (cfg["n"] or 1)
    if cells > cap:
        raise CapError(f"{cells} cells exceed the cap of {cap}")
    return cfg


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write(path: Path, text: str, files: dict) -> None:
    data = text.encode("utf-8")
    path.write_bytes(data)
    files[path.name] = {
        "sha256": hashlib.sha256(data).hexdigest(),
        "bytes": len(data),
    }


def array_to_csv(array: np.ndarray, depths, shape, n=None) -> str:
    """Canonical CSV dump: vertex key columns (one per tree component),
    an optional replica index, and the value at 17 significant digits."""
    if isinstance(depths, int):
        idx = leaves(depths, shape)
        header = ["vertex"]
        keys = [[v.encode()] for v in idx]
    else:
        idx = product_leaves(tuple(depths), tuple(shape))
        header = [f"vertex_{j + 1}" for j in range(len(depths))]
        keys = [[p.encode() for p in pv.parts] for pv in idx]
    lines = []
    if n is None:
        lines.append(",".join(header + ["value"]))
        for key, x in zip(keys, np.asarray(array).reshape(-1)):
            lines.append(",".join(key + [_fmt(x)]))
    else:
        lines.append(",".join(header + ["i", "value"]))
        mat = np.asarray(array).reshape(len(keys), n)
        for key, row in zip(keys, mat):
            for i, x in enumerate(row, start=1):
                lines.append(",".join(key + [str(i), _fmt(x)]))
    return "\n".join(lines) + "\n"


def _array_csv(array: np.ndarray, r: int, m: int, n) -> str:
    return array_to_csv(array, r, m, n)


def _field_csv(by_vertex: dict) -> str:
    lines = ["vertex,value"]
    for v, x in by_vertex.items():
        lines.append(f"{v.encode()},{_fmt(x)}")
    return "\n".join(lines) + "\n"


def _run_one_test(cfg, entry, index, array, hierarchy, level_values):
    seed = derive_seed(cfg["seed"], "test", index)
    name = entry["name"]
    if name == "hexch":
        src = make_source(
            cfg["scenario"], cfg["r"], cfg["m"], n=cfg["n"], params=cfg["params"]
        )
        return hexch_test(
            src.sample,
            cfg["r"],
            cfg["m"],
            n=src.n,
            n_reps=entry["n_reps"],
            n_resamples=entry["n_resamples"],
            level=entry["level"],
            seed=seed,
        )
    if name == "conditional_iid":
        return conditional_iid_test(
            array,
            hierarchy,
            n_resamples=entry["n_resamples"],
            level=entry["level"],
            seed=seed,
        )
    if name == "cond_indep":
        return cond_indep_test(
            array,
            hierarchy,
            n_resamples=entry["n_resamples"],
            level=entry["level"],
            seed=seed,
        )
    by_depth, declared = level_values
    return level_homogeneity_test(
        by_depth, declared, level=entry["level"], seed=seed
    )


def run_experiment(config_obj, out_dir, threads: int = 1) -> tuple[int, dict]:
    """Execute one configured pipeline; returns (exit code, emitted files)."""
    cfg = _parse_config(config_obj)
    spec = builtin(cfg["scenario"])
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if threads < 1:
        threads = os.cpu_count() or 1
    files: dict = {}

    array = None
    hierarchy = None
    level_values = None
    if spec.form == "ifield":
        level_values = make_level_values(
            cfg["scenario"], cfg["r"], cfg["m"], cfg["seed"], params=cfg["params"]
        )
        from .fields import ifield_truncation_values, uniform_ifield

        _, by_vertex = ifield_truncation_values(
            uniform_ifield(cfg["seed"], cfg["r"]), cfg["r"], cfg["m"]
        )
        _write(out / "field_values.csv", _field_csv(by_vertex), files)
    else:
        src = make_source(
            cfg["scenario"], cfg["r"], cfg["m"], n=cfg["n"], params=cfg["params"]
        )
        array = src.sample(cfg["seed"])
        _write(out / "array.csv", _array_csv(array, cfg["r"], cfg["m"], src.n), files)
        needs_hierarchy = cfg["extract"] or any(
            t["name"] in ("conditional_iid", "cond_indep") for t in cfg["tests"]
        )
        if needs_hierarchy:
            if src.n is not None:
                raise ConfigError("hierarchy extraction needs a plain tree array")
            hierarchy = extract_hierarchy(array, cfg["r"], cfg["m"])
            _write(
                out / "hierarchy.json",
                json.dumps(hierarchy_to_json_obj(hierarchy), sort_keys=True) + "\n",
                files,
            )
            if cfg["resynthesize_m"] is not None:
                resyn = resynthesize(
                    hierarchy,
                    cfg["r"],
                    cfg["resynthesize_m"],
                    derive_seed(cfg["seed"], "resynthesize"),
                )
                _write(
                    out / "resynthesized.csv",
                    _array_csv(resyn, cfg["r"], cfg["resynthesize_m"], None),
                    files,
                )

    indexed = list(enumerate(cfg["tests"]))
    if threads > 1 and len(indexed) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(
                pool.map(
                    lambda it: _run_one_test(
                        cfg, it[1], it[0], array, hierarchy, level_values
                    ),
                    indexed,
                )
            )
    else:
        reports = [
            _run_one_test(cfg, entry, i, array, hierarchy, level_values)
            for i, entry in indexed
        ]

    report_lines = [json.dumps(r.to_json_obj(), sort_keys=True) for r in reports]
    _write(out / "reports.jsonl", "\n".join(report_lines) + "\n", files)

    summary = ["test,statistic,p_value,reject,expected,ok"]
    all_ok = True
    for r in reports:
        expected = spec.expected.get(r.name, "")
        if expected == "reject":
            ok = r.reject
        elif expected == "pass":
            ok = not r.reject
        else:
            ok = True
        all_ok &= ok
        summary.append(
            f"{r.name},{_fmt(r.statistic)},{_fmt(r.p_value)},"
            f"{int(r.reject)},{expected},{int(ok)}"
        )
    _write(out / "summary.csv", "\n".join(summary) + "\n", files)

    manifest = {
        "version": __version__,
        "config": {k: v for k, v in cfg.items() if k != "out"},
        "files": files,
    }
    _write(
        out / "manifest.json",
        json.dumps(manifest, sort_keys=True, indent=2) + "\n",
        files,
    )
    return (0 if all_ok else 1), files


def _cmd_run(args) -> int:
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
        return 2
    out_dir = args.out or (obj.get("out", "hexch-out") if isinstance(obj, dict) else "hexch-out")
    try:
        code, files = run_experiment(obj, out_dir, threads=args.threads)
    except CapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for name in sorted(files):
        print(f"wrote {Path(out_dir) / name}")
    if code != 0:
        print("verdict mismatch: see summary.csv", file=sys.stderr)
    return code


def _cmd_verify(args) -> int:
    from .acceptance import SUITES, run_suite, suite_summary_json

    if args.suite not in SUITES:
        print(
            f"error: unknown suite {args.suite!r}; choose from {sorted(SUITES)}",
            file=sys.stderr,
        )
        return 2
    results = run_suite(args.suite, report=print)
    print(suite_summary_json(results))
    return 0 if all(r.passed for r in results) else 1


def _cmd_list_scenarios(_args) -> int:
    for spec in list_scenarios():
        expected = " ".join(f"{k}={v}" for k, v in spec.expected.items())
        print(f"{spec.name:18s} {spec.kind:9s} {spec.summary}  [{expected}]")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hexch",
        description="Batch runner for exchangeable-array experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a JSON experiment config")
    p_run.add_argument("config", help="path to the experiment config (JSON)")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument(
        "--threads",
        type=int,
        default=1,
        help="worker threads (0 = auto); never affects results",
    )
    p_run.set_defaults(fn=_cmd_run)

    p_verify = sub.add_parser("verify", help="run an acceptance suite")
    p_verify.add_argument("suite", help="suite name: fast or full")
    p_verify.set_defaults(fn=_cmd_verify)

    p_list = sub.add_parser("list-scenarios", help="show the scenario registry")
    p_list.set_defaults(fn=_cmd_list_scenarios)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
