"""Command-line entry point.

Settings resolve as: built-in defaults < ``--config`` JSON file < flags. The
config file may be flat or hold one object per subcommand name. Environment
variables ``PARAQML_OUTPUT_DIR`` and ``PARAQML_WORKERS`` override the default
output directory and worker count.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any, Sequence

from . import bench, data, selftest, table1
from .circuits import ARCHS
from .parallel import LOSS_VARIANTS
from .train import (
    METHODS,
    PROTOCOL_GAIN,
    SpsaConfig,
    arch_for_kind,
    default_iterations,
    default_window,
    default_workers,
    train_method,
)

log = logging.getLogger("paraqml")

DEFAULTS: dict[str, dict[str, Any]] = {
    "gen-data": {"kind": None, "seed": 0, "train": 128, "test": 64, "out": None},
    "train": {
        "method": None,
        "dataset": None,
        "data_file": None,
        "seed": 0,
        "train": 128,
        "test": 64,
        "iterations": None,
        "a": PROTOCOL_GAIN,
        "c": 0.1,
        "A": 20.0,
        "alpha": 0.602,
        "gamma": 0.101,
        "window": None,
        "loss": "prob",
        "single_pass": False,
        "out": None,
    },
    "reproduce-table1": {
        "runs": 10,
        "base_seed": 0,
        "kinds": list(data.KINDS),
        "iterations": None,
        "workers": None,
        "out_dir": None,
    },
    "bench": {
        "n_list": [8, 16, 32, 64, 128],
        "arch": "binary2q",
        "scaling": "linear-in-N",
        "encoder": "state-prep",
        "reps": 5,
        "out": None,
    },
    "selftest": {},
}


class ConfigError(ValueError):
    pass


def output_dir() -> Path:
    return Path(os.environ.get("PARAQML_OUTPUT_DIR", "results"))


def resolve(command: str, args: argparse.Namespace) -> dict[str, Any]:
    cfg = dict(DEFAULTS[command])
    if getattr(args, "config", None):
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from exc
        section = loaded.get(command, loaded) if isinstance(loaded, dict) else {}
        for key, value in section.items():
            key = key.replace("-", "_")
            if key in cfg:
                cfg[key] = value
    for key in cfg:
        value = getattr(args, key, None)
        if value is not None and value is not False:
            cfg[key] = value
    return cfg


def _require(cfg: dict, key: str, choices: Sequence[str] | None = None) -> None:
    if cfg.get(key) is None:
        raise ConfigError(f"--{key.replace('_', '-')} is required")
    if choices is not None and cfg[key] not in choices:
        raise ConfigError(f"--{key.replace('_', '-')} must be one of {', '.join(choices)}; got {cfg[key]!r}")


def _writable(path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {path.parent}: {exc}") from exc
    return path


def cmd_gen_data(cfg: dict) -> int:
    _require(cfg, "kind", data.KINDS)
    try:
        spec = data.SplitSpec(cfg["kind"], int(cfg["seed"]), int(cfg["train"]), int(cfg["test"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = Path(cfg["out"] or output_dir() / f"{spec.kind}_seed{spec.seed}.txt")
    split = data.make_split(spec)
    try:
        data.save_split(split, _writable(out))
    except OSError as exc:
        raise ConfigError(f"cannot write {out}: {exc}") from exc
    for name, y in (("train", split.y_train), ("test", split.y_test)):
        counts = [int((y == c).sum()) for c in range(spec.num_classes)]
        print(f"{name}: {len(y)} samples, per class {counts}")
    print(f"wrote {out}")
    return 0


def _train_config(cfg: dict) -> tuple[Any, data.Split, SpsaConfig, tuple[int, int]]:
    _require(cfg, "method", METHODS)
    _require(cfg, "loss", LOSS_VARIANTS)
    if cfg["data_file"]:
        try:
            split = data.load_split(cfg["data_file"])
        except (OSError, ValueError, KeyError) as exc:
            raise ConfigError(f"cannot load dataset file {cfg['data_file']}: {exc}") from exc
        if cfg["dataset"] and cfg["dataset"] != split.spec.kind:
            raise ConfigError(f"--dataset {cfg['dataset']} disagrees with file kind {split.spec.kind}")
    else:
        _require(cfg, "dataset", data.KINDS)
        try:
            spec = data.SplitSpec(cfg["dataset"], int(cfg["seed"]), int(cfg["train"]), int(cfg["test"]))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        split = data.make_split(spec)
    arch = arch_for_kind(split.spec.kind)
    iterations = int(cfg["iterations"] or default_iterations(arch))
    try:
        spsa = SpsaConfig(
            a=float(cfg["a"]),
            c=float(cfg["c"]),
            A=float(cfg["A"]),
            alpha=float(cfg["alpha"]),
            gamma=float(cfg["gamma"]),
            iterations=iterations,
            seed=int(cfg["seed"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    window = tuple(cfg["window"]) if cfg["window"] else default_window(iterations)
    if not 1 <= window[0] <= window[1] <= iterations:
        raise ConfigError(f"--window {window} must satisfy 1 <= lo <= hi <= {iterations}")
    if cfg["method"] == "integrated" and cfg["loss"] != "prob":
        raise ConfigError("--loss cross_entropy is only available for the conventional method")
    return arch, split, spsa, window


def cmd_train(cfg: dict) -> int:
    arch, split, spsa, window = _train_config(cfg)
    out = Path(cfg["out"] or output_dir() / f"train_{cfg['method']}_{split.spec.kind}_seed{spsa.seed}.jsonl")
    _writable(out)
    result = train_method(
        cfg["method"], arch, split, spsa, window, cfg["loss"], reupload=not cfg["single_pass"]
    )
    result.config.update({"effective": cfg, "data": asdict(split.spec)})
    try:
        out.write_text(result.dumps())
    except OSError as exc:
        raise ConfigError(f"cannot write {out}: {exc}") from exc
    lo, hi = window
    print(f"method={result.method} dataset={result.kind} arch={result.arch} seed={result.seed}")
    print(f"final loss (mean of perturbed evals): {result.loss_trace[-1]:.4f}")
    print(f"best test accuracy in iterations {lo}-{hi}: {result.best_window_test_acc:.4f}")
    print(f"train accuracy at that iteration: {result.best_window_train_acc:.4f}")
    print(
        f"loss evaluations: {result.loss_evaluations} | circuit executions: "
        f"{result.circuit_executions} ({2 * result.executions_per_loss_eval} per iteration)"
    )
    print(f"wall time: {result.wall_time:.2f}s | wrote {out}")
    return 0


def cmd_reproduce_table1(cfg: dict) -> int:
    kinds = list(cfg["kinds"])
    for kind in kinds:
        if kind not in data.KINDS:
            raise ConfigError(f"unknown dataset kind {kind!r}")
    runs = int(cfg["runs"])
    if runs < 1:
        raise ConfigError("--runs must be >= 1")
    overrides = {"iterations": int(cfg["iterations"])} if cfg["iterations"] else None
    workers = int(cfg["workers"] or default_workers())
    out_dir = Path(cfg["out_dir"] or output_dir())
    _writable(out_dir / "table1.csv")
    table = table1.reproduce(kinds, runs, int(cfg["base_seed"]), workers, overrides)
    print(table.render())
    print()
    for check in table.checks:
        print(check.line())
    (out_dir / "table1.csv").write_text(table.to_csv(f"config={json.dumps(cfg)}"))
    with open(out_dir / "table1_runs.jsonl", "w") as fh:
        for result in table.results():
            fh.write(json.dumps(result.to_records()[-1]) + "\n")
    print(f"wrote {out_dir / 'table1.csv'} and {out_dir / 'table1_runs.jsonl'}")
    return 0 if table.passed else 1


def cmd_bench(cfg: dict) -> int:
    _require(cfg, "arch", list(ARCHS))
    _require(cfg, "scaling", bench.SCALINGS)
    _require(cfg, "encoder", bench.ENCODER_POLICIES)
    try:
        n_list = [int(n) for n in cfg["n_list"]]
        report = bench.scaling_report(
            n_list, ARCHS[cfg["arch"]], cfg["scaling"], cfg["encoder"], int(cfg["reps"])
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = Path(cfg["out"] or output_dir() / f"bench_{cfg['arch']}_{cfg['scaling']}.csv")
    text = report.to_csv(f"config={json.dumps(cfg)}")
    _writable(out).write_text(text)
    print(text, end="")
    print(
        f"log-log slopes: conventional {report.slope_conventional:.3f}, "
        f"integrated {report.slope_integrated:.3f} ({cfg['scaling']} variational scaling)"
    )
    print("wall_* columns time this classical simulator and do not follow the gate-cost model")
    print(f"wrote {out}")
    return 0


def cmd_selftest(cfg: dict) -> int:
    return 0 if selftest.run_all() else 1


COMMANDS = {
    "gen-data": cmd_gen_data,
    "train": cmd_train,
    "reproduce-table1": cmd_reproduce_table1,
    "bench": cmd_bench,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paraqml", description="Parallel-data quantum classifier experiments."
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", help="JSON file with settings (flags take precedence)")
        return p

    p = add("gen-data", "generate a train/test split and write it as text")
    p.add_argument("--kind", choices=data.KINDS)
    p.add_argument("--seed", type=int)
    p.add_argument("--train", type=int)
    p.add_argument("--test", type=int)
    p.add_argument("--out")

    p = add("train", "train one model with SPSA")
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--dataset", choices=data.KINDS)
    p.add_argument("--data-file", dest="data_file", help="dataset file written by gen-data")
    p.add_argument("--seed", type=int)
    p.add_argument("--train", type=int)
    p.add_argument("--test", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--a", type=float, help="SPSA gain numerator")
    p.add_argument("--c", type=float, help="SPSA perturbation size")
    p.add_argument("--A", type=float, help="SPSA stability constant")
    p.add_argument("--alpha", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--window", type=int, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--loss", choices=LOSS_VARIANTS)
    p.add_argument("--single-pass", dest="single_pass", action="store_true",
                   help="encode once instead of re-uploading before every layer")
    p.add_argument("--out")

    p = add("reproduce-table1", "run both methods on all datasets and check the accuracy bands")
    p.add_argument("--runs", type=int)
    p.add_argument("--base-seed", dest="base_seed", type=int)
    p.add_argument("--kinds", nargs="+", choices=data.KINDS)
    p.add_argument("--iterations", type=int, help="override the iteration count (smoke runs)")
    p.add_argument("--workers", type=int)
    p.add_argument("--out-dir", dest="out_dir")

    p = add("bench", "cost-model scaling table")
    p.add_argument("--n-list", dest="n_list", type=int, nargs="+")
    p.add_argument("--arch", choices=list(ARCHS))
    p.add_argument("--scaling", choices=bench.SCALINGS)
    p.add_argument("--encoder", choices=bench.ENCODER_POLICIES)
    p.add_argument("--reps", type=int, help="timing repetitions (0 disables timing)")
    p.add_argument("--out")

    add("selftest", "run the oracle and property checks")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        cfg = resolve(args.command, args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
