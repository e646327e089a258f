"""Accuracy-table reproduction: both methods on all five datasets, with pass bands."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from typing import Sequence

from .data import KINDS
from .train import (
    METHODS,
    RunResult,
    Summary,
    arch_for_kind,
    default_window,
    experiment_tasks,
    protocol_config,
    run_tasks,
    summarize,
)

# Reference mean accuracies (train, test) per dataset and method
REFERENCE_ACCURACY = {
    "semicircles": {"conventional": (0.8844, 0.8234), "integrated": (0.8523, 0.8016)},
    "checkerboard": {"conventional": (0.8578, 0.7906), "integrated": (0.8508, 0.7734)},
    "circles": {"conventional": (0.8672, 0.8109), "integrated": (0.8500, 0.8063)},
    "corners": {"conventional": (0.8680, 0.7703), "integrated": (0.8547, 0.8172)},
    "checkerboard4": {"conventional": (0.6602, 0.6328), "integrated": (0.6016, 0.6078)},
}

# Minimum mean test accuracy per dataset, and the largest allowed method gap
TEST_BANDS = {
    "semicircles": 0.75,
    "circles": 0.75,
    "checkerboard": 0.70,
    "corners": 0.70,
    "checkerboard4": 0.45,
}
MAX_METHOD_GAP = 0.06
GAP_CHECKED = ("semicircles", "circles", "checkerboard", "corners")

TABLE_COLUMNS = (
    "dataset",
    "classes",
    "conv_train",
    "conv_train_sem",
    "conv_test",
    "conv_test_sem",
    "int_train",
    "int_train_sem",
    "int_test",
    "int_test_sem",
)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


@dataclass
class Table:
    summaries: dict[str, dict[str, Summary]]
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def rows(self) -> list[dict]:
        out = []
        for kind, by_method in self.summaries.items():
            c, i = by_method["conventional"], by_method["integrated"]
            out.append(
                {
                    "dataset": kind,
                    "classes": 4 if kind == "checkerboard4" else 2,
                    "conv_train": c.train_mean,
                    "conv_train_sem": c.train_sem,
                    "conv_test": c.test_mean,
                    "conv_test_sem": c.test_sem,
                    "int_train": i.train_mean,
                    "int_train_sem": i.train_sem,
                    "int_test": i.test_mean,
                    "int_test_sem": i.test_sem,
                }
            )
        return out

    def to_csv(self, preamble: str | None = None) -> str:
        out = io.StringIO()
        if preamble:
            out.write(f"# {preamble}\n")
        writer = csv.DictWriter(out, fieldnames=TABLE_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(self.rows())
        return out.getvalue()

    def render(self) -> str:
        head = f"{'Dataset':<14} {'#':>2}  {'M1 train':>16} {'M1 test':>16}  {'M2 train':>16} {'M2 test':>16}"
        lines = [head, "-" * len(head)]
        for r in self.rows():
            cells = [
                f"{r[k]:.4f} ± {r[k + '_sem']:.4f}"
                for k in ("conv_train", "conv_test", "int_train", "int_test")
            ]
            lines.append(
                f"{r['dataset']:<14} {r['classes']:>2}  {cells[0]:>16} {cells[1]:>16}  {cells[2]:>16} {cells[3]:>16}"
            )
        return "\n".join(lines)

    def results(self) -> list[RunResult]:
        return [r for by in self.summaries.values() for s in by.values() for r in s.results]


def evaluate(summaries: dict[str, dict[str, Summary]]) -> list[Check]:
    checks = []
    for kind, by_method in summaries.items():
        band = TEST_BANDS[kind]
        for method in METHODS:
            s = by_method[method]
            checks.append(
                Check(
                    f"{kind}/{method} test >= {band}",
                    s.test_mean >= band,
                    f"{s.test_mean:.4f} ± {s.test_sem:.4f} (reference {REFERENCE_ACCURACY[kind][method][1]:.4f})",
                )
            )
        if kind in GAP_CHECKED:
            gap = abs(by_method["conventional"].test_mean - by_method["integrated"].test_mean)
            checks.append(
                Check(f"{kind} |M1 - M2| <= {MAX_METHOD_GAP}", gap <= MAX_METHOD_GAP, f"{gap:.4f}")
            )
    return checks


def reproduce(
    kinds: Sequence[str] = KINDS,
    runs: int = 10,
    base_seed: int = 0,
    workers: int = 1,
    cfg_overrides: dict | None = None,
    window: tuple[int, int] | None = None,
) -> Table:
    """Run ``runs`` seeds per (dataset, method). Both methods share data and seeds per run."""
    tasks = []
    for kind in kinds:
        cfg = protocol_config(arch_for_kind(kind))
        if cfg_overrides:
            cfg = replace(cfg, **cfg_overrides)
        win = window or default_window(cfg.iterations)
        for method in METHODS:
            tasks += experiment_tasks(kind, method, runs, base_seed, cfg, win)
    results = run_tasks(tasks, workers)
    summaries: dict[str, dict[str, Summary]] = {}
    for j, kind in enumerate(kinds):
        for m, method in enumerate(METHODS):
            start = (j * len(METHODS) + m) * runs
            summaries.setdefault(kind, {})[method] = summarize(
                kind, method, results[start:start + runs]
            )
    table = Table(summaries)
    table.checks = evaluate(summaries)
    return table


__all__ = ["REFERENCE_ACCURACY", "TEST_BANDS", "MAX_METHOD_GAP", "Check", "Table", "reproduce"]
