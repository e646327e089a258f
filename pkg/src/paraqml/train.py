"""SPSA optimisation, training loops for both methods, and the run protocol."""
from __future__ import annotations

import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .circuits import ARCHS, BINARY, MULTICLASS, N_PARAMS, BaseArch, accuracy
from .data import NUM_CLASSES, Split, SplitSpec, make_split
from .parallel import OrderedDataset, conventional_loss, integrated_loss

log = logging.getLogger(__name__)

METHODS = ("conventional", "integrated")

# SeedSequence keys for the independent streams of one run
_INIT_STREAM = 0
_SPSA_STREAM = 1


def stream(seed: int, key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), key])))


class NonFiniteLossError(RuntimeError):
    pass


@dataclass(frozen=True)
class SpsaConfig:
    a: float = 0.2
    c: float = 0.1
    A: float = 20.0
    alpha: float = 0.602
    gamma: float = 0.101
    iterations: int = 200
    seed: int = 0

    def __post_init__(self) -> None:
        if not (self.a > 0 and self.c > 0):
            raise ValueError("SPSA gains a and c must be positive")
        if self.A < 0:
            raise ValueError("stability constant A must be non-negative")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")

    def gains(self, k: int) -> tuple[float, float]:
        """Step size and perturbation size at 1-based iteration ``k``."""
        return self.a / (k + self.A) ** self.alpha, self.c / k**self.gamma


@dataclass
class SpsaResult:
    x: np.ndarray
    loss_trace: list[float]
    nfev: int
    wall_time: float


def spsa_minimize(
    loss_fn: Callable[[np.ndarray], float],
    init_params: Sequence[float],
    cfg: SpsaConfig,
    callback: Optional[Callable[[int, np.ndarray], None]] = None,
    rng: Optional[np.random.Generator] = None,
) -> SpsaResult:
    """Two-sided SPSA with the standard power-law gain schedule.

    Each iteration spends exactly two loss evaluations. The recorded loss is
    the mean of the two perturbed evaluations, so tracing costs nothing extra.
    ``callback(k, theta)`` runs after the update of iteration ``k``.
    """
    theta = np.array(init_params, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise ValueError("initial parameters must be finite")
    rng = stream(cfg.seed, _SPSA_STREAM) if rng is None else rng
    trace: list[float] = []
    nfev = 0
    start = time.perf_counter()
    for k in range(1, cfg.iterations + 1):
        a_k, c_k = cfg.gains(k)
        delta = rng.integers(0, 2, size=theta.size) * 2.0 - 1.0
        f_plus = loss_fn(theta + c_k * delta)
        f_minus = loss_fn(theta - c_k * delta)
        nfev += 2
        if not (math.isfinite(f_plus) and math.isfinite(f_minus)):
            raise NonFiniteLossError(
                f"non-finite loss at iteration {k}: f+={f_plus!r}, f-={f_minus!r}"
            )
        # 1/delta_i == delta_i for +-1 entries
        grad = (f_plus - f_minus) / (2.0 * c_k) * delta
        theta = theta - a_k * grad
        trace.append(0.5 * (f_plus + f_minus))
        if callback is not None:
            callback(k, theta)
    return SpsaResult(theta, trace, nfev, time.perf_counter() - start)


@dataclass
class RunResult:
    method: str
    arch: str
    kind: str
    seed: int
    loss_trace: list[float]
    train_acc_trace: list[float]
    test_acc_trace: list[float]
    final_params: list[float]
    best_window: tuple[int, int]
    best_window_test_acc: float
    best_window_train_acc: float
    loss_evaluations: int
    circuit_executions: int
    executions_per_loss_eval: int
    wall_time: float
    config: dict = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return len(self.loss_trace)

    def to_records(self) -> list[dict]:
        """One record per iteration followed by a summary record."""
        rows = [
            {"type": "iteration", "k": k, "loss": loss, "train_acc": tr, "test_acc": te}
            for k, (loss, tr, te) in enumerate(
                zip(self.loss_trace, self.train_acc_trace, self.test_acc_trace), start=1
            )
        ]
        summary = {
            k: v for k, v in asdict(self).items()
            if k not in ("loss_trace", "train_acc_trace", "test_acc_trace")
        }
        summary["best_window"] = list(self.best_window)
        rows.append({"type": "summary", **summary})
        return rows

    def dumps(self) -> str:
        return "".join(json.dumps(r) + "\n" for r in self.to_records())

    @classmethod
    def loads(cls, text: str) -> RunResult:
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        iters = [r for r in rows if r["type"] == "iteration"]
        summary = next(r for r in rows if r["type"] == "summary")
        summary.pop("type")
        summary["best_window"] = tuple(summary["best_window"])
        return cls(
            loss_trace=[r["loss"] for r in iters],
            train_acc_trace=[r["train_acc"] for r in iters],
            test_acc_trace=[r["test_acc"] for r in iters],
            **summary,
        )


def best_window_accuracy(trace: Sequence[float], window: tuple[int, int]) -> float:
    """Maximum of ``trace`` over 1-based iterations lo..hi inclusive."""
    lo, hi = window
    if not 1 <= lo <= hi <= len(trace):
        raise ValueError(f"bad window {window} for trace of length {len(trace)}")
    return float(max(trace[lo - 1:hi]))


def default_iterations(arch: BaseArch) -> int:
    return 400 if arch.class_bits == 2 else 200


# Gain numerator for the classifier experiments. The generic SpsaConfig default
# (0.2) leaves the 32 angles nearly frozen over 200 iterations.
PROTOCOL_GAIN = 4.0


def protocol_config(arch: BaseArch, seed: int = 0) -> SpsaConfig:
    return SpsaConfig(a=PROTOCOL_GAIN, iterations=default_iterations(arch), seed=seed)


def default_window(iterations: int) -> tuple[int, int]:
    """Last quarter of training: 150-200 for 200 iterations, 300-400 for 400."""
    return (iterations - iterations // 4, iterations)


def arch_for_kind(kind: str) -> BaseArch:
    return MULTICLASS if NUM_CLASSES[kind] == 4 else BINARY


@dataclass
class _CountingLoss:
    fn: Callable[[np.ndarray], float]
    executions_per_eval: int
    evaluations: int = 0

    def __call__(self, params: np.ndarray) -> float:
        self.evaluations += 1
        return self.fn(params)


def make_loss(
    method: str, dataset: OrderedDataset, loss: str = "prob", reupload: bool = True
) -> _CountingLoss:
    if method == "conventional":
        return _CountingLoss(
            lambda p: conventional_loss(dataset, p, loss=loss, reupload=reupload), dataset.size
        )
    if method == "integrated":
        if loss != "prob":
            raise ValueError("the integrated circuit only realises the 1 - P(correct) loss")
        return _CountingLoss(lambda p: integrated_loss(dataset, p, reupload), 1)
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")


def init_params(seed: int) -> np.ndarray:
    return stream(seed, _INIT_STREAM).uniform(-math.pi, math.pi, N_PARAMS)


def train_method(
    method: str,
    arch: BaseArch,
    split: Split,
    cfg: SpsaConfig,
    window: tuple[int, int] | None = None,
    loss: str = "prob",
    reupload: bool = True,
) -> RunResult:
    if split.spec.num_classes != arch.num_classes:
        raise ValueError(
            f"{split.spec.kind} has {split.spec.num_classes} classes but arch "
            f"{arch.name} predicts {arch.num_classes}"
        )
    window = default_window(cfg.iterations) if window is None else window
    dataset = OrderedDataset(split.X_train, split.y_train, arch)
    loss_fn = make_loss(method, dataset, loss, reupload)
    train_acc: list[float] = []
    test_acc: list[float] = []

    def record(k: int, theta: np.ndarray) -> None:
        train_acc.append(accuracy(arch, split.X_train, split.y_train, theta, reupload))
        test_acc.append(accuracy(arch, split.X_test, split.y_test, theta, reupload))

    res = spsa_minimize(loss_fn, init_params(cfg.seed), cfg, record)
    best_test = best_window_accuracy(test_acc, window)
    lo, hi = window
    k_best = lo + int(np.argmax(test_acc[lo - 1:hi]))
    return RunResult(
        method=method,
        arch=arch.name,
        kind=split.spec.kind,
        seed=cfg.seed,
        loss_trace=res.loss_trace,
        train_acc_trace=train_acc,
        test_acc_trace=test_acc,
        final_params=res.x.tolist(),
        best_window=window,
        best_window_test_acc=best_test,
        best_window_train_acc=train_acc[k_best - 1],
        loss_evaluations=loss_fn.evaluations,
        circuit_executions=loss_fn.evaluations * loss_fn.executions_per_eval,
        executions_per_loss_eval=loss_fn.executions_per_eval,
        wall_time=res.wall_time,
        config={**asdict(cfg), "loss": loss, "reupload": reupload},
    )


def run_seeds(base_seed: int, runs: int) -> list[int]:
    """Per-run 63-bit seeds derived from ``base_seed``; independent of method."""
    children = np.random.SeedSequence(base_seed).spawn(runs)
    return [int(c.generate_state(1, dtype=np.uint64)[0] >> 1) for c in children]


@dataclass(frozen=True)
class RunTask:
    kind: str
    method: str
    seed: int
    cfg: SpsaConfig
    window: tuple[int, int]
    n_train: int = 128
    n_test: int = 64
    loss: str = "prob"
    reupload: bool = True


def execute(task: RunTask) -> RunResult:
    arch = arch_for_kind(task.kind)
    split = make_split(SplitSpec(task.kind, task.seed, task.n_train, task.n_test))
    cfg = replace(task.cfg, seed=task.seed)
    return train_method(task.method, arch, split, cfg, task.window, task.loss, task.reupload)


@dataclass
class Summary:
    kind: str
    method: str
    runs: int
    train_mean: float
    train_sem: float
    test_mean: float
    test_sem: float
    results: list[RunResult] = field(repr=False, default_factory=list)


def mean_sem(values: Sequence[float]) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return float(v.mean()), 0.0
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


def summarize(kind: str, method: str, results: Sequence[RunResult]) -> Summary:
    tr = mean_sem([r.best_window_train_acc for r in results])
    te = mean_sem([r.best_window_test_acc for r in results])
    return Summary(kind, method, len(results), tr[0], tr[1], te[0], te[1], list(results))


def run_tasks(tasks: Sequence[RunTask], workers: int = 1) -> list[RunResult]:
    """Execute tasks, in a bounded process pool when ``workers > 1``; order is preserved."""
    if workers <= 1 or len(tasks) <= 1:
        return [execute(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(execute, tasks))


def experiment_tasks(
    kind: str,
    method: str,
    runs: int = 10,
    base_seed: int = 0,
    cfg: SpsaConfig | None = None,
    window: tuple[int, int] | None = None,
    **kw,
) -> list[RunTask]:
    arch = arch_for_kind(kind)
    if cfg is None:
        cfg = protocol_config(arch)
    window = default_window(cfg.iterations) if window is None else window
    return [RunTask(kind, method, s, cfg, window, **kw) for s in run_seeds(base_seed, runs)]


def run_experiment(
    kind: str,
    method: str,
    runs: int = 10,
    base_seed: int = 0,
    cfg: SpsaConfig | None = None,
    window: tuple[int, int] | None = None,
    workers: int = 1,
    **kw,
) -> Summary:
    if runs < 1:
        raise ValueError("runs must be >= 1")
    tasks = experiment_tasks(kind, method, runs, base_seed, cfg, window, **kw)
    return summarize(kind, method, run_tasks(tasks, workers))


def default_workers() -> int:
    env = os.environ.get("PARAQML_WORKERS")
    return int(env) if env else (os.cpu_count() or 1)

