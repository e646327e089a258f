"""Gate counting and the loss-evaluation cost model for both training methods.

Costs are in elementary-gate units. Under the default policy an uncontrolled
gate, CX and CCX each cost 1, and any other gate carrying ``c >= 1`` controls
costs ``2c - 1`` (linear, ancilla-free multi-control bound).

The model has two knobs:

``scaling``
    ``"fixed"`` keeps the 32-parameter ansatz at every N.
    ``"linear-in-N"`` replicates the variational gates once per training
    sample, the assumption under which the O(N^2) vs O(N) separation holds.

``encoder``
    ``"state-prep"`` charges each integrated encoding pass the generic
    state-preparation depth ``2**(n + m)``; ``"gate-level"`` charges the
    index-controlled gate list actually simulated here, which grows as
    N log N because every gate carries n register controls.
"""
from __future__ import annotations

import csv
import io
import math
import statistics
import time
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .circuits import BINARY, BaseArch, base_circuit, variational_layer, zz_feature_map
from .parallel import (
    IntegratedLayout,
    OrderedDataset,
    conventional_loss,
    encoder_gate_level,
    integrated_loss,
    label_extraction,
    register_superposition,
)
from .simcore import Circuit, GateOp

SCALINGS = ("fixed", "linear-in-N")
ENCODER_POLICIES = ("state-prep", "gate-level")
POLICIES = ("default", "unit")


def op_cost(op: GateOp, policy: str = "default") -> int:
    if policy == "unit":
        return 1
    if policy != "default":
        raise ValueError(f"unknown decomposition policy {policy!r}")
    if op.kind in ("CX", "CCX") or not op.controls:
        return 1
    return 2 * len(op.controls) - 1


@dataclass(frozen=True)
class GateCounts:
    by_kind: dict[str, int]
    total_ops: int
    controlled_ops: int
    elementary: int


def count_gates(ops: Circuit | Iterable[GateOp], policy: str = "default") -> GateCounts:
    """Tally ops by kind; ``controlled_ops`` counts gates with controls beyond CX/CCX."""
    by_kind: Counter[str] = Counter()
    controlled = elementary = 0
    for op in ops:
        by_kind[op.kind] += 1
        if op.controls and op.kind not in ("CX", "CCX"):
            controlled += 1
        elementary += op_cost(op, policy)
    return GateCounts(dict(by_kind), sum(by_kind.values()), controlled, elementary)


@dataclass(frozen=True)
class CostReport:
    method: str
    N: int
    executions_per_loss_eval: int
    elementary_gates_per_execution: int
    total_elementary_gate_cost: int
    assumed_variational_scaling: str
    encoder_policy: str
    encoding_gates: int
    variational_gates: int
    extraction_gates: int
    encoder_controlled_gates: int
    state_prep_depth: int


def _check_n(N: int) -> int:
    if N < 2 or N & (N - 1):
        raise ValueError(f"N must be a power of two >= 2, got {N}")
    return int(math.log2(N))


def _placeholder_dataset(arch: BaseArch, N: int) -> OrderedDataset:
    # gate counts do not depend on feature values, only on N and the class blocks
    y = np.repeat(np.arange(arch.num_classes), N // arch.num_classes)
    return OrderedDataset(np.zeros((N, 2)), y, arch)


def _base_parts(arch: BaseArch, policy: str, reupload: bool) -> tuple[int, int]:
    """Elementary costs of the encoding and variational parts of one base circuit."""
    passes = arch.reuploading_layers if reupload else 1
    enc = passes * count_gates(zz_feature_map(0.0, 0.0), policy).elementary
    var = arch.reuploading_layers * count_gates(
        variational_layer(arch, np.zeros(arch.params_per_layer)), policy
    ).elementary
    return enc, var


def cost_model(
    method: str,
    N: int,
    arch: BaseArch = BINARY,
    scaling: str = "linear-in-N",
    encoder: str = "state-prep",
    policy: str = "default",
    reupload: bool = True,
) -> CostReport:
    n = _check_n(N)
    if scaling not in SCALINGS:
        raise ValueError(f"unknown scaling {scaling!r}; choose from {SCALINGS}")
    if encoder not in ENCODER_POLICIES:
        raise ValueError(f"unknown encoder policy {encoder!r}; choose from {ENCODER_POLICIES}")
    if N % arch.num_classes:
        raise ValueError(f"N={N} not divisible by {arch.num_classes} classes")
    enc, var = _base_parts(arch, policy, reupload)
    var_total = var * (N if scaling == "linear-in-N" else 1)
    passes = arch.reuploading_layers if reupload else 1
    dataset = _placeholder_dataset(arch, N)
    layout = dataset.layout
    controlled = passes * count_gates(encoder_gate_level(dataset), policy).elementary
    depth = 1 << (n + arch.data_qubits)

    if method == "conventional":
        executions, encoding, extraction = N, enc, 0
    elif method == "integrated":
        executions = 1
        prep = passes * depth if encoder == "state-prep" else controlled
        encoding = count_gates(register_superposition(layout), policy).elementary + prep
        extraction = count_gates(label_extraction(layout), policy).elementary
    else:
        raise ValueError(f"unknown method {method!r}")
    per_exec = encoding + var_total + extraction
    return CostReport(
        method=method,
        N=N,
        executions_per_loss_eval=executions,
        elementary_gates_per_execution=per_exec,
        total_elementary_gate_cost=executions * per_exec,
        assumed_variational_scaling=scaling,
        encoder_policy=encoder,
        encoding_gates=encoding,
        variational_gates=var_total,
        extraction_gates=extraction,
        encoder_controlled_gates=controlled,
        state_prep_depth=depth,
    )


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log2(ys) against log2(xs)."""
    slope, _ = np.polyfit(np.log2(xs), np.log2(ys), 1)
    return float(slope)


def time_loss_eval(method: str, N: int, arch: BaseArch = BINARY, reps: int = 5, seed: int = 0) -> float:
    """Median wall time (s) of one simulated loss evaluation on a random dataset."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    rng = np.random.default_rng(seed)
    y = np.repeat(np.arange(arch.num_classes), N // arch.num_classes)
    dataset = OrderedDataset(rng.uniform(-1, 1, (N, 2)), y, arch)
    params = rng.uniform(-math.pi, math.pi, 32)
    if method == "integrated":
        dataset.encoder_ops  # build once, as training does
        fn = lambda: integrated_loss(dataset, params)  # noqa: E731
    else:
        fn = lambda: conventional_loss(dataset, params)  # noqa: E731
    samples = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


REPORT_COLUMNS = (
    "N",
    "scaling",
    "exec_conventional",
    "exec_integrated",
    "cost_conventional",
    "cost_integrated",
    "ratio",
    "encoder_controlled_gates",
    "state_prep_depth",
    "slope_conventional",
    "slope_integrated",
    "wall_conventional_s",
    "wall_integrated_s",
)


@dataclass
class ScalingReport:
    rows: list[dict]
    slope_conventional: float
    slope_integrated: float

    def to_csv(self, preamble: str | None = None) -> str:
        out = io.StringIO()
        if preamble:
            out.write(f"# {preamble}\n")
        writer = csv.DictWriter(out, fieldnames=REPORT_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow(row)
        return out.getvalue()


def scaling_report(
    N_list: Sequence[int],
    arch: BaseArch = BINARY,
    scaling: str = "linear-in-N",
    encoder: str = "state-prep",
    timing_reps: int = 0,
) -> ScalingReport:
    """Cost-model table over ``N_list``.

    The wall-time columns measure this classical simulator, whose cost grows
    with the statevector width; they are not the quantum cost model and are
    left empty when ``timing_reps == 0``.
    """
    if len(N_list) < 2:
        raise ValueError("need at least two sizes to fit a slope")
    conv = [cost_model("conventional", N, arch, scaling, encoder) for N in N_list]
    integ = [cost_model("integrated", N, arch, scaling, encoder) for N in N_list]
    s_conv = loglog_slope(N_list, [r.total_elementary_gate_cost for r in conv])
    s_int = loglog_slope(N_list, [r.total_elementary_gate_cost for r in integ])
    rows = []
    for N, c, i in zip(N_list, conv, integ):
        rows.append(
            {
                "N": N,
                "scaling": scaling,
                "exec_conventional": c.executions_per_loss_eval,
                "exec_integrated": i.executions_per_loss_eval,
                "cost_conventional": c.total_elementary_gate_cost,
                "cost_integrated": i.total_elementary_gate_cost,
                "ratio": c.total_elementary_gate_cost / i.total_elementary_gate_cost,
                "encoder_controlled_gates": i.encoder_controlled_gates,
                "state_prep_depth": i.state_prep_depth,
                "slope_conventional": round(s_conv, 6),
                "slope_integrated": round(s_int, 6),
                "wall_conventional_s": time_loss_eval("conventional", N, arch, timing_reps)
                if timing_reps
                else "",
                "wall_integrated_s": time_loss_eval("integrated", N, arch, timing_reps)
                if timing_reps
                else "",
            }
        )
    return ScalingReport(rows, s_conv, s_int)


def report_dict(report: CostReport) -> dict:
    return asdict(report)
