"""Fast oracle and property checks, runnable from the command line."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import oracles
from .bench import scaling_report
from .circuits import BINARY, MULTICLASS, BaseArch
from .parallel import (
    OrderedDataset,
    conventional_loss,
    encoder_direct,
    encoder_gate_level,
    integrated_loss,
    label_extraction,
    register_superposition,
)
from .simcore import (
    CX,
    MCX,
    RY,
    RZ,
    Circuit,
    GateOp,
    H,
    Phase,
    StateVector,
    X,
    apply_circuit,
    new_zero_state,
    run_batch,
)
from .table1 import Check


def random_dataset(rng: np.random.Generator, arch: BaseArch, N: int) -> OrderedDataset:
    y = np.repeat(np.arange(arch.num_classes), N // arch.num_classes)
    return OrderedDataset(rng.uniform(-1, 1, (N, 2)), y, arch)


def random_ops(rng: np.random.Generator, num_qubits: int, count: int) -> list[GateOp]:
    ops = []
    for _ in range(count):
        kind = rng.integers(6)
        q = int(rng.integers(num_qubits))
        others = [p for p in range(num_qubits) if p != q]
        angle = float(rng.uniform(-2 * math.pi, 2 * math.pi))
        if kind == 0:
            ops.append(H(q))
        elif kind == 1:
            ops.append(RY(q, angle))
        elif kind == 2:
            ops.append(RZ(q, angle))
        elif kind == 3:
            ops.append(Phase(q, angle))
        elif kind == 4 and others:
            ops.append(CX(int(rng.choice(others)), q))
        elif others:
            k = int(rng.integers(1, len(others) + 1))
            ctrl = rng.choice(others, size=k, replace=False)
            ops.append(MCX([(int(c), int(rng.integers(2))) for c in ctrl], q))
        else:
            ops.append(X(q))
    return ops


def check_loss_equivalence(samples: int = 100, seed: int = 1) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    cases = 0
    for arch, sizes in ((BINARY, (2, 4, 8)), (MULTICLASS, (4, 8))):
        for N in sizes:
            ds = random_dataset(rng, arch, N)
            for _ in range(samples):
                p = rng.uniform(-math.pi, math.pi, 32)
                worst = max(worst, abs(integrated_loss(ds, p) - conventional_loss(ds, p)))
                cases += 1
    return Check("loss equivalence", worst < 1e-10, f"max |diff| = {worst:.2e} over {cases} cases")


def check_encoder(seed: int = 2) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for arch, sizes in ((BINARY, (2, 4, 8)), (MULTICLASS, (4, 8))):
        for N in sizes:
            ds = random_dataset(rng, arch, N)
            layout = ds.layout
            circ = Circuit(layout.num_qubits, register_superposition(layout).ops + encoder_gate_level(ds).ops)
            worst = max(worst, float(np.max(np.abs(run_batch(circ)[0] - encoder_direct(ds)))))
    return Check("encoder gate-level vs direct", worst < 1e-12, f"max |diff| = {worst:.2e}")


def check_label_extraction() -> Check:
    bad = 0
    rows = 0
    for arch, N in ((BINARY, 2), (MULTICLASS, 4)):
        ds = random_dataset(np.random.default_rng(0), arch, N)
        layout = ds.layout
        circ = label_extraction(layout)
        k = layout.class_bits
        msbs = layout.register[-k:]
        for cls in range(1 << k):
            for reg in range(1 << k):
                j = 0
                for b in range(k):
                    j |= ((cls >> b) & 1) << layout.class_qubits[b]
                    j |= ((reg >> b) & 1) << msbs[b]
                out = apply_circuit(_basis(layout.num_qubits, j), circ)
                label = int(np.argmax(np.abs(out.amps))) & 1
                bad += label != int(cls == reg)
                rows += 1
    return Check("label extraction truth tables", bad == 0, f"{rows - bad}/{rows} rows match")


def _basis(num_qubits: int, j: int) -> StateVector:
    v = np.zeros(1 << num_qubits, dtype=complex)
    v[j] = 1
    return StateVector(num_qubits, v)


def check_simulator(seed: int = 3) -> Check:
    rng = np.random.default_rng(seed)
    long = Circuit(12, random_ops(rng, 12, 1000))
    norm_err = abs(apply_circuit(new_zero_state(12), long).norm_squared - 1.0)
    worst = 0.0
    for q in (1, 2, 3, 4):
        ops = random_ops(rng, q, 30)
        fast = apply_circuit(new_zero_state(q), Circuit(q, ops)).amps
        ref = oracles.circuit_unitary(ops, q) @ oracles.zero_state(q)
        worst = max(worst, float(np.max(np.abs(fast - ref))))
    ok = norm_err < 1e-9 and worst < 1e-12
    return Check("simulator algebra", ok, f"norm drift {norm_err:.1e}, oracle diff {worst:.1e}")


def check_cost_model() -> Check:
    rep = scaling_report([8, 16, 32, 64, 128])
    execs = all(
        r["exec_conventional"] == r["N"] and r["exec_integrated"] == 1 for r in rep.rows
    )
    ok = execs and abs(rep.slope_conventional - 2) <= 0.1 and abs(rep.slope_integrated - 1) <= 0.1
    return Check(
        "cost-model separation",
        ok,
        f"slopes {rep.slope_conventional:.3f} / {rep.slope_integrated:.3f}",
    )


CHECKS: list[Callable[[], Check]] = [
    check_simulator,
    check_label_extraction,
    check_encoder,
    check_loss_equivalence,
    check_cost_model,
]


def run_all(echo: Callable[[str], None] = print) -> bool:
    ok = True
    for fn in CHECKS:
        check = fn()
        echo(check.line())
        ok &= check.passed
    return ok
