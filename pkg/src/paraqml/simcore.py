"""Dense statevector simulation.

Qubit ordering is little-endian: basis index ``j`` holds qubit ``q`` in bit
``(j >> q) & 1``. Internally amplitudes are viewed as a tensor of shape
``(B, 2, ..., 2)`` whose first axis is a batch axis and whose remaining axes
run from the most significant qubit to qubit 0. A single state is the
``B == 1`` case. Gate angles may be scalars or length-``B`` arrays, which lets
one circuit template evaluate many data points at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

MAX_QUBITS = 24
NORM_TOL = 1e-10

Angle = Union[float, np.ndarray]
Control = tuple[int, int]

SINGLE_QUBIT_KINDS = ("H", "X", "RY", "RZ", "PHASE")
ROTATION_KINDS = ("RY", "RZ", "PHASE")
X_KINDS = ("X", "CX", "CCX", "MCX")
KINDS = SINGLE_QUBIT_KINDS + ("CX", "CCX", "MCX")

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


class SimulationError(ValueError):
    """Invalid gate, circuit or state for the simulator."""


class ResourceLimitError(SimulationError):
    """Requested register width exceeds the simulator cap."""


@dataclass(frozen=True)
class GateOp:
    """One gate application.

    ``controls`` is a tuple of ``(qubit, required_bit)`` pairs. ``H``, ``RY``,
    ``RZ`` and ``PHASE`` may carry controls too, which is how controlled
    subcircuits are expressed. ``CX`` and ``CCX`` take exactly one and two
    1-controls; ``MCX`` takes any pattern, 0-controls included.
    """

    kind: str
    target: int
    controls: tuple[Control, ...] = ()
    angle: Angle | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise SimulationError(f"unknown gate kind {self.kind!r}")
        controls = tuple((int(q), int(b)) for q, b in self.controls)
        object.__setattr__(self, "controls", controls)
        for _, bit in controls:
            if bit not in (0, 1):
                raise SimulationError(f"control bit must be 0 or 1, got {bit}")
        if self.kind == "X" and controls:
            raise SimulationError("X takes no controls; use CX/CCX/MCX")
        if self.kind == "CX" and (len(controls) != 1 or controls[0][1] != 1):
            raise SimulationError("CX takes exactly one 1-control")
        if self.kind == "CCX" and (len(controls) != 2 or any(b != 1 for _, b in controls)):
            raise SimulationError("CCX takes exactly two 1-controls")
        if self.kind == "MCX" and not controls:
            raise SimulationError("MCX needs at least one control")
        qubits = self.qubits
        if len(set(qubits)) != len(qubits):
            raise SimulationError(f"duplicate qubit in {self.kind} on {qubits}")
        if any(q < 0 for q in qubits):
            raise SimulationError(f"negative qubit index in {qubits}")
        if self.kind in ROTATION_KINDS:
            if self.angle is None:
                raise SimulationError(f"{self.kind} needs an angle")
            if not np.all(np.isfinite(self.angle)):
                raise SimulationError(f"{self.kind} angle must be finite")
        elif self.angle is not None:
            raise SimulationError(f"{self.kind} takes no angle")

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.target,) + tuple(q for q, _ in self.controls)

    def validate(self, num_qubits: int) -> None:
        for q in self.qubits:
            if q >= num_qubits:
                raise SimulationError(
                    f"qubit {q} out of range for {num_qubits}-qubit state ({self.kind})"
                )

    def inverse(self) -> GateOp:
        if self.kind in ROTATION_KINDS:
            return GateOp(self.kind, self.target, self.controls, -self.angle)
        return self


def H(q: int) -> GateOp:
    return GateOp("H", q)


def X(q: int) -> GateOp:
    return GateOp("X", q)


def RY(q: int, theta: Angle) -> GateOp:
    return GateOp("RY", q, angle=theta)


def RZ(q: int, theta: Angle) -> GateOp:
    return GateOp("RZ", q, angle=theta)


def Phase(q: int, phi: Angle) -> GateOp:
    return GateOp("PHASE", q, angle=phi)


def CX(control: int, target: int) -> GateOp:
    return GateOp("CX", target, ((control, 1),))


def CCX(c0: int, c1: int, target: int) -> GateOp:
    return GateOp("CCX", target, ((c0, 1), (c1, 1)))


def MCX(controls: Iterable[Control], target: int) -> GateOp:
    return GateOp("MCX", target, tuple(controls))


def add_controls(op: GateOp, controls: Sequence[Control]) -> GateOp:
    """Condition ``op`` on extra controls. X-family gates become MCX."""
    merged = op.controls + tuple(controls)
    kind = "MCX" if op.kind in X_KINDS else op.kind
    return GateOp(kind, op.target, merged, op.angle)


@dataclass
class Circuit:
    num_qubits: int
    ops: list[GateOp] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.num_qubits < 0:
            raise SimulationError("num_qubits must be non-negative")
        for op in self.ops:
            op.validate(self.num_qubits)

    def append(self, op: GateOp) -> Circuit:
        op.validate(self.num_qubits)
        self.ops.append(op)
        return self

    def extend(self, ops: Iterable[GateOp]) -> Circuit:
        for op in ops:
            self.append(op)
        return self

    def inverse(self) -> Circuit:
        return Circuit(self.num_qubits, [op.inverse() for op in reversed(self.ops)])

    def controlled(self, controls: Sequence[Control], num_qubits: int | None = None) -> Circuit:
        width = self.num_qubits if num_qubits is None else num_qubits
        return Circuit(width, [add_controls(op, controls) for op in self.ops])

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)


@dataclass(frozen=True)
class StateVector:
    num_qubits: int
    amps: np.ndarray

    def __post_init__(self) -> None:
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        if amps.size != 1 << self.num_qubits:
            raise SimulationError(
                f"expected {1 << self.num_qubits} amplitudes, got {amps.size}"
            )
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)

    @property
    def norm_squared(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2


def _check_width(num_qubits: int) -> None:
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise ResourceLimitError(
            f"num_qubits must be in [1, {MAX_QUBITS}], got {num_qubits}"
        )


def new_zero_state(num_qubits: int) -> StateVector:
    _check_width(num_qubits)
    amps = np.zeros(1 << num_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(num_qubits, amps)


def basis_state(num_qubits: int, index: int) -> StateVector:
    _check_width(num_qubits)
    amps = np.zeros(1 << num_qubits, dtype=complex)
    amps[index] = 1.0
    return StateVector(num_qubits, amps)


# --- kernel -----------------------------------------------------------------


def _coef(value, ndim: int):
    """Broadcast a scalar or per-batch coefficient against a sliced tensor."""
    if np.ndim(value) == 0:
        return value
    return np.reshape(value, (-1,) + (1,) * (ndim - 1))


def _apply_op(psi: np.ndarray, op: GateOp, num_qubits: int) -> None:
    """Apply ``op`` in place to a batched tensor of shape (B, 2, ..., 2)."""
    idx = [slice(None)] * (num_qubits + 1)
    for q, bit in op.controls:
        idx[num_qubits - q] = bit
    t = num_qubits - op.target
    idx[t] = 0
    i0 = tuple(idx)
    idx[t] = 1
    i1 = tuple(idx)

    kind = op.kind
    if kind in X_KINDS:
        a = psi[i0].copy()
        psi[i0] = psi[i1]
        psi[i1] = a
    elif kind == "H":
        a = psi[i0].copy()
        b = psi[i1]
        psi[i0] = (a + b) * _INV_SQRT2
        psi[i1] = (a - b) * _INV_SQRT2
    elif kind == "PHASE":
        s = psi[i1]
        s *= _coef(np.exp(1j * op.angle), s.ndim)
    elif kind == "RZ":
        s0 = psi[i0]
        ph = np.exp(0.5j * op.angle)
        s0 *= _coef(np.conj(ph), s0.ndim)
        s1 = psi[i1]
        s1 *= _coef(ph, s1.ndim)
    elif kind == "RY":
        a = psi[i0].copy()
        b = psi[i1].copy()
        c = _coef(np.cos(0.5 * op.angle), a.ndim)
        s = _coef(np.sin(0.5 * op.angle), a.ndim)
        psi[i0] = c * a - s * b
        psi[i1] = s * a + c * b
    else:  # pragma: no cover - guarded by GateOp
        raise SimulationError(f"unhandled gate {kind}")


def _batch_size(circuit: Circuit) -> int:
    sizes = {np.size(op.angle) for op in circuit.ops if np.ndim(op.angle) > 0}
    if len(sizes) > 1:
        raise SimulationError(f"inconsistent angle batch sizes {sorted(sizes)}")
    return sizes.pop() if sizes else 1


def evolve(amps: np.ndarray, circuit: Circuit) -> np.ndarray:
    """Run ``circuit`` on a batch of amplitude rows, returning a new (B, 2**q) array.

    ``amps`` may be a single row (broadcast to the circuit's batch size) or
    already hold one row per batch entry.
    """
    q = circuit.num_qubits
    rows = np.atleast_2d(np.asarray(amps, dtype=complex))
    if rows.shape[1] != 1 << q:
        raise SimulationError(f"state width {rows.shape[1]} does not match {q} qubits")
    batch = _batch_size(circuit)
    if rows.shape[0] == 1 and batch > 1:
        rows = np.repeat(rows, batch, axis=0)
    elif batch > 1 and rows.shape[0] != batch:
        raise SimulationError(f"state batch {rows.shape[0]} != angle batch {batch}")
    psi = rows.copy().reshape((rows.shape[0],) + (2,) * q)
    for op in circuit.ops:
        _apply_op(psi, op, q)
    return psi.reshape(rows.shape[0], -1)


def run_batch(circuit: Circuit) -> np.ndarray:
    """Run a (possibly batched-angle) circuit from |0...0>; returns (B, 2**q) amplitudes."""
    _check_width(circuit.num_qubits)
    zero = np.zeros((1, 1 << circuit.num_qubits), dtype=complex)
    zero[0, 0] = 1.0
    return evolve(zero, circuit)


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    gate.validate(state.num_qubits)
    if np.ndim(gate.angle) > 0:
        raise SimulationError("apply_gate takes scalar angles only")
    psi = state.amps.copy().reshape((1,) + (2,) * state.num_qubits)
    _apply_op(psi, gate, state.num_qubits)
    return StateVector(state.num_qubits, psi.reshape(-1))


def apply_circuit(state: StateVector, circuit: Circuit) -> StateVector:
    if circuit.num_qubits != state.num_qubits:
        raise SimulationError(
            f"circuit has {circuit.num_qubits} qubits, state has {state.num_qubits}"
        )
    for op in circuit.ops:
        op.validate(state.num_qubits)
    out = evolve(state.amps, circuit)
    if out.shape[0] != 1:
        raise SimulationError("apply_circuit takes scalar angles only")
    return StateVector(state.num_qubits, out[0])


# --- measurement ------------------------------------------------------------


def _check_qubits(qubits: Sequence[int], num_qubits: int) -> None:
    if len(set(qubits)) != len(qubits):
        raise SimulationError(f"duplicate qubits {list(qubits)}")
    for q in qubits:
        if not 0 <= q < num_qubits:
            raise SimulationError(f"qubit {q} out of range for {num_qubits} qubits")


def marginal_probs(amps: np.ndarray, num_qubits: int, qubits: Sequence[int]) -> np.ndarray:
    """Batched marginal: (B, 2**q) amplitudes -> (B, 2**len(qubits)) probabilities.

    Output index bit ``j`` is the value of ``qubits[j]``.
    """
    _check_qubits(qubits, num_qubits)
    rows = np.atleast_2d(amps)
    p = (rows.real**2 + rows.imag**2).reshape((rows.shape[0],) + (2,) * num_qubits)
    keep = [num_qubits - q for q in qubits]
    drop = tuple(ax for ax in range(1, num_qubits + 1) if ax not in keep)
    p = p.sum(axis=drop) if drop else p
    # remaining axes are in descending-qubit order; reorder to MSB = qubits[-1]
    remaining = sorted(keep)
    order = [0] + [1 + remaining.index(ax) for ax in reversed(keep)]
    return np.transpose(p, order).reshape(rows.shape[0], -1)


def prob_of_bits(state: StateVector, qubits: Sequence[int], pattern: Sequence[int]) -> float:
    if len(qubits) != len(pattern):
        raise SimulationError("qubits and pattern lengths differ")
    _check_qubits(qubits, state.num_qubits)
    p = state.probabilities().reshape((2,) * state.num_qubits)
    idx = [slice(None)] * state.num_qubits
    for q, bit in zip(qubits, pattern):
        if bit not in (0, 1):
            raise SimulationError(f"pattern bits must be 0/1, got {bit}")
        idx[state.num_qubits - 1 - q] = bit
    return float(np.sum(p[tuple(idx)]))


def marginal_distribution(state: StateVector, qubits: Sequence[int]) -> np.ndarray:
    return marginal_probs(state.amps, state.num_qubits, qubits)[0]
