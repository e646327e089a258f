"""Reference constructions used to cross-check the fast paths.

Everything here is deliberately naive: full 2**q x 2**q unitaries built by
enumerating basis states, and truth tables built bit by bit. Only suitable
for a handful of qubits.
"""
from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from .simcore import GateOp


def gate_matrix_2x2(op: GateOp) -> np.ndarray:
    t = op.angle
    if op.kind in ("X", "CX", "CCX", "MCX"):
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if op.kind == "H":
        return np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    if op.kind == "RY":
        return np.array(
            [[math.cos(t / 2), -math.sin(t / 2)], [math.sin(t / 2), math.cos(t / 2)]],
            dtype=complex,
        )
    if op.kind == "RZ":
        return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])
    if op.kind == "PHASE":
        return np.diag([1.0, np.exp(1j * t)])
    raise ValueError(op.kind)


def dense_unitary(op: GateOp, num_qubits: int) -> np.ndarray:
    dim = 1 << num_qubits
    m = gate_matrix_2x2(op)
    u = np.zeros((dim, dim), dtype=complex)
    for j in range(dim):
        if not all((j >> q) & 1 == b for q, b in op.controls):
            u[j, j] = 1.0
            continue
        bit_in = (j >> op.target) & 1
        for bit_out in (0, 1):
            out = (j & ~(1 << op.target)) | (bit_out << op.target)
            u[out, j] += m[bit_out, bit_in]
    return u


def circuit_unitary(ops: Iterable[GateOp], num_qubits: int) -> np.ndarray:
    u = np.eye(1 << num_qubits, dtype=complex)
    for op in ops:
        u = dense_unitary(op, num_qubits) @ u
    return u


def zero_state(num_qubits: int) -> np.ndarray:
    v = np.zeros(1 << num_qubits, dtype=complex)
    v[0] = 1.0
    return v


def mcx_truth_table(controls, target: int, num_qubits: int) -> list[int]:
    """Image of every basis index under a multi-controlled X."""
    out = []
    for j in range(1 << num_qubits):
        if all((j >> q) & 1 == b for q, b in controls):
            j ^= 1 << target
        out.append(j)
    return out
