"""Integrated circuit that evaluates a whole training set in one execution.

Qubit layout (little-endian, see simcore):

* qubit 0            label qubit
* qubits 1..m        data qubits; base-circuit qubit j sits at global 1 + j,
                     so the class qubits are 1..k
* qubits m+1..m+n    register; qubit m+n is the most significant index bit

The register indexes the N = 2**n training samples, which are stored in class
blocks: class c occupies indices [c * 2**(n-k), (c+1) * 2**(n-k)). After the
label-extraction flips, P(label qubit = 1) is the mean over samples of the
probability that the base circuit reports the sample's own class.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .circuits import (
    BINARY,
    BaseArch,
    check_features,
    check_params,
    class_distributions,
    layer_params,
    variational_layer,
    zz_feature_map,
)
from .simcore import MCX, Circuit, GateOp, H, add_controls, marginal_probs, run_batch

LOSS_VARIANTS = ("prob", "cross_entropy")
_CE_FLOOR = 1e-12


@dataclass(frozen=True)
class IntegratedLayout:
    data_qubits: int
    register_qubits: int
    class_bits: int

    def __post_init__(self) -> None:
        if self.register_qubits < 0 or self.data_qubits < 2:
            raise ValueError("invalid layout widths")

    @classmethod
    def for_dataset(cls, arch: BaseArch, size: int) -> IntegratedLayout:
        n = int(round(math.log2(size))) if size > 0 else -1
        if size < 1 or 1 << n != size:
            raise ValueError(f"dataset size must be a power of two, got {size}")
        return cls(arch.data_qubits, n, arch.class_bits)

    label_qubit = 0

    @property
    def size(self) -> int:
        return 1 << self.register_qubits

    @property
    def num_qubits(self) -> int:
        return 1 + self.data_qubits + self.register_qubits

    @property
    def data(self) -> list[int]:
        return list(range(1, 1 + self.data_qubits))

    @property
    def register(self) -> list[int]:
        """Register qubits, least significant index bit first."""
        m = self.data_qubits
        return list(range(m + 1, m + 1 + self.register_qubits))

    @property
    def class_qubits(self) -> list[int]:
        return [1 + j for j in range(self.class_bits)]

    def index_controls(self, i: int) -> tuple[tuple[int, int], ...]:
        return tuple((q, (i >> b) & 1) for b, q in enumerate(self.register))


@dataclass
class OrderedDataset:
    """N samples in class blocks, ready for the register encoder."""

    X: np.ndarray
    y: np.ndarray
    arch: BaseArch = BINARY
    layout: IntegratedLayout = field(init=False)

    def __post_init__(self) -> None:
        self.X = np.asarray(self.X, dtype=float).reshape(-1, 2)
        self.y = np.asarray(self.y, dtype=int).reshape(-1)
        if self.X.shape[0] != self.y.size:
            raise ValueError("X and y lengths differ")
        check_features(self.X[:, 0], self.X[:, 1])
        self.layout = IntegratedLayout.for_dataset(self.arch, self.y.size)
        n_cls = self.arch.num_classes
        if np.any((self.y < 0) | (self.y >= n_cls)):
            raise ValueError(f"labels must be in [0, {n_cls})")
        if self.size > 1:
            if self.size % n_cls:
                raise ValueError(f"dataset size {self.size} not divisible by {n_cls} classes")
            block = self.size // n_cls
            counts = np.bincount(self.y, minlength=n_cls)
            if np.any(counts != block):
                raise ValueError(f"unbalanced dataset: class counts {counts.tolist()}")
            expected = np.repeat(np.arange(n_cls), block)
            if np.any(self.y != expected):
                raise ValueError("samples are not ordered in class blocks")

    @classmethod
    def from_unordered(cls, X, y, arch: BaseArch = BINARY) -> OrderedDataset:
        y = np.asarray(y, dtype=int)
        order = np.argsort(y, kind="stable")
        return cls(np.asarray(X, dtype=float)[order], y[order], arch)

    @property
    def size(self) -> int:
        return int(self.y.size)

    @cached_property
    def encoder_ops(self) -> list[GateOp]:
        return encoder_gate_level(self).ops


def register_superposition(layout: IntegratedLayout) -> Circuit:
    return Circuit(layout.num_qubits, [H(q) for q in layout.register])


def encoder_gate_level(dataset: OrderedDataset) -> Circuit:
    """Index-controlled feature maps: for each i, map(x_i) conditioned on register == i."""
    layout = dataset.layout
    circuit = Circuit(layout.num_qubits)
    offset = layout.data[0]
    for i, (x0, x1) in enumerate(dataset.X):
        controls = layout.index_controls(i)
        for op in zz_feature_map(x0, x1, offset):
            circuit.append(add_controls(op, controls) if controls else op)
    return circuit


def encoder_direct(dataset: OrderedDataset) -> np.ndarray:
    """Exact encoded state (1/sqrt N) sum_i |0>_label |psi(x_i)>_data |i>_reg, as amplitudes."""
    layout = dataset.layout
    m = layout.data_qubits
    fmap = Circuit(m, zz_feature_map(dataset.X[:, 0], dataset.X[:, 1], 0))
    psi = run_batch(fmap)
    if psi.shape[0] == 1 and dataset.size > 1:
        psi = np.repeat(psi, dataset.size, axis=0)
    amps = np.zeros((dataset.size, 1 << m, 2), dtype=complex)
    amps[:, :, 0] = psi / math.sqrt(dataset.size)
    return amps.reshape(-1)


def variational_block(
    dataset: OrderedDataset, params: Sequence[float], reupload: bool = True
) -> Circuit:
    """Re-uploading layers on the data qubits.

    Layers after the first re-apply the index-controlled encoder so that each
    register sector sees exactly its sample's base circuit. The first encoding
    pass is not included (it belongs to the encoder stage).
    """
    layout = dataset.layout
    arch = dataset.arch
    circuit = Circuit(layout.num_qubits)
    offset = layout.data[0]
    for i, theta in enumerate(layer_params(arch, params)):
        if i > 0 and reupload:
            circuit.ops.extend(dataset.encoder_ops)
        circuit.extend(variational_layer(arch, theta, offset))
    return circuit


def label_extraction(layout: IntegratedLayout) -> Circuit:
    """One MCX per class c: flip the label when class qubits and register MSBs both read c."""
    k = layout.class_bits
    if layout.register_qubits < k:
        raise ValueError("register too small to carry the class index")
    msbs = layout.register[-k:]
    circuit = Circuit(layout.num_qubits)
    for c in range(1 << k):
        bits = [(c >> j) & 1 for j in range(k)]
        controls = [(q, b) for q, b in zip(layout.class_qubits, bits)]
        controls += [(q, b) for q, b in zip(msbs, bits)]
        circuit.append(MCX(controls, layout.label_qubit))
    return circuit


def integrated_circuit(
    dataset: OrderedDataset, params: Sequence[float], reupload: bool = True
) -> Circuit:
    layout = dataset.layout
    ops = register_superposition(layout).ops
    ops += dataset.encoder_ops
    ops += variational_block(dataset, params, reupload).ops
    ops += label_extraction(layout).ops
    # fragments are validated against the layout as they are built
    circuit = Circuit(layout.num_qubits)
    circuit.ops = ops
    return circuit


def label_probability(dataset: OrderedDataset, params: Sequence[float], reupload: bool = True) -> float:
    """P(label qubit = 1) after one execution of the integrated circuit."""
    amps = run_batch(integrated_circuit(dataset, params, reupload))
    return float(marginal_probs(amps, dataset.layout.num_qubits, [0])[0, 1])


def integrated_loss(dataset: OrderedDataset, params: Sequence[float], reupload: bool = True) -> float:
    return 1.0 - label_probability(dataset, params, reupload)


def correct_class_probs(
    X: np.ndarray, y: np.ndarray, arch: BaseArch, params: Sequence[float], reupload: bool = True
) -> np.ndarray:
    """Per-sample probability that the base circuit reports the true label (one execution each)."""
    X = np.asarray(X, dtype=float).reshape(-1, 2)
    y = np.asarray(y, dtype=int)
    dist = class_distributions(arch, X[:, 0], X[:, 1], params, reupload)
    return dist[np.arange(y.size), y]


def conventional_loss(
    dataset: OrderedDataset | tuple[np.ndarray, np.ndarray],
    params: Sequence[float],
    arch: BaseArch | None = None,
    loss: str = "prob",
    reupload: bool = True,
) -> float:
    """Empirical risk: mean per-sample loss over N separate base-circuit executions.

    ``loss="prob"`` uses 1 - P(correct); ``"cross_entropy"`` uses -log P(correct).
    Plain ``(X, y)`` tuples need not be ordered.
    """
    if isinstance(dataset, OrderedDataset):
        X, y, arch = dataset.X, dataset.y, dataset.arch
    else:
        X, y = dataset
        if arch is None:
            raise ValueError("arch is required for unordered (X, y) data")
    check_params(params)
    p = correct_class_probs(X, y, arch, params, reupload)
    if loss == "prob":
        return float(np.mean(1.0 - p))
    if loss == "cross_entropy":
        return float(np.mean(-np.log(np.maximum(p, _CE_FLOOR))))
    raise ValueError(f"unknown loss variant {loss!r}; choose from {LOSS_VARIANTS}")
