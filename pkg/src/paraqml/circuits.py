"""Base classifier circuits: ZZ feature map, TwoLocal ansaetze, re-uploading.

The builders accept either one feature vector ``(x0, x1)`` or arrays of
coordinates; with arrays the feature-map angles become per-sample vectors and
the resulting circuit evaluates every sample in one batched simulation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .simcore import CX, RY, RZ, Circuit, GateOp, H, Phase, marginal_probs, run_batch

N_PARAMS = 32


@dataclass(frozen=True)
class BaseArch:
    name: str
    data_qubits: int
    reuploading_layers: int
    params_per_layer: int
    class_bits: int

    def __post_init__(self) -> None:
        if self.reuploading_layers * self.params_per_layer != N_PARAMS:
            raise ValueError("layers x params_per_layer must equal 32")

    @property
    def num_classes(self) -> int:
        return 1 << self.class_bits

    @property
    def class_qubits(self) -> tuple[int, ...]:
        return tuple(range(self.class_bits))


BINARY = BaseArch("binary2q", data_qubits=2, reuploading_layers=4, params_per_layer=8, class_bits=1)
MULTICLASS = BaseArch("multiclass4q", data_qubits=4, reuploading_layers=2, params_per_layer=16, class_bits=2)
ARCHS = {BINARY.name: BINARY, MULTICLASS.name: MULTICLASS}


def check_features(x0, x1) -> tuple[np.ndarray | float, np.ndarray | float]:
    """Reject non-finite or out-of-domain coordinates. Returns the inputs as floats/arrays."""
    a = np.asarray(x0, dtype=float)
    b = np.asarray(x1, dtype=float)
    if a.shape != b.shape:
        raise ValueError("x0 and x1 shapes differ")
    for v in (a, b):
        if not np.all(np.isfinite(v)):
            raise ValueError("feature values must be finite")
        if np.any(np.abs(v) > 1.0):
            raise ValueError("feature values must lie in [-1, 1]")
    if a.ndim == 0:
        return float(a), float(b)
    return a, b


def check_params(params: Sequence[float], count: int = N_PARAMS) -> np.ndarray:
    p = np.asarray(params, dtype=float).reshape(-1)
    if p.size != count:
        raise ValueError(f"expected {count} parameters, got {p.size}")
    if not np.all(np.isfinite(p)):
        raise ValueError("parameters must be finite")
    return p


def zz_feature_map(x0, x1, qubit_offset: int = 0) -> list[GateOp]:
    """Gate list of the 2-qubit ZZ feature map (one repetition).

    Coordinates are not domain-checked here so the map can be probed at
    arbitrary points; callers that take user data go through check_features.
    """
    a = np.asarray(x0, dtype=float)
    b = np.asarray(x1, dtype=float)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("feature values must be finite")
    if a.ndim == 0:
        a, b = float(a), float(b)
    q0, q1 = qubit_offset, qubit_offset + 1
    cross = 2.0 * (math.pi - a) * (math.pi - b)
    return [
        H(q0),
        H(q1),
        Phase(q0, 2.0 * a),
        Phase(q1, 2.0 * b),
        CX(q0, q1),
        Phase(q1, cross),
        CX(q0, q1),
    ]


def two_local_2q(params: Sequence[float], qubit_offset: int = 0) -> list[GateOp]:
    p = check_params(params, 8)
    q0, q1 = qubit_offset, qubit_offset + 1
    return [
        RY(q0, p[0]), RY(q1, p[1]),
        RZ(q0, p[2]), RZ(q1, p[3]),
        CX(q0, q1),
        RY(q0, p[4]), RY(q1, p[5]),
        RZ(q0, p[6]), RZ(q1, p[7]),
    ]


def two_local_4q(params: Sequence[float], qubit_offset: int = 0) -> list[GateOp]:
    p = check_params(params, 16)
    qs = [qubit_offset + j for j in range(4)]
    ops = [RY(q, p[j]) for j, q in enumerate(qs)]
    ops += [RZ(q, p[4 + j]) for j, q in enumerate(qs)]
    ops += [CX(qs[j], qs[j + 1]) for j in range(3)]
    ops += [RY(q, p[8 + j]) for j, q in enumerate(qs)]
    ops += [RZ(q, p[12 + j]) for j, q in enumerate(qs)]
    return ops


def variational_layer(arch: BaseArch, layer_params: Sequence[float], qubit_offset: int = 0) -> list[GateOp]:
    if arch.data_qubits == 2:
        return two_local_2q(layer_params, qubit_offset)
    return two_local_4q(layer_params, qubit_offset)


def layer_params(arch: BaseArch, params: Sequence[float]) -> list[np.ndarray]:
    p = check_params(params)
    k = arch.params_per_layer
    return [p[i * k:(i + 1) * k] for i in range(arch.reuploading_layers)]


def base_circuit(arch: BaseArch, x0, x1, params: Sequence[float], reupload: bool = True) -> Circuit:
    """Re-uploading classifier: ``layers`` x [feature map on qubits 0-1; ansatz].

    With ``reupload=False`` the feature map is applied once, before the first
    ansatz layer.
    """
    x0, x1 = check_features(x0, x1)
    circuit = Circuit(arch.data_qubits)
    for i, theta in enumerate(layer_params(arch, params)):
        if i == 0 or reupload:
            circuit.extend(zz_feature_map(x0, x1, 0))
        circuit.extend(variational_layer(arch, theta, 0))
    return circuit


def class_distributions(
    arch: BaseArch, x0, x1, params: Sequence[float], reupload: bool = True
) -> np.ndarray:
    """Class probabilities for many samples at once, shape (len(x0), num_classes).

    Column ``c`` is the probability that the class qubits read the bit pattern
    of ``c`` with qubit 0 as the least significant bit.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    circuit = base_circuit(arch, x0, x1, params, reupload)
    amps = run_batch(circuit)
    dist = marginal_probs(amps, arch.data_qubits, arch.class_qubits)
    if dist.shape[0] == 1 and x0.size > 1:
        dist = np.repeat(dist, x0.size, axis=0)
    return dist


def decide(arch: BaseArch, dist: np.ndarray) -> np.ndarray:
    """Labels from class distributions. Binary: label 0 only if p0 > 1/2."""
    dist = np.atleast_2d(dist)
    if arch.class_bits == 1:
        return np.where(dist[:, 0] > 0.5, 0, 1)
    # argmax returns the first maximum, i.e. ties go to the smallest label
    return np.argmax(dist, axis=1)


def classify(
    arch: BaseArch, x0: float, x1: float, params: Sequence[float], reupload: bool = True
) -> tuple[int, np.ndarray]:
    dist = class_distributions(arch, [x0], [x1], params, reupload)
    return int(decide(arch, dist)[0]), dist[0]


def predict(arch: BaseArch, X: np.ndarray, params: Sequence[float], reupload: bool = True) -> np.ndarray:
    X = np.asarray(X, dtype=float).reshape(-1, 2)
    return decide(arch, class_distributions(arch, X[:, 0], X[:, 1], params, reupload))


def accuracy(
    arch: BaseArch, X: np.ndarray, y: np.ndarray, params: Sequence[float], reupload: bool = True
) -> float:
    y = np.asarray(y)
    if y.size == 0:
        return 0.0
    return float(np.mean(predict(arch, X, params, reupload) == y))
