"""Statevector simulation and parallel-data training for quantum classifiers."""

from .circuits import BINARY, MULTICLASS, BaseArch, base_circuit, classify
from .parallel import OrderedDataset, conventional_loss, integrated_loss
from .simcore import Circuit, GateOp, StateVector, apply_circuit, apply_gate, new_zero_state

__version__ = "0.1.0"

__all__ = [
    "BINARY",
    "MULTICLASS",
    "BaseArch",
    "Circuit",
    "GateOp",
    "OrderedDataset",
    "StateVector",
    "apply_circuit",
    "apply_gate",
    "base_circuit",
    "classify",
    "conventional_loss",
    "integrated_loss",
    "new_zero_state",
]
