import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paraqml import oracles
from paraqml.circuits import (
    BINARY,
    MULTICLASS,
    BaseArch,
    accuracy,
    base_circuit,
    class_distributions,
    classify,
    decide,
    predict,
    two_local_2q,
    two_local_4q,
    zz_feature_map,
)
from paraqml.simcore import (
    CX,
    RY,
    RZ,
    Circuit,
    H,
    Phase,
    StateVector,
    X,
    apply_circuit,
    marginal_distribution,
    new_zero_state,
    prob_of_bits,
)

coord = st.floats(-1, 1, allow_nan=False)
angle = st.floats(-math.pi, math.pi, allow_nan=False)


def run(num_qubits, ops):
    return apply_circuit(new_zero_state(num_qubits), Circuit(num_qubits, ops)).amps


def oracle_run(num_qubits, ops):
    return oracles.circuit_unitary(ops, num_qubits) @ oracles.zero_state(num_qubits)


# --- feature map ------------------------------------------------------------


def test_feature_map_gate_list():
    ops = zz_feature_map(0.3, -0.4, qubit_offset=2)
    assert [op.kind for op in ops] == ["H", "H", "PHASE", "PHASE", "CX", "PHASE", "CX"]
    assert [op.target for op in ops] == [2, 3, 2, 3, 3, 3, 3]
    assert ops[4].controls == ((2, 1),) and ops[6].controls == ((2, 1),)
    assert ops[2].angle == 0.6 and ops[3].angle == -0.8
    assert ops[5].angle == pytest.approx(2 * (math.pi - 0.3) * (math.pi + 0.4), abs=1e-15)


def test_feature_map_cross_term_vanishes_at_pi():
    ops = zz_feature_map(math.pi, math.pi)
    assert ops[5].angle == 0.0
    entangler = oracles.circuit_unitary(ops[4:], 2)
    assert np.max(np.abs(entangler - np.eye(4))) < 1e-15


def test_feature_map_zero_point_matches_oracle():
    ops = zz_feature_map(0.0, 0.0)
    assert np.max(np.abs(run(2, ops) - oracle_run(2, ops))) < 1e-12


def test_feature_map_gate_count():
    assert len(zz_feature_map(0.1, 0.2)) == 7


def test_feature_map_rejects_non_finite():
    with pytest.raises(ValueError):
        zz_feature_map(float("nan"), 0.0)


# --- ansaetze ---------------------------------------------------------------


def test_two_local_2q_zero_is_cx():
    u = oracles.circuit_unitary(two_local_2q(np.zeros(8)), 2)
    assert np.max(np.abs(u - oracles.dense_unitary(CX(0, 1), 2))) < 1e-15


def test_two_local_2q_flips_first_qubit():
    amps = run(2, two_local_2q([math.pi, 0, 0, 0, 0, 0, 0, 0]))
    # RY(pi) puts qubit 0 in |1>, the CX then also flips qubit 1
    assert abs(prob_of_bits_amps(amps, 2, 0, 1) - 1.0) < 1e-15


def prob_of_bits_amps(amps, q, qubit, bit):
    return prob_of_bits(StateVector(q, amps), [qubit], [bit])


def test_two_local_2q_ordering():
    ops = two_local_2q(np.arange(8.0), qubit_offset=1)
    expected = [
        ("RY", 1, 0.0), ("RY", 2, 1.0), ("RZ", 1, 2.0), ("RZ", 2, 3.0), ("CX", 2, None),
        ("RY", 1, 4.0), ("RY", 2, 5.0), ("RZ", 1, 6.0), ("RZ", 2, 7.0),
    ]
    assert [(op.kind, op.target, op.angle) for op in ops] == expected


@pytest.mark.parametrize("seed", range(5))
def test_two_local_2q_matches_oracle(seed):
    ops = two_local_2q(np.random.default_rng(seed).uniform(-math.pi, math.pi, 8))
    assert np.max(np.abs(run(2, ops) - oracle_run(2, ops))) < 1e-12


def test_two_local_4q_zero_is_cx_chain():
    ops = two_local_4q(np.zeros(16))
    u = oracles.circuit_unitary(ops, 4)
    chain = oracles.circuit_unitary([CX(0, 1), CX(1, 2), CX(2, 3)], 4)
    assert np.max(np.abs(u - chain)) < 1e-15
    assert len(ops) == 19


@pytest.mark.parametrize("seed", range(5))
def test_two_local_4q_matches_oracle(seed):
    ops = two_local_4q(np.random.default_rng(seed).uniform(-math.pi, math.pi, 16))
    assert np.max(np.abs(run(4, ops) - oracle_run(4, ops))) < 1e-12


@pytest.mark.parametrize("fn,n", [(two_local_2q, 7), (two_local_2q, 9), (two_local_4q, 15), (two_local_4q, 17)])
def test_ansatz_arity(fn, n):
    with pytest.raises(ValueError):
        fn(np.zeros(n))


# --- base circuit -----------------------------------------------------------


def test_arch_shapes():
    assert (BINARY.data_qubits, BINARY.reuploading_layers, BINARY.params_per_layer, BINARY.class_bits) == (2, 4, 8, 1)
    assert (MULTICLASS.data_qubits, MULTICLASS.reuploading_layers, MULTICLASS.params_per_layer, MULTICLASS.class_bits) == (4, 2, 16, 2)
    with pytest.raises(ValueError):
        BaseArch("bad", 2, 3, 8, 1)


def test_base_circuit_gate_counts():
    assert len(base_circuit(BINARY, 0.1, 0.2, np.zeros(32))) == 64
    assert len(base_circuit(MULTICLASS, 0.1, 0.2, np.zeros(32))) == 52


def test_binary_zero_params_matches_explicit_gate_list():
    x0, x1 = 0.37, -0.81
    cross = 2 * (math.pi - x0) * (math.pi - x1)
    fmap = [H(0), H(1), Phase(0, 2 * x0), Phase(1, 2 * x1), CX(0, 1), Phase(1, cross), CX(0, 1)]
    ansatz = [RY(0, 0), RY(1, 0), RZ(0, 0), RZ(1, 0), CX(0, 1), RY(0, 0), RY(1, 0), RZ(0, 0), RZ(1, 0)]
    explicit = (fmap + ansatz) * 4
    fast = apply_circuit(new_zero_state(2), base_circuit(BINARY, x0, x1, np.zeros(32))).amps
    assert np.max(np.abs(fast - oracle_run(2, explicit))) < 1e-12


def test_parameters_consumed_layer_major():
    p = np.arange(32) / 10.0
    ops = base_circuit(BINARY, 0.0, 0.0, p).ops
    angles = [op.angle for op in ops if op.kind in ("RY", "RZ")]
    assert angles == list(p)
    ops = base_circuit(MULTICLASS, 0.0, 0.0, p).ops
    assert [op.angle for op in ops if op.kind in ("RY", "RZ")] == list(p)


def test_multiclass_feature_map_on_first_two_qubits():
    ops = base_circuit(MULTICLASS, 0.2, 0.1, np.zeros(32)).ops
    fmap_targets = {op.target for op in ops if op.kind in ("H", "PHASE")}
    assert fmap_targets == {0, 1}


def test_single_pass_variant_encodes_once():
    ops = base_circuit(BINARY, 0.2, 0.1, np.zeros(32), reupload=False).ops
    assert sum(op.kind == "H" for op in ops) == 2
    assert len(ops) == 7 + 4 * 9


@pytest.mark.parametrize("arch", [BINARY, MULTICLASS])
@pytest.mark.parametrize("bad", [(1.5, 0.0), (0.0, -1.01), (float("nan"), 0.0), (0.0, float("inf"))])
def test_out_of_domain_inputs_rejected(arch, bad):
    with pytest.raises(ValueError):
        base_circuit(arch, bad[0], bad[1], np.zeros(32))


@pytest.mark.parametrize("n", [31, 33])
def test_param_count_contract(n):
    for arch in (BINARY, MULTICLASS):
        with pytest.raises(ValueError):
            base_circuit(arch, 0.0, 0.0, np.zeros(n))


def test_non_finite_params_rejected():
    p = np.zeros(32)
    p[3] = np.nan
    with pytest.raises(ValueError):
        base_circuit(BINARY, 0.0, 0.0, p)


# --- classification ---------------------------------------------------------


def test_feature_map_only_class_probability_matches_oracle():
    x0, x1 = -0.6, 0.45
    ops = zz_feature_map(x0, x1)
    psi = oracle_run(2, ops)
    p0_oracle = abs(psi[0]) ** 2 + abs(psi[2]) ** 2
    p0 = prob_of_bits_amps(run(2, ops), 2, 0, 0)
    assert abs(p0 - p0_oracle) < 1e-12


def test_binary_tie_goes_to_label_one():
    assert decide(BINARY, np.array([[0.5, 0.5]]))[0] == 1
    assert decide(BINARY, np.array([[0.5 + 1e-12, 0.5 - 1e-12]]))[0] == 0


def test_multiclass_mapping_of_engineered_state():
    # |q1 q0> = |10>, qubits 2 and 3 in superposition
    state = apply_circuit(new_zero_state(4), Circuit(4, [X(1), H(2), H(3)]))
    dist = marginal_distribution(state, [0, 1])
    assert np.allclose(dist, [0, 0, 1, 0], atol=1e-15)
    assert decide(MULTICLASS, dist)[0] == 2


def test_multiclass_tie_goes_to_smallest_label():
    assert decide(MULTICLASS, np.array([[0.1, 0.4, 0.4, 0.1]]))[0] == 1


def test_classify_agrees_with_prob_of_bits():
    p = np.random.default_rng(0).uniform(-math.pi, math.pi, 32)
    label, dist = classify(BINARY, 0.2, -0.7, p)
    state = apply_circuit(new_zero_state(2), base_circuit(BINARY, 0.2, -0.7, p))
    p0 = prob_of_bits(state, [0], [0])
    assert abs(dist[0] - p0) < 1e-14
    assert label == (0 if p0 > 0.5 else 1)


def test_batched_distributions_match_single_runs():
    rng = np.random.default_rng(1)
    X = rng.uniform(-1, 1, (8, 2))
    p = rng.uniform(-math.pi, math.pi, 32)
    for arch in (BINARY, MULTICLASS):
        batch = class_distributions(arch, X[:, 0], X[:, 1], p)
        for i in range(8):
            state = apply_circuit(new_zero_state(arch.data_qubits), base_circuit(arch, X[i, 0], X[i, 1], p))
            single = marginal_distribution(state, list(arch.class_qubits))
            assert np.max(np.abs(batch[i] - single)) < 1e-13


def test_predict_and_accuracy():
    rng = np.random.default_rng(2)
    X = rng.uniform(-1, 1, (6, 2))
    p = rng.uniform(-math.pi, math.pi, 32)
    labels = predict(BINARY, X, p)
    assert accuracy(BINARY, X, labels, p) == 1.0
    assert accuracy(BINARY, X, 1 - labels, p) == 0.0


@settings(max_examples=40, deadline=None)
@given(coord, coord, st.lists(angle, min_size=32, max_size=32), st.sampled_from([BINARY, MULTICLASS]))
def test_distributions_sum_to_one(x0, x1, params, arch):
    _, dist = classify(arch, x0, x1, params)
    assert abs(dist.sum() - 1.0) < 1e-10
    assert np.all(dist >= -1e-15)


@settings(max_examples=20, deadline=None)
@given(coord, coord, st.lists(angle, min_size=32, max_size=32), st.sampled_from([BINARY, MULTICLASS]))
def test_circuit_construction_is_deterministic(x0, x1, params, arch):
    a = base_circuit(arch, x0, x1, params)
    b = base_circuit(arch, x0, x1, params)
    assert a.ops == b.ops


@settings(max_examples=15, deadline=None)
@given(coord, coord, st.lists(angle, min_size=32, max_size=32), st.sampled_from([BINARY, MULTICLASS]))
def test_base_circuit_matches_oracle(x0, x1, params, arch):
    circ = base_circuit(arch, x0, x1, params)
    fast = apply_circuit(new_zero_state(arch.data_qubits), circ).amps
    assert np.max(np.abs(fast - oracle_run(arch.data_qubits, circ.ops))) < 1e-12
