import math

import numpy as np
import pytest

from phi4vqe.circuit_sim import (
    Circuit,
    Counts,
    NoiseModel,
    ansatz_entangled,
    ansatz_product,
    apply_circuit,
    calibrate_readout,
    counts_expectation,
    expectation_exact,
    measure_pauli,
    measure_pauli_density,
    ry_matrix,
    simulate_density,
    zero_state,
)
from phi4vqe.qubit_encoding import PauliSum, encode_matrix, pauli_word_matrix


def random_state(n_qubits, rng):
    v = rng.normal(size=2 ** n_qubits) + 1j * rng.normal(size=2 ** n_qubits)
    return v / np.linalg.norm(v)


# ---------------------------------------------------------------- gates

def test_ry_matrix_convention():
    c, s = math.cos(0.15), math.sin(0.15)
    assert np.allclose(ry_matrix(0.3), [[c, -s], [s, c]], atol=1e-15)


def test_ry_pi_flips_zero():
    state = apply_circuit(Circuit(1, (("ry", 0, math.pi),)), zero_state(1))
    assert np.allclose(state, [0.0, 1.0], atol=1e-15)


def test_cnot_flips_target_when_control_set():
    initial = np.zeros(4)
    initial[2] = 1.0  # |10>, qubit 0 is the most significant bit
    state = apply_circuit(Circuit(2, (("cx", 0, 1),)), initial)
    assert np.allclose(state, [0.0, 0.0, 0.0, 1.0], atol=1e-15)


def test_cnot_idle_when_control_clear():
    initial = np.zeros(4)
    initial[1] = 1.0  # |01>
    state = apply_circuit(Circuit(2, (("cx", 0, 1),)), initial)
    assert np.allclose(state, initial, atol=1e-15)


def test_cnot_reversed_orientation():
    initial = np.zeros(4)
    initial[1] = 1.0  # |01>: qubit 1 set, so cx 1->0 flips qubit 0
    state = apply_circuit(Circuit(2, (("cx", 1, 0),)), initial)
    expected = np.zeros(4)
    expected[3] = 1.0
    assert np.allclose(state, expected, atol=1e-15)


def test_controlled_rotation_compile_idles_on_clear_control():
    theta = 1.3
    prep = Circuit(2, (("ry", 1, 0.7),))
    start = apply_circuit(prep, zero_state(2))
    gates = (("cx", 0, 1), ("ry", 1, -theta / 2.0), ("cx", 0, 1), ("ry", 1, theta / 2.0))
    state = apply_circuit(Circuit(2, gates), start)
    assert np.allclose(state, start, atol=1e-12)


def test_circuit_preserves_norm_and_reality():
    rng = np.random.default_rng(21)
    for _ in range(10):
        gates = []
        for _ in range(8):
            if rng.random() < 0.6:
                gates.append(("ry", int(rng.integers(2)), float(rng.uniform(-3, 3))))
            else:
                c = int(rng.integers(2))
                gates.append(("cx", c, 1 - c))
        state = apply_circuit(Circuit(2, tuple(gates)), zero_state(2))
        assert abs(np.linalg.norm(state) - 1.0) < 1e-12
        assert np.max(np.abs(state.imag)) < 1e-14


def test_circuit_validation():
    with pytest.raises(ValueError):
        Circuit(2, (("rz", 0, 1.0),))
    with pytest.raises(ValueError):
        Circuit(2, (("ry", 2, 1.0),))
    with pytest.raises(ValueError):
        Circuit(2, (("cx", 1, 1),))


def test_circuit_to_text():
    text = ansatz_entangled(0.5, 0.25, 1.0).to_text()
    assert text.splitlines() == [
        "ry q0 0.5", "ry q1 0.25", "cx q0 q1",
        "ry q1 -0.5", "cx q0 q1", "ry q1 0.5",
    ]


# ---------------------------------------------------------------- ansatz circuits

def test_ansatz_product_zero_angles_is_vacuum():
    state = apply_circuit(ansatz_product(0.0, 0.0), zero_state(2))
    assert np.allclose(state, [1.0, 0.0, 0.0, 0.0], atol=1e-15)


def test_ansatz_product_pi_excites_first_qubit():
    state = apply_circuit(ansatz_product(math.pi, 0.0), zero_state(2))
    assert np.allclose(state, [0.0, 0.0, 1.0, 0.0], atol=1e-15)


def test_ansatz_entangled_reduces_to_product():
    rng = np.random.default_rng(22)
    for _ in range(20):
        t0, t1 = rng.uniform(-math.pi, math.pi, size=2)
        a = apply_circuit(ansatz_product(t0, t1), zero_state(2))
        b = apply_circuit(ansatz_entangled(t0, t1, 0.0), zero_state(2))
        assert np.max(np.abs(a - b)) < 1e-12


def test_ansatz_entangled_cnot_budget():
    gates = ansatz_entangled(0.1, 0.2, 0.3).gates
    assert sum(1 for g in gates if g[0] == "cx") == 2


def test_ansatz_entangled_bell_point():
    state = apply_circuit(ansatz_entangled(math.pi / 2.0, 0.0, math.pi), zero_state(2))
    r = 1.0 / math.sqrt(2.0)
    assert np.allclose(state, [r, 0.0, 0.0, r], atol=1e-12)


def test_ansatz_entangled_full_excitation():
    state = apply_circuit(ansatz_entangled(math.pi, 0.0, math.pi), zero_state(2))
    assert np.allclose(np.abs(state), [0.0, 0.0, 0.0, 1.0], atol=1e-12)


# ---------------------------------------------------------------- exact expectations

def test_expectation_vacuum():
    H = PauliSum(terms=((1.0, "ZI"),), qubit_count=2)
    assert expectation_exact(zero_state(2), H) == pytest.approx(1.0, abs=1e-15)


def test_expectation_doubly_excited():
    state = np.zeros(4)
    state[3] = 1.0
    H = PauliSum(terms=((0.5, "ZI"), (0.5, "IZ")), qubit_count=2)
    assert expectation_exact(state, H) == pytest.approx(-1.0, abs=1e-15)


def test_expectation_bell_correlations():
    bell = apply_circuit(ansatz_entangled(math.pi / 2.0, 0.0, math.pi), zero_state(2))
    assert expectation_exact(bell, PauliSum(((1.0, "ZZ"),), 2)) == pytest.approx(1.0, abs=1e-12)
    assert expectation_exact(bell, PauliSum(((1.0, "XX"),), 2)) == pytest.approx(1.0, abs=1e-12)


def test_expectation_matches_dense_contraction():
    rng = np.random.default_rng(23)
    state = random_state(2, rng)
    M = rng.normal(size=(4, 4))
    M = (M + M.T) / 2.0
    H = encode_matrix(M)
    dense = float(np.real(state.conj() @ M @ state))
    assert expectation_exact(state, H) == pytest.approx(dense, abs=1e-12)


# ---------------------------------------------------------------- sampling

def test_measure_pauli_vacuum_is_deterministic():
    counts = measure_pauli(zero_state(1), "Z", 100, NoiseModel.noiseless(1))
    assert counts.counts == {"0": 100}
    assert counts.support == (0,)
    assert counts_expectation(counts) == 1.0


def test_measure_pauli_plus_state_in_x_basis():
    plus = apply_circuit(Circuit(1, (("ry", 0, math.pi / 2.0),)), zero_state(1))
    counts = measure_pauli(plus, "X", 500, NoiseModel.noiseless(1))
    assert counts.counts == {"0": 500}


def test_measure_pauli_identity_positions_are_marginalized():
    counts = measure_pauli(zero_state(2), "ZI", 64, NoiseModel.noiseless(2))
    assert counts.support == (0,)
    assert set(counts.counts) == {"0"}


def test_measure_pauli_all_identity():
    counts = measure_pauli(zero_state(2), "II", 32, NoiseModel.noiseless(2))
    assert counts.support == ()
    assert counts.counts == {"": 32}
    assert counts_expectation(counts) == 1.0


def test_measure_pauli_readout_flip_bias():
    # p(1|0) = 0.1 drags <Z> of the vacuum from 1.0 to about 0.8
    noise = NoiseModel(p10=(0.1,), p01=(0.0,), seed=7)
    counts = measure_pauli(zero_state(1), "Z", 100_000, noise)
    est = counts_expectation(counts)
    se = math.sqrt((1.0 - 0.8 ** 2) / 100_000)
    assert abs(est - 0.8) < 4.0 * se


def test_measure_pauli_statistics_match_exact():
    rng = np.random.default_rng(24)
    state = apply_circuit(ansatz_entangled(0.9, -0.4, 1.7), zero_state(2))
    for word in ("XY", "ZX", "YY"):
        exact = expectation_exact(state, PauliSum(((1.0, word),), 2))
        counts = measure_pauli(state, word, 1_000_000, NoiseModel.noiseless(2, seed=int(rng.integers(1 << 30))))
        se = math.sqrt(max(1.0 - exact ** 2, 1e-12) / 1_000_000)
        assert abs(counts_expectation(counts) - exact) < 4.0 * se


def test_measure_pauli_rejects_word_length_mismatch():
    with pytest.raises(ValueError):
        measure_pauli(zero_state(2), "Z", 10, NoiseModel.noiseless(2))


def test_counts_total_must_match_shots():
    with pytest.raises(ValueError):
        Counts(counts={"0": 3}, shots=4, support=(0,))


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel(p10=(0.6,), p01=(0.5,))
    with pytest.raises(ValueError):
        NoiseModel(p10=(0.0,), p01=(0.0,), p_dep=1.0)
    uniform = NoiseModel.uniform(2, readout=0.03, p_dep=0.02)
    assert uniform.p10 == (0.03, 0.03) and uniform.p01 == (0.03, 0.03)


def test_noise_model_draws_are_reproducible():
    state = apply_circuit(ansatz_entangled(0.5, 0.2, 0.9), zero_state(2))
    a = measure_pauli(state, "ZZ", 4096, NoiseModel.uniform(2, readout=0.05, seed=3))
    b = measure_pauli(state, "ZZ", 4096, NoiseModel.uniform(2, readout=0.05, seed=3))
    assert a.counts == b.counts


# ---------------------------------------------------------------- density matrices

def test_simulate_density_pure_when_noiseless():
    circuit = ansatz_entangled(0.8, 0.3, 1.1)
    rho = simulate_density(circuit, NoiseModel.noiseless(2))
    state = apply_circuit(circuit, zero_state(2))
    assert np.max(np.abs(rho - np.outer(state, state.conj()))) < 1e-12


def test_simulate_density_product_circuit_stays_pure():
    # depolarizing attaches to entangling gates only
    rho = simulate_density(ansatz_product(0.8, 0.3), NoiseModel.uniform(2, p_dep=0.1))
    assert np.real(np.trace(rho @ rho)) == pytest.approx(1.0, abs=1e-12)


def test_simulate_density_entangling_noise_mixes():
    rho = simulate_density(ansatz_entangled(0.8, 0.3, 1.1), NoiseModel.uniform(2, p_dep=0.05))
    purity = float(np.real(np.trace(rho @ rho)))
    assert purity < 1.0 - 1e-4


def test_simulate_density_is_physical():
    rho = simulate_density(ansatz_entangled(1.2, -0.7, 2.0), NoiseModel.uniform(2, p_dep=0.3))
    assert np.real(np.trace(rho)) == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(rho - rho.conj().T)) < 1e-12
    assert np.min(np.linalg.eigvalsh(rho)) > -1e-12


def test_measure_pauli_density_matches_trace_formula():
    noise = NoiseModel.uniform(2, p_dep=0.1, seed=11)
    circuit = ansatz_entangled(0.9, 0.2, 1.4)
    rho = simulate_density(circuit, noise)
    word = "ZZ"
    exact = float(np.real(np.trace(rho @ pauli_word_matrix(word))))
    counts = measure_pauli_density(rho, word, 400_000, NoiseModel.noiseless(2, seed=5))
    se = math.sqrt(max(1.0 - exact ** 2, 1e-12) / 400_000)
    assert abs(counts_expectation(counts) - exact) < 4.0 * se


# ---------------------------------------------------------------- readout calibration

def test_calibrate_readout_noiseless():
    assert calibrate_readout(NoiseModel.noiseless(1), 0, 1000) == (0.0, 0.0)


def test_calibrate_readout_recovers_rates():
    noise = NoiseModel(p10=(0.1,), p01=(0.05,), seed=13)
    p01_hat, p10_hat = calibrate_readout(noise, 0, 100_000)
    assert abs(p10_hat - 0.1) < 4.0 * math.sqrt(0.1 * 0.9 / 100_000)
    assert abs(p01_hat - 0.05) < 4.0 * math.sqrt(0.05 * 0.95 / 100_000)


def test_calibrate_readout_half_rate():
    noise = NoiseModel(p10=(0.5,), p01=(0.0,), seed=17)
    p01_hat, p10_hat = calibrate_readout(noise, 0, 100_000)
    assert p01_hat == 0.0
    assert abs(p10_hat - 0.5) < 4.0 * math.sqrt(0.25 / 100_000)
