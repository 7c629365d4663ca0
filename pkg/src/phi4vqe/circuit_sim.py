"""Minimal gate-model simulator for the two variational ansatz circuits.

Gates are RotY(theta) = exp(-i theta Y / 2) and CNOT. Qubit 0 is the most
significant bit of a basis index. Sampling, readout bit-flips, and the
optional two-qubit depolarizing channel all draw from the one seeded stream
owned by the experiment's NoiseModel, so runs are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .qubit_encoding import PAULI, PauliSum

__all__ = [
    "Circuit",
    "NoiseModel",
    "Counts",
    "ry_matrix",
    "zero_state",
    "apply_circuit",
    "ansatz_product",
    "ansatz_entangled",
    "expectation_exact",
    "measure_pauli",
    "measure_pauli_density",
    "counts_expectation",
    "simulate_density",
    "calibrate_readout",
]

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)
S_DAG = np.array([[1, 0], [0, -1j]], dtype=complex)
# Basis change sending the measured axis to Z: X -> H, Y -> H S_dag (S_dag first).
MEAS_ROTATION = {"X": HADAMARD, "Y": HADAMARD @ S_DAG}


def ry_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


@dataclass(frozen=True)
class Circuit:
    """Ordered gate program; gates are ("ry", qubit, angle) or ("cx", control, target)."""

    qubit_count: int
    gates: tuple[tuple, ...]

    def __post_init__(self) -> None:
        for gate in self.gates:
            kind = gate[0]
            if kind == "ry":
                _, q, theta = gate
                if not 0 <= q < self.qubit_count:
                    raise ValueError(f"qubit {q} out of range")
                if not math.isfinite(theta):
                    raise ValueError(f"non-finite angle {theta}")
            elif kind == "cx":
                _, c, t = gate
                if not (0 <= c < self.qubit_count and 0 <= t < self.qubit_count and c != t):
                    raise ValueError(f"bad cx qubits ({c}, {t})")
            else:
                raise ValueError(f"unknown gate {kind!r}")

    def to_text(self) -> str:
        lines = []
        for gate in self.gates:
            if gate[0] == "ry":
                lines.append(f"ry q{gate[1]} {gate[2]!r}")
            else:
                lines.append(f"cx q{gate[1]} q{gate[2]}")
        return "\n".join(lines)


@dataclass(eq=False)
class NoiseModel:
    """Per-qubit readout flip rates, optional CNOT depolarization, and the RNG.

    p10[q] is p(1|0), the chance a true 0 is read as 1; p01[q] is p(0|1).
    Their sum must stay below 1 per qubit so the readout channel is invertible.
    p_dep is applied to the gate's qubit pair after every CNOT.
    """

    p10: tuple[float, ...]
    p01: tuple[float, ...]
    p_dep: float = 0.0
    seed: int = 0
    rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if len(self.p10) != len(self.p01):
            raise ValueError("p10 and p01 must cover the same qubits")
        for q, (a, b) in enumerate(zip(self.p10, self.p01)):
            if not (0 <= a < 1 and 0 <= b < 1):
                raise ValueError(f"qubit {q} flip rates must lie in [0, 1)")
            if a + b >= 1:
                raise ValueError(f"qubit {q} has p(1|0) + p(0|1) = {a + b} >= 1")
        if not 0 <= self.p_dep < 1:
            raise ValueError(f"p_dep must lie in [0, 1), got {self.p_dep}")
        self.rng = np.random.default_rng(self.seed)

    @property
    def n_qubits(self) -> int:
        return len(self.p10)

    @classmethod
    def noiseless(cls, n_qubits: int, seed: int = 0) -> "NoiseModel":
        return cls(p10=(0.0,) * n_qubits, p01=(0.0,) * n_qubits, seed=seed)

    @classmethod
    def uniform(cls, n_qubits: int, readout: float = 0.0, p_dep: float = 0.0,
                seed: int = 0) -> "NoiseModel":
        """Same symmetric readout rate on every qubit."""
        return cls(p10=(readout,) * n_qubits, p01=(readout,) * n_qubits,
                   p_dep=p_dep, seed=seed)


@dataclass(frozen=True)
class Counts:
    """Sampled measurement histogram over the word's support qubits.

    Keys are bitstrings ordered by ascending register index; ``support`` lists
    those register indices in key order.
    """

    counts: dict[str, int]
    shots: int
    support: tuple[int, ...]

    def __post_init__(self) -> None:
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts do not sum to the declared shot total")


def zero_state(n_qubits: int) -> np.ndarray:
    state = np.zeros(2**n_qubits, dtype=complex)
    state[0] = 1.0
    return state


def _apply_1q(state: np.ndarray, U: np.ndarray, q: int, n: int) -> np.ndarray:
    psi = state.reshape([2] * n)
    psi = np.tensordot(U, psi, axes=([1], [q]))
    psi = np.moveaxis(psi, 0, q)
    return psi.reshape(-1)


def _apply_cx(state: np.ndarray, c: int, t: int, n: int) -> np.ndarray:
    psi = state.reshape([2] * n).copy()
    # swap the target amplitudes on the control-1 slice
    idx_c = [slice(None)] * n
    idx_c[c] = 1
    sub = psi[tuple(idx_c)]
    t_axis = t - (1 if c < t else 0)
    psi[tuple(idx_c)] = np.flip(sub, axis=t_axis)
    return psi.reshape(-1)


def apply_circuit(circuit: Circuit, initial: np.ndarray) -> np.ndarray:
    n = circuit.qubit_count
    if initial.shape != (2**n,):
        raise ValueError(f"state dimension {initial.shape} does not match {n} qubits")
    state = initial.astype(complex)
    for gate in circuit.gates:
        if gate[0] == "ry":
            state = _apply_1q(state, ry_matrix(gate[2]), gate[1], n)
        else:
            state = _apply_cx(state, gate[1], gate[2], n)
    return state


def ansatz_product(theta0: float, theta1: float) -> Circuit:
    """Two local rotations; spans all real product states of two qubits."""
    return Circuit(2, (("ry", 0, theta0), ("ry", 1, theta1)))


def ansatz_entangled(theta0: float, theta1: float, theta2: float) -> Circuit:
    """Product layer followed by a controlled-RotY(theta2) on qubit 1.

    The controlled rotation is compiled to the standard two-CNOT form
    CNOT . RotY(-theta2/2) . CNOT . RotY(+theta2/2) (time order).
    """
    return Circuit(
        2,
        (
            ("ry", 0, theta0),
            ("ry", 1, theta1),
            ("cx", 0, 1),
            ("ry", 1, -theta2 / 2.0),
            ("cx", 0, 1),
            ("ry", 1, theta2 / 2.0),
        ),
    )


def expectation_exact(state: np.ndarray, H: PauliSum) -> float:
    """<psi|H|psi> for a Pauli sum; real for Hermitian input."""
    n = H.qubit_count
    if state.shape != (2**n,):
        raise ValueError("state and operator qubit counts differ")
    total = 0.0 + 0.0j
    for coeff, word in H.terms:
        phi = state
        for q, label in enumerate(word):
            if label != "I":
                phi = _apply_1q(phi, PAULI[label], q, n)
        total += coeff * np.vdot(state, phi)
    return float(total.real)


def _support_probs(probs_full: np.ndarray, support: tuple[int, ...], n: int) -> np.ndarray:
    """Marginalize the Born distribution onto the support qubits."""
    p = probs_full.reshape([2] * n) if n else probs_full
    drop = tuple(q for q in range(n) if q not in support)
    if drop:
        p = p.sum(axis=drop)
    p = np.clip(p.reshape(-1).real, 0.0, None)
    return p / p.sum()


def _sample_counts(probs: np.ndarray, support: tuple[int, ...], shots: int,
                   noise: NoiseModel) -> Counts:
    k = len(support)
    if k == 0:
        # all-identity word: nothing is measured
        return Counts(counts={"": shots}, shots=shots, support=support)
    outcomes = noise.rng.choice(len(probs), size=shots, p=probs)
    weights = 1 << np.arange(k - 1, -1, -1)
    bits = (outcomes[:, None] >> np.arange(k - 1, -1, -1)) & 1
    p10 = np.array([noise.p10[q] for q in support])
    p01 = np.array([noise.p01[q] for q in support])
    if p10.any() or p01.any():
        rates = np.where(bits == 0, p10[None, :], p01[None, :])
        bits = bits ^ (noise.rng.random(bits.shape) < rates)
    outcomes = bits @ weights
    values, tallies = np.unique(outcomes, return_counts=True)
    counts = {format(int(v), f"0{k}b"): int(c) for v, c in zip(values, tallies)}
    return Counts(counts=counts, shots=shots, support=support)


def _measurement_setup(word: str) -> tuple[tuple[int, ...], list[tuple[int, np.ndarray]]]:
    support = tuple(q for q, label in enumerate(word) if label != "I")
    rotations = [(q, MEAS_ROTATION[word[q]]) for q in support if word[q] in MEAS_ROTATION]
    return support, rotations


def measure_pauli(state: np.ndarray, word: str, shots: int, noise: NoiseModel) -> Counts:
    """Sample a Pauli word on a pure state with readout flips applied.

    Identity labels are not measured: the distribution is marginalized onto the
    word's support, so readout noise only touches measured qubits.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    n = int(round(math.log2(len(state))))
    if len(word) != n:
        raise ValueError(f"word length {len(word)} != {n} qubits")
    support, rotations = _measurement_setup(word)
    for q, U in rotations:
        state = _apply_1q(state, U, q, n)
    probs = _support_probs(np.abs(state) ** 2, support, n)
    return _sample_counts(probs, support, shots, noise)


def measure_pauli_density(rho: np.ndarray, word: str, shots: int, noise: NoiseModel) -> Counts:
    """Sampling path for mixed states; mirrors measure_pauli."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    n = int(round(math.log2(rho.shape[0])))
    if len(word) != n:
        raise ValueError(f"word length {len(word)} != {n} qubits")
    support, rotations = _measurement_setup(word)
    for q, U in rotations:
        rho = _full_1q(U, q, n) @ rho @ _full_1q(U, q, n).conj().T
    probs = _support_probs(np.diag(rho).real, support, n)
    return _sample_counts(probs, support, shots, noise)


def counts_expectation(counts: Counts) -> float:
    """Raw empirical <Z...Z> over the support: mean of (-1)^(popcount)."""
    total = 0
    for bits, c in counts.counts.items():
        total += c * (-1) ** bits.count("1")
    return total / counts.shots


def _full_1q(U: np.ndarray, q: int, n: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for i in range(n):
        out = np.kron(out, U if i == q else np.eye(2, dtype=complex))
    return out


def _full_cx(c: int, t: int, n: int) -> np.ndarray:
    p0 = np.array([[1, 0], [0, 0]], dtype=complex)
    p1 = np.array([[0, 0], [0, 1]], dtype=complex)
    term0 = np.ones((1, 1), dtype=complex)
    term1 = np.ones((1, 1), dtype=complex)
    for i in range(n):
        term0 = np.kron(term0, p0 if i == c else np.eye(2, dtype=complex))
        term1 = np.kron(term1, p1 if i == c else (PAULI["X"] if i == t else np.eye(2, dtype=complex)))
    return term0 + term1


def _partial_trace(rho: np.ndarray, n: int, drop: tuple[int, ...]) -> np.ndarray:
    t = rho.reshape([2] * (2 * n))
    m = n
    for q in sorted(drop, reverse=True):
        t = np.trace(t, axis1=q, axis2=q + m)
        m -= 1
    return t.reshape(2**m, 2**m)


def _depolarize_pair(rho: np.ndarray, q0: int, q1: int, p: float, n: int) -> np.ndarray:
    """rho -> (1-p) rho + p (I/4 on the pair) x (reduced state of the rest)."""
    if p == 0.0:
        return rho
    rest = [q for q in range(n) if q not in (q0, q1)]
    sigma = _partial_trace(rho, n, (q0, q1))
    mixed = np.kron(np.eye(4, dtype=complex) / 4.0, sigma)
    # permute from qubit order [q0, q1, *rest] back to ascending
    order = [q0, q1] + rest
    t = mixed.reshape([2] * (2 * n))
    t = np.moveaxis(t, list(range(2 * n)), order + [n + q for q in order])
    return (1.0 - p) * rho + p * t.reshape(2**n, 2**n)


def simulate_density(circuit: Circuit, noise: NoiseModel) -> np.ndarray:
    """Density-matrix evolution from |0...0> with depolarization after each CNOT."""
    n = circuit.qubit_count
    rho = np.zeros((2**n, 2**n), dtype=complex)
    rho[0, 0] = 1.0
    for gate in circuit.gates:
        if gate[0] == "ry":
            U = _full_1q(ry_matrix(gate[2]), gate[1], n)
            rho = U @ rho @ U.conj().T
        else:
            U = _full_cx(gate[1], gate[2], n)
            rho = U @ rho @ U.conj().T
            rho = _depolarize_pair(rho, gate[1], gate[2], noise.p_dep, n)
    return rho


def calibrate_readout(noise: NoiseModel, qubit: int, shots: int) -> tuple[float, float]:
    """Empirical flip-rate estimates (p(0|1), p(1|0)) from the two basis preparations."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    n = noise.n_qubits
    word = "".join("Z" if q == qubit else "I" for q in range(n))
    counts0 = measure_pauli(zero_state(n), word, shots, noise)
    p10_hat = counts0.counts.get("1", 0) / shots
    excited = apply_circuit(Circuit(n, (("ry", qubit, math.pi),)), zero_state(n))
    counts1 = measure_pauli(excited, word, shots, noise)
    p01_hat = counts1.counts.get("0", 0) / shots
    return p01_hat, p10_hat
