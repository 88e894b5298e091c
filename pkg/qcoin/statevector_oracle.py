"""
Dense state-vector simulator used as an independent oracle for bell_core.

Qubit 0 is the most significant bit of the amplitude index, and qubit
indices are zero-based: pair i of ``prepare_pairs`` sits on qubits
(2i, 2i + 1).
"""

import logging
from dataclasses import dataclass
from functools import reduce
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .bell_core import BellLabel, PauliLabel, swap_residual
from .errors import CoincidentQubitsError, QubitIndexError, TooManyQubitsError

logger = logging.getLogger(__name__)

MAX_QUBITS = 16
NORM_TOLERANCE = 1e-9

_SQRT2_INV = 1 / np.sqrt(2)

# Rows indexed by BellLabel value, columns by |q1 q2> basis state.
BELL_BASIS = np.array(
    [
        [1, 0, 0, 1],  # phi+
        [1, 0, 0, -1],  # phi-
        [0, 1, 1, 0],  # psi+
        [0, 1, -1, 0],  # psi-
    ],
    dtype=complex,
) * _SQRT2_INV

_PAULI_MATRICES = {
    PauliLabel.I: np.eye(2, dtype=complex),
    PauliLabel.X: np.array([[0, 1], [1, 0]], dtype=complex),
    PauliLabel.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    PauliLabel.Y: np.array([[0, -1], [1, 0]], dtype=complex),
}


@dataclass
class QuantumState:
    amplitudes: np.ndarray
    qubit_count: int

    def __post_init__(self) -> None:
        if self.qubit_count > MAX_QUBITS:
            raise TooManyQubitsError(
                f"{self.qubit_count} qubits exceeds the {MAX_QUBITS}-qubit cap"
            )
        if self.amplitudes.shape != (2**self.qubit_count,):
            raise ValueError(
                f"Expected {2 ** self.qubit_count} amplitudes, "
                f"got shape {self.amplitudes.shape}"
            )
        norm = float(np.sum(np.abs(self.amplitudes) ** 2))
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"State is not normalized (norm² = {norm})")

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


@dataclass(frozen=True)
class OutcomeDistribution:
    """Born-rule probabilities of the four Bell outcomes, indexed by label."""

    probabilities: Tuple[float, float, float, float]

    def __post_init__(self) -> None:
        if any(p < -NORM_TOLERANCE for p in self.probabilities):
            raise ValueError(f"Negative probability in {self.probabilities}")
        if abs(sum(self.probabilities) - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"Probabilities do not sum to 1: {self.probabilities}")

    def __getitem__(self, label: BellLabel) -> float:
        return self.probabilities[int(label)]

    def as_dict(self) -> Dict[BellLabel, float]:
        return {label: self.probabilities[label] for label in BellLabel}

    def point_mass(self, tol: float = NORM_TOLERANCE):
        """The label carrying all the weight, or None."""
        for label in BellLabel:
            if abs(self.probabilities[label] - 1.0) <= tol:
                return label
        return None

    def total_variation(self, other: Sequence[float]) -> float:
        return 0.5 * float(np.sum(np.abs(np.asarray(self.probabilities) - np.asarray(other))))


def prepare_pairs(labels: Sequence[BellLabel]) -> QuantumState:
    """Tensor product of Bell pairs on consecutive qubit pairs."""
    qubit_count = 2 * len(labels)
    if qubit_count > MAX_QUBITS:
        raise TooManyQubitsError(
            f"{len(labels)} pairs need {qubit_count} qubits; cap is {MAX_QUBITS}"
        )
    if not labels:
        return QuantumState(np.ones(1, dtype=complex), 0)
    amplitudes = reduce(np.kron, (BELL_BASIS[int(b)] for b in labels))
    return QuantumState(np.asarray(amplitudes, dtype=complex), qubit_count)


def _check_qubits(s: QuantumState, q1: int, q2: int) -> None:
    for q in (q1, q2):
        if not 0 <= q < s.qubit_count:
            raise QubitIndexError(f"Qubit {q} outside 0..{s.qubit_count - 1}")
    if q1 == q2:
        raise CoincidentQubitsError(f"Cannot Bell-measure qubit {q1} with itself")


def _bell_components(s: QuantumState, q1: int, q2: int) -> np.ndarray:
    """Rows: the (unnormalized) rest-of-register state for each Bell outcome."""
    n = s.qubit_count
    tensor = s.amplitudes.reshape([2] * n)
    moved = np.moveaxis(tensor, (q1, q2), (0, 1)).reshape(4, -1)
    return BELL_BASIS.conj() @ moved


def bell_distribution(s: QuantumState, q1: int, q2: int) -> OutcomeDistribution:
    _check_qubits(s, q1, q2)
    components = _bell_components(s, q1, q2)
    probs = np.sum(np.abs(components) ** 2, axis=1)
    return OutcomeDistribution(tuple(float(p) for p in probs))


def project(s: QuantumState, q1: int, q2: int, outcome: BellLabel) -> QuantumState:
    """Post-measurement state for a given (non-zero probability) outcome."""
    _check_qubits(s, q1, q2)
    n = s.qubit_count
    components = _bell_components(s, q1, q2)
    rest = components[int(outcome)]
    weight = float(np.sum(np.abs(rest) ** 2))
    if weight <= NORM_TOLERANCE:
        raise ValueError(f"Outcome {outcome.display_name} has zero probability")
    collapsed = np.outer(BELL_BASIS[int(outcome)], rest / np.sqrt(weight))
    collapsed = np.moveaxis(collapsed.reshape([2] * n), (0, 1), (q1, q2))
    return QuantumState(collapsed.reshape(-1), n)


def bell_measure_collapse(
    s: QuantumState, q1: int, q2: int, rng: np.random.Generator
) -> Tuple[BellLabel, QuantumState]:
    dist = bell_distribution(s, q1, q2)
    probs = np.clip(np.asarray(dist.probabilities), 0.0, None)
    outcome = BellLabel(int(rng.choice(4, p=probs / probs.sum())))
    return outcome, project(s, q1, q2, outcome)


def apply_pauli(s: QuantumState, qubit: int, pauli: PauliLabel) -> QuantumState:
    """Single-qubit Pauli gate; Y is the real matrix X·Z."""
    n = s.qubit_count
    if not 0 <= qubit < n:
        raise QubitIndexError(f"Qubit {qubit} outside 0..{n - 1}")
    tensor = np.moveaxis(s.amplitudes.reshape([2] * n), qubit, 0)
    tensor = np.tensordot(_PAULI_MATRICES[pauli], tensor, axes=([1], [0]))
    return QuantumState(np.moveaxis(tensor, 0, qubit).reshape(-1), n)


def residual_table() -> List[Tuple[BellLabel, BellLabel, BellLabel, BellLabel]]:
    """All 64 (b1, b2, outcome, residual) rows read off the oracle.

    Pairs b1 on qubits (0, 1) and b2 on (2, 3); qubits 1 and 2 are measured
    and the residual is the point-mass label of qubits (0, 3).
    """
    rows = []
    for b1 in BellLabel:
        for b2 in BellLabel:
            state = prepare_pairs([b1, b2])
            for outcome in BellLabel:
                collapsed = project(state, 1, 2, outcome)
                residual = bell_distribution(collapsed, 0, 3).point_mass()
                rows.append((b1, b2, outcome, residual))
    return rows


def residual_mismatches(
    rule=swap_residual,
) -> List[Tuple[BellLabel, BellLabel, BellLabel, BellLabel]]:
    """Rows of the oracle table where ``rule`` predicts a different residual."""
    return [row for row in residual_table() if rule(row[0], row[1], row[2]) != row[3]]
