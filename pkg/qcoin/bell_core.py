"""
Symbolic Bell-state algebra.

Bell states are tracked as 2-bit labels and single-sided Paulis as 2-bit
labels acting on them by XOR; global phases are dropped throughout. The
EntangledMatching engine keeps a perfect matching of live particles, each
edge carrying a Bell label, and executes Bell measurements (entanglement
swapping included) without building a state vector.
"""

import logging
from dataclasses import dataclass
from enum import Enum, IntEnum
from functools import reduce
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, NamedTuple, Tuple

import numpy as np

from .errors import AlreadyMeasuredError, SelfMeasurementError, UnknownParticleError

logger = logging.getLogger(__name__)


class BellLabel(IntEnum):
    """Bell state encoded as ``hi << 1 | lo``."""

    PHI_PLUS = 0b00
    PHI_MINUS = 0b01
    PSI_PLUS = 0b10
    PSI_MINUS = 0b11

    @property
    def hi(self) -> int:
        return self.value >> 1

    @property
    def lo(self) -> int:
        return self.value & 1

    @property
    def bits(self) -> str:
        return f"{self.hi}{self.lo}"

    @property
    def display_name(self) -> str:
        return _DISPLAY_NAMES[self]

    @classmethod
    def from_bits(cls, hi: int, lo: int) -> "BellLabel":
        return cls((hi & 1) << 1 | (lo & 1))

    @classmethod
    def parse(cls, text: str) -> "BellLabel":
        """Accept either the bit string ("01") or the display name ("phi-")."""
        text = text.strip().lower()
        for label in cls:
            if text in (label.bits, label.display_name, label.name.lower()):
                return label
        raise ValueError(f"Unknown Bell label: {text!r}")


_DISPLAY_NAMES = {
    BellLabel.PHI_PLUS: "phi+",
    BellLabel.PHI_MINUS: "phi-",
    BellLabel.PSI_PLUS: "psi+",
    BellLabel.PSI_MINUS: "psi-",
}


class PauliLabel(IntEnum):
    """Phase-free Pauli encoded as ``x << 1 | z``; Y is X·Z."""

    I = 0b00  # noqa: E741
    Z = 0b01
    X = 0b10
    Y = 0b11

    @property
    def x(self) -> int:
        return self.value >> 1

    @property
    def z(self) -> int:
        return self.value & 1

    @classmethod
    def from_name(cls, name: str) -> "PauliLabel":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ValueError(f"Unknown Pauli: {name!r}") from None


class Party(str, Enum):
    ALICE = "alice"
    BOB = "bob"

    @property
    def tag(self) -> str:
        return "A" if self is Party.ALICE else "B"


@dataclass(frozen=True, order=True)
class ParticleId:
    """A particle numbered 1..2N by its owner; odd particles travel, even stay."""

    owner: Party
    index: int

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError(f"Particle index must be >= 1, got {self.index}")

    def __str__(self) -> str:
        return f"{self.owner.tag}{self.index}"

    @classmethod
    def parse(cls, text: str) -> "ParticleId":
        owner = Party.ALICE if text[0].upper() == "A" else Party.BOB
        return cls(owner, int(text[1:]))


class Measurement(NamedTuple):
    first: ParticleId
    second: ParticleId
    outcome: BellLabel


ResidualRule = Callable[[BellLabel, BellLabel, BellLabel], BellLabel]


def parity(b: BellLabel) -> int:
    """Parity of a Bell label: Φ⁺ and Ψ⁻ are even, Φ⁻ and Ψ⁺ odd."""
    return b.hi ^ b.lo


def apply_pauli(b: BellLabel, p: PauliLabel) -> BellLabel:
    """Bell label of (σ ⊗ I)|b⟩, up to global phase."""
    return BellLabel(b ^ p)


def pauli_parity(p: PauliLabel) -> int:
    """Parity a Pauli imprints on a Bell pair it acts on."""
    return p.x ^ p.z


def compose(p: PauliLabel, q: PauliLabel) -> PauliLabel:
    return PauliLabel(p ^ q)


def label_xor(*labels: BellLabel) -> BellLabel:
    return BellLabel(reduce(lambda acc, b: acc ^ b, labels, 0))


def total_parity(outcomes: Iterable[BellLabel]) -> int:
    """XOR of the parities; an empty list is even."""
    return reduce(lambda acc, b: acc ^ parity(b), outcomes, 0)


def swap_residual(b1: BellLabel, b2: BellLabel, outcome: BellLabel) -> BellLabel:
    """Label left on the two untouched particles after a swapping measurement."""
    return BellLabel(b1 ^ b2 ^ outcome)


class EntangledMatching:
    """Perfect matching of live particles where every edge is a Bell pair.

    Conservation: the XOR of all live edge labels with all outcomes in
    ``history`` equals ``reference_xor`` after every measurement.
    ``reference_xor`` starts as the XOR of the initial labels and only moves
    when a local Pauli is applied to a live particle.
    """

    def __init__(
        self,
        edges: Mapping[Tuple[ParticleId, ParticleId], BellLabel],
        residual_rule: ResidualRule = swap_residual,
    ):
        self._partner: Dict[ParticleId, ParticleId] = {}
        self._labels: Dict[FrozenSet[ParticleId], BellLabel] = {}
        self.consumed: set = set()
        self.history: List[Measurement] = []
        self.residual_rule = residual_rule

        for (u, v), label in edges.items():
            if u == v:
                raise SelfMeasurementError(f"Edge joins {u} to itself")
            if u in self._partner or v in self._partner:
                raise ValueError(f"Particle appears in two edges: {u}, {v}")
            self._partner[u] = v
            self._partner[v] = u
            self._labels[frozenset((u, v))] = BellLabel(label)

        self.reference_xor = label_xor(*self._labels.values())

    @classmethod
    def from_pairs(
        cls,
        owner: Party,
        labels: Iterable[BellLabel],
        residual_rule: ResidualRule = swap_residual,
    ) -> "EntangledMatching":
        """Pairs (2m−1, 2m) of one owner carrying the given labels."""
        edges = {
            (ParticleId(owner, 2 * m - 1), ParticleId(owner, 2 * m)): label
            for m, label in enumerate(labels, start=1)
        }
        return cls(edges, residual_rule=residual_rule)

    @classmethod
    def protocol_start(
        cls, n_pairs: int, residual_rule: ResidualRule = swap_residual
    ) -> "EntangledMatching":
        """N Φ⁺ pairs for Alice and N for Bob."""
        edges = {}
        for owner in Party:
            for m in range(1, n_pairs + 1):
                pair = (ParticleId(owner, 2 * m - 1), ParticleId(owner, 2 * m))
                edges[pair] = BellLabel.PHI_PLUS
        return cls(edges, residual_rule=residual_rule)

    @property
    def edges(self) -> Dict[FrozenSet[ParticleId], BellLabel]:
        return dict(self._labels)

    def live_particles(self) -> List[ParticleId]:
        return sorted(self._partner)

    def is_live(self, p: ParticleId) -> bool:
        return p in self._partner

    def partner(self, p: ParticleId) -> ParticleId:
        self._check_live(p)
        return self._partner[p]

    def label(self, u: ParticleId, v: ParticleId) -> BellLabel:
        try:
            return self._labels[frozenset((u, v))]
        except KeyError:
            raise UnknownParticleError(f"{u} and {v} do not share an edge") from None

    def outcomes(self) -> List[BellLabel]:
        return [m.outcome for m in self.history]

    def conservation_holds(self) -> bool:
        live = label_xor(*self._labels.values())
        return label_xor(live, *self.outcomes()) == self.reference_xor

    def apply_pauli_to(self, particle: ParticleId, pauli: PauliLabel) -> BellLabel:
        """Apply a local Pauli to one live particle; returns the new edge label."""
        key = frozenset((particle, self.partner(particle)))
        self._labels[key] = apply_pauli(self._labels[key], pauli)
        self.reference_xor = BellLabel(self.reference_xor ^ pauli)
        return self._labels[key]

    def measure(self, u: ParticleId, v: ParticleId, rng: np.random.Generator) -> BellLabel:
        """Bell-measure particles u and v, consuming them."""
        if u == v:
            raise SelfMeasurementError(f"Cannot Bell-measure {u} with itself")
        self._check_live(u)
        self._check_live(v)

        u_partner = self._partner[u]
        if u_partner == v:
            outcome = self._labels.pop(frozenset((u, v)))
            self._retire(u, v)
            logger.debug(f"Measured partners {u},{v} -> {outcome.display_name}")
        else:
            v_partner = self._partner[v]
            b1 = self._labels.pop(frozenset((u, u_partner)))
            b2 = self._labels.pop(frozenset((v, v_partner)))
            outcome = BellLabel(int(rng.integers(4)))
            residual = self.residual_rule(b1, b2, outcome)
            self._retire(u, v)
            self._partner[u_partner] = v_partner
            self._partner[v_partner] = u_partner
            self._labels[frozenset((u_partner, v_partner))] = residual
            logger.debug(
                f"Swapped {u},{v} -> {outcome.display_name}; "
                f"{u_partner}-{v_partner} now {residual.display_name}"
            )

        self.history.append(Measurement(u, v, outcome))
        return outcome

    def _retire(self, u: ParticleId, v: ParticleId) -> None:
        del self._partner[u]
        del self._partner[v]
        self.consumed.update((u, v))

    def _check_live(self, p: ParticleId) -> None:
        if p in self.consumed:
            raise AlreadyMeasuredError(f"Particle {p} has already been measured")
        if p not in self._partner:
            raise UnknownParticleError(f"Unknown particle {p}")


def measure_pair(
    m: EntangledMatching, u: ParticleId, v: ParticleId, rng: np.random.Generator
) -> BellLabel:
    return m.measure(u, v, rng)
