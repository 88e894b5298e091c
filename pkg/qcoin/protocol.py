"""
The entanglement-swapping coin tossing protocol.

Alice and Bob are modelled as two small state machines that exchange
messages through ``run_session``; the shared EntangledMatching stands in
for the physical particles. Phase order is fixed:

    Alice batch -> Bob batch -> Alice sequence -> (measurements)
    -> Bob results -> Alice verdict -> coin
"""

import logging
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Any, ClassVar, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .bell_core import BellLabel, EntangledMatching, ParticleId, Party, total_parity
from .errors import EmptyOutcomesError, LengthMismatchError, ProtocolOrderError
from .utils import write_jsonl

logger = logging.getLogger(__name__)

ABORT = "abort"
Coin = Union[int, str]


class Verdict(str, Enum):
    ACCEPT = "accept"
    REJECT = "reject"


class NoiseModel(BaseModel):
    """Each Bell measurement reports the right label with probability gamma."""

    model_config = ConfigDict(frozen=True)

    gamma: float = Field(..., gt=0.0, le=1.0, description="Per-measurement success probability")


class SessionConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_pairs: int = Field(..., ge=1, description="Entangled pairs held by each party")
    seed: int = Field(default=0, ge=0, lt=2**64, description="Master seed")
    noise: Optional[NoiseModel] = Field(default=None, description="Measurement noise")


@dataclass(frozen=True)
class Sequence:
    """Transmission order: ``order[slot]`` is the pair index (1..N) sent in that slot."""

    order: Tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.order) != list(range(1, len(self.order) + 1)):
            raise ValueError(f"Not a permutation of 1..{len(self.order)}: {self.order}")

    @property
    def n(self) -> int:
        return len(self.order)

    def pair_at(self, slot: int) -> int:
        return self.order[slot]

    def slot_of(self, pair: int) -> int:
        return self.order.index(pair)

    def inverse(self) -> "Sequence":
        inverse = [0] * self.n
        for slot, pair in enumerate(self.order, start=1):
            inverse[pair - 1] = slot
        return Sequence(tuple(inverse))

    @classmethod
    def identity(cls, n: int) -> "Sequence":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "Sequence":
        return cls(tuple(int(p) + 1 for p in rng.permutation(n)))


class Phase(str, Enum):
    ALICE_BATCH = "alice-batch"
    BOB_BATCH = "bob-batch"
    SEQUENCE = "sequence"
    RESULTS = "results"
    VERDICT = "verdict"
    COIN = "coin"


PHASE_ORDER = list(Phase)


@dataclass(frozen=True)
class ParticleBatch:
    sender: Party
    particles: Tuple[ParticleId, ...]

    @property
    def phase(self) -> Phase:
        return Phase.ALICE_BATCH if self.sender is Party.ALICE else Phase.BOB_BATCH

    def payload(self) -> Dict[str, Any]:
        return {"particles": [str(p) for p in self.particles]}


@dataclass(frozen=True)
class SequenceAnnouncement:
    sequence: Sequence
    sender: Party = Party.ALICE
    phase: ClassVar[Phase] = Phase.SEQUENCE

    def payload(self) -> Dict[str, Any]:
        return {"sequence": list(self.sequence.order)}


@dataclass(frozen=True)
class ResultsAnnouncement:
    results: Tuple[BellLabel, ...]
    sender: Party = Party.BOB
    phase: ClassVar[Phase] = Phase.RESULTS

    def payload(self) -> Dict[str, Any]:
        return {"results": [b.bits for b in self.results]}


@dataclass(frozen=True)
class VerdictAnnouncement:
    verdict: Verdict
    sender: Party = Party.ALICE
    phase: ClassVar[Phase] = Phase.VERDICT

    def payload(self) -> Dict[str, Any]:
        return {"verdict": self.verdict.value}


@dataclass(frozen=True)
class CoinAnnouncement:
    coin: Coin
    sender: Party = Party.ALICE
    phase: ClassVar[Phase] = Phase.COIN

    def payload(self) -> Dict[str, Any]:
        return {"coin": self.coin}


Message = Union[
    ParticleBatch, SequenceAnnouncement, ResultsAnnouncement, VerdictAnnouncement, CoinAnnouncement
]


@dataclass
class SessionTranscript:
    config: SessionConfig
    messages: List[Message] = field(default_factory=list)
    alice_outcomes: List[BellLabel] = field(default_factory=list)
    bob_outcomes: List[BellLabel] = field(default_factory=list)
    alice_raw_outcomes: List[BellLabel] = field(default_factory=list)
    bob_raw_outcomes: List[BellLabel] = field(default_factory=list)
    alice_coin: Optional[int] = None
    bob_coin: Optional[int] = None
    coin: Optional[Coin] = None
    verdict: Optional[Verdict] = None

    def append(self, message: Message) -> None:
        """Log a message, enforcing the protocol's phase order and batch sizes."""
        expected = PHASE_ORDER[len(self.messages)] if len(self.messages) < len(PHASE_ORDER) else None
        if message.phase is not expected:
            raise ProtocolOrderError(
                f"Got {message.phase.value} message while expecting "
                f"{expected.value if expected else 'no further messages'}"
            )
        size = None
        if isinstance(message, ParticleBatch):
            size = len(message.particles)
        elif isinstance(message, ResultsAnnouncement):
            size = len(message.results)
        if size is not None and size != self.config.n_pairs:
            raise LengthMismatchError(
                f"{message.phase.value} carries {size} entries, expected {self.config.n_pairs}"
            )
        self.messages.append(message)

    @property
    def accepted(self) -> bool:
        return self.verdict is Verdict.ACCEPT

    def to_records(self) -> List[Dict[str, Any]]:
        return [
            {
                "index": index,
                "phase": message.phase.value,
                "sender": message.sender.value,
                "payload": message.payload(),
            }
            for index, message in enumerate(self.messages)
        ]

    def write_jsonl(self, path: str) -> None:
        write_jsonl(self.to_records(), path)


def toss_from_outcomes(outcomes: List[BellLabel]) -> int:
    """Coin rule: even total parity is 0, odd is 1."""
    if not outcomes:
        raise EmptyOutcomesError("Cannot toss a coin from no outcomes")
    return total_parity(outcomes)


def alice_verify(alice_results: List[BellLabel], bob_announced: List[BellLabel]) -> Verdict:
    """Pair-by-pair comparison of Bob's announced results against Alice's own."""
    if len(alice_results) != len(bob_announced):
        raise LengthMismatchError(
            f"Alice holds {len(alice_results)} results, Bob announced {len(bob_announced)}"
        )
    if all(a == b for a, b in zip(alice_results, bob_announced)):
        return Verdict.ACCEPT
    return Verdict.REJECT


def apply_noise(
    outcome: BellLabel, noise: Optional[NoiseModel], rng: np.random.Generator
) -> BellLabel:
    """Keep the outcome with probability gamma, else report one of the other three."""
    if noise is None or noise.gamma >= 1.0:
        return outcome
    if rng.random() < noise.gamma:
        return outcome
    return BellLabel(outcome ^ (1 + int(rng.integers(3))))


class Stage(IntEnum):
    START = 0
    RECEIVED = 1
    SENT = 2
    INFORMED = 3
    MEASURED = 4
    DONE = 5


class Participant:
    """Shared plumbing for both parties: stage tracking and noisy recording."""

    party: ClassVar[Party]

    def __init__(
        self,
        n_pairs: int,
        matching: EntangledMatching,
        rng: np.random.Generator,
        noise: Optional[NoiseModel] = None,
    ):
        self.n_pairs = n_pairs
        self.matching = matching
        self.rng = rng
        self.noise = noise
        self.outcomes: List[BellLabel] = []
        # What the measurement actually produced, before noise.
        self.raw_outcomes: List[BellLabel] = []
        self.stage = Stage.START

    def particle(self, index: int) -> ParticleId:
        return ParticleId(self.party, index)

    def coin(self) -> int:
        return toss_from_outcomes(self.outcomes)

    def _advance(self, allowed: Tuple[Stage, ...], new: Stage, action: str) -> None:
        if self.stage not in allowed:
            raise ProtocolOrderError(
                f"{self.party.value} cannot {action} at stage {self.stage.name}"
            )
        self.stage = new

    def _bell_measure(self, own: ParticleId, other: ParticleId) -> None:
        raw = self.matching.measure(own, other, self.rng)
        self.raw_outcomes.append(raw)
        self.outcomes.append(apply_noise(raw, self.noise, self.rng))


class AliceParty(Participant):
    party = Party.ALICE

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.sequence: Optional[Sequence] = None
        self.sent: Tuple[ParticleId, ...] = ()
        self.received: Tuple[ParticleId, ...] = ()

    def send_batch(self) -> ParticleBatch:
        self._advance((Stage.START,), Stage.SENT, "send her batch")
        self.sequence = Sequence.random(self.n_pairs, self.rng)
        self.sent = tuple(self.particle(2 * pair - 1) for pair in self.sequence.order)
        return ParticleBatch(self.party, self.sent)

    def receive_batch(self, batch: ParticleBatch) -> None:
        self._advance((Stage.SENT,), Stage.RECEIVED, "receive Bob's batch")
        self.received = batch.particles

    def announce_sequence(self) -> SequenceAnnouncement:
        self._advance((Stage.RECEIVED, Stage.MEASURED), self.stage, "announce her sequence")
        return SequenceAnnouncement(self.sequence)

    def measure(self) -> None:
        """Pair her even particle 2m with the particle received in slot m."""
        if self.stage is Stage.MEASURED:
            return
        self._advance((Stage.RECEIVED,), Stage.MEASURED, "measure")
        for m in range(1, self.n_pairs + 1):
            self._bell_measure(self.particle(2 * m), self.received[m - 1])

    def verify(self, announcement: ResultsAnnouncement) -> Verdict:
        self._advance((Stage.MEASURED,), Stage.DONE, "verify")
        verdict = alice_verify(self.outcomes, list(announcement.results))
        if verdict is Verdict.REJECT:
            logger.warning("Bob's announced results do not match; aborting")
        return verdict


class BobParty(Participant):
    party = Party.BOB

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.received: Tuple[ParticleId, ...] = ()
        self.sent: Tuple[ParticleId, ...] = ()
        self.alice_sequence: Optional[Sequence] = None

    def receive_batch(self, batch: ParticleBatch) -> None:
        self._advance((Stage.START,), Stage.RECEIVED, "receive Alice's batch")
        self.received = batch.particles

    def send_batch(self) -> ParticleBatch:
        """Odd particles in canonical order, known to Alice in advance."""
        self._advance((Stage.RECEIVED,), Stage.SENT, "send his batch")
        self.sent = tuple(self.particle(2 * m - 1) for m in range(1, self.n_pairs + 1))
        return ParticleBatch(self.party, self.sent)

    def receive_sequence(self, announcement: SequenceAnnouncement) -> None:
        self._advance((Stage.SENT,), Stage.INFORMED, "receive Alice's sequence")
        self.alice_sequence = announcement.sequence

    def measure(self) -> None:
        """Pair his even particle 2m with the slot Alice says held her pair m."""
        self._advance((Stage.INFORMED,), Stage.MEASURED, "measure")
        for m in range(1, self.n_pairs + 1):
            slot = self.alice_sequence.slot_of(m)
            self._bell_measure(self.particle(2 * m), self.received[slot])

    def announce_results(self) -> ResultsAnnouncement:
        self._advance((Stage.MEASURED,), Stage.DONE, "announce results")
        return ResultsAnnouncement(tuple(self.outcomes))


def run_session(config: SessionConfig, alice: AliceParty, bob: BobParty) -> SessionTranscript:
    """Drive both parties through one full exchange."""
    transcript = SessionTranscript(config)

    batch = alice.send_batch()
    transcript.append(batch)
    bob.receive_batch(batch)

    batch = bob.send_batch()
    transcript.append(batch)
    alice.receive_batch(batch)

    announcement = alice.announce_sequence()
    transcript.append(announcement)
    bob.receive_sequence(announcement)

    alice.measure()
    bob.measure()

    results = bob.announce_results()
    transcript.append(results)

    verdict = alice.verify(results)
    transcript.append(VerdictAnnouncement(verdict))

    transcript.alice_outcomes = list(alice.outcomes)
    transcript.bob_outcomes = list(results.results)
    transcript.alice_raw_outcomes = list(alice.raw_outcomes)
    transcript.bob_raw_outcomes = list(bob.raw_outcomes)
    transcript.alice_coin = alice.coin()
    transcript.bob_coin = toss_from_outcomes(list(results.results))
    transcript.verdict = verdict
    transcript.coin = transcript.bob_coin if verdict is Verdict.ACCEPT else ABORT
    transcript.append(CoinAnnouncement(transcript.coin))

    logger.debug(
        f"Session n_pairs={config.n_pairs} verdict={verdict.value} coin={transcript.coin}"
    )
    return transcript


def run_honest(config: SessionConfig, rng: np.random.Generator) -> SessionTranscript:
    matching = EntangledMatching.protocol_start(config.n_pairs)
    alice = AliceParty(config.n_pairs, matching, rng, config.noise)
    bob = BobParty(config.n_pairs, matching, rng, config.noise)
    return run_session(config, alice, bob)


@dataclass(frozen=True)
class NaiveExchange:
    alice_outcome: Optional[BellLabel]
    bob_outcome: BellLabel

    @property
    def bob_coin(self) -> int:
        return toss_from_outcomes([self.bob_outcome])


def run_naive(rng: np.random.Generator) -> NaiveExchange:
    """Single pair each, no sequence and no check: each side swaps once."""
    matching = EntangledMatching.protocol_start(1)
    alice_outcome = matching.measure(ParticleId(Party.ALICE, 2), ParticleId(Party.BOB, 1), rng)
    bob_outcome = matching.measure(ParticleId(Party.BOB, 2), ParticleId(Party.ALICE, 1), rng)
    return NaiveExchange(alice_outcome, bob_outcome)
