"""
Cheating strategies against the coin tossing protocol and the experiment
runner that measures them.

Bob's reflection attack returns Alice's own particles (optionally flipping
one with a Pauli) so her measurements only swap among her own pairs; the
permutation relating her true sending order to Bob's claimed identification
splits her pairs into cycles, and Bob fabricates results cycle by cycle.
Alice's fake-sequence attack lies about her sending order after seeing her
own coin; parity conservation makes it useless.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .analysis import wilson_interval
from .bell_core import (
    BellLabel,
    EntangledMatching,
    ParticleId,
    PauliLabel,
    Party,
    label_xor,
    pauli_parity,
    total_parity,
)
from .errors import SizeMismatchError, StrategyMismatchError
from .protocol import (
    AliceParty,
    BobParty,
    NaiveExchange,
    NoiseModel,
    ParticleBatch,
    ResultsAnnouncement,
    Sequence,
    SequenceAnnouncement,
    SessionConfig,
    SessionTranscript,
    Stage,
    Verdict,
    run_honest,
    run_session,
)
from .utils import trial_rng

logger = logging.getLogger(__name__)


class StrategyKind(str, Enum):
    HONEST = "honest"
    REFLECT = "reflect"
    FAKE_SEQUENCE = "fake-seq"


@dataclass(frozen=True)
class Strategy:
    party: Party
    kind: StrategyKind
    flip: PauliLabel = PauliLabel.I
    desired: int = 0

    def __post_init__(self) -> None:
        if self.kind is StrategyKind.REFLECT and self.party is not Party.BOB:
            raise StrategyMismatchError("The reflection attack is Bob's strategy")
        if self.kind is StrategyKind.FAKE_SEQUENCE and self.party is not Party.ALICE:
            raise StrategyMismatchError("The fake-sequence attack is Alice's strategy")
        if self.kind is not StrategyKind.REFLECT and self.flip is not PauliLabel.I:
            raise StrategyMismatchError("A Pauli flip only applies to the reflection attack")
        if self.desired not in (0, 1):
            raise ValueError(f"Desired coin must be 0 or 1, got {self.desired}")

    @classmethod
    def reflect(cls, flip: PauliLabel = PauliLabel.I) -> "Strategy":
        return cls(Party.BOB, StrategyKind.REFLECT, flip=flip, desired=pauli_parity(flip))

    @classmethod
    def fake_sequence(cls, desired: int) -> "Strategy":
        return cls(Party.ALICE, StrategyKind.FAKE_SEQUENCE, desired=desired)

    @classmethod
    def honest(cls) -> "Strategy":
        return cls(Party.ALICE, StrategyKind.HONEST)

    @property
    def descriptor(self) -> str:
        if self.kind is StrategyKind.REFLECT:
            return f"bob:reflect:{self.flip.name}"
        if self.kind is StrategyKind.FAKE_SEQUENCE:
            return f"alice:fake-seq:{self.desired}"
        return "honest"


@dataclass(frozen=True)
class CycleStructure:
    """Cycles of tau over pair indices 1..N; ``tau[j - 1]`` is tau(j)."""

    tau: Tuple[int, ...]
    orbits: Tuple[Tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if sum(len(orbit) for orbit in self.orbits) != len(self.tau):
            raise ValueError("Cycle lengths must add up to N")

    @property
    def cycles(self) -> List[int]:
        return [len(orbit) for orbit in self.orbits]

    @property
    def m(self) -> int:
        return len(self.orbits)

    @property
    def n(self) -> int:
        return len(self.tau)


def cycle_structure(true_seq: Sequence, claimed_seq: Sequence) -> CycleStructure:
    """Decompose tau = true o claimed^-1.

    ``claimed_seq[slot]`` is the pair index Bob claims for the particle he
    received in that slot, so tau(j) is the pair whose odd particle comes back
    to Alice as "Bob's pair j".
    """
    if true_seq.n != claimed_seq.n:
        raise SizeMismatchError(f"Sequences over {true_seq.n} and {claimed_seq.n} pairs")
    claimed_inverse = claimed_seq.inverse()
    tau = tuple(true_seq.pair_at(claimed_inverse.pair_at(j - 1) - 1) for j in range(1, true_seq.n + 1))

    seen = set()
    orbits = []
    for start in range(1, len(tau) + 1):
        if start in seen:
            continue
        orbit = []
        j = start
        while j not in seen:
            seen.add(j)
            orbit.append(j)
            j = tau[j - 1]
        orbits.append(tuple(orbit))
    return CycleStructure(tau, tuple(orbits))


def best_guess_results(
    cycles: CycleStructure,
    rng: np.random.Generator,
    initial_labels: Optional[Mapping[int, BellLabel]] = None,
) -> List[BellLabel]:
    """Fabricate Alice's results, uniform over assignments consistent per cycle.

    Within a cycle the outcomes must XOR to the XOR of the cycle's initial
    pair labels (all phi+ unless Bob flipped one); a fixed point is a pair
    measured in its own basis, so its result is certain.
    """
    labels = initial_labels or {}
    results: Dict[int, BellLabel] = {}
    for orbit in cycles.orbits:
        target = label_xor(*(labels.get(pair, BellLabel.PHI_PLUS) for pair in orbit))
        free = [BellLabel(int(v)) for v in rng.integers(4, size=len(orbit) - 1)] if len(orbit) > 1 else []
        for pair, label in zip(orbit, free):
            results[pair] = label
        results[orbit[-1]] = label_xor(target, *free)
    return [results[j] for j in range(1, cycles.n + 1)]


class ReflectingBob(BobParty):
    """Sends Alice's particles straight back and guesses her results."""

    def __init__(self, *args, flip: PauliLabel = PauliLabel.I, random_claim: bool = True, **kwargs):
        super().__init__(*args, **kwargs)
        self.flip = flip
        self.random_claim = random_claim
        self.claim: Optional[Sequence] = None
        self.cycles: Optional[CycleStructure] = None

    def send_batch(self) -> ParticleBatch:
        self._advance((Stage.RECEIVED,), Stage.SENT, "send his batch")
        if self.random_claim:
            self.claim = Sequence.random(self.n_pairs, self.rng)
        else:
            self.claim = Sequence.identity(self.n_pairs)
        returned: List[Optional[ParticleId]] = [None] * self.n_pairs
        for slot, particle in enumerate(self.received):
            returned[self.claim.pair_at(slot) - 1] = particle
        if self.flip is not PauliLabel.I:
            self.matching.apply_pauli_to(self.received[0], self.flip)
        self.sent = tuple(returned)
        return ParticleBatch(self.party, self.sent)

    def measure(self) -> None:
        # Nothing of Alice's is left for him to measure.
        self._advance((Stage.INFORMED,), Stage.MEASURED, "measure")

    def announce_results(self) -> ResultsAnnouncement:
        self._advance((Stage.MEASURED,), Stage.DONE, "announce results")
        self.cycles = cycle_structure(self.alice_sequence, self.claim)
        initial = {}
        if self.flip is not PauliLabel.I:
            initial[self.alice_sequence.pair_at(0)] = BellLabel(int(self.flip))
        self.outcomes = best_guess_results(self.cycles, self.rng, initial)
        return ResultsAnnouncement(tuple(self.outcomes))


class FakeSequenceAlice(AliceParty):
    """Measures before announcing and lies about her order when the coin is wrong."""

    def __init__(self, *args, desired: int = 0, **kwargs):
        super().__init__(*args, **kwargs)
        self.desired = desired
        self.announced: Optional[Sequence] = None

    def announce_sequence(self) -> SequenceAnnouncement:
        self.measure()
        self.announced = self.sequence
        if self.coin() != self.desired and self.n_pairs > 1:
            candidate = Sequence.random(self.n_pairs, self.rng)
            while candidate == self.sequence:
                candidate = Sequence.random(self.n_pairs, self.rng)
            self.announced = candidate
        return SequenceAnnouncement(self.announced)

    def verify(self, announcement: ResultsAnnouncement) -> Verdict:
        self._advance((Stage.MEASURED,), Stage.DONE, "verify")
        return Verdict.ACCEPT


@dataclass(frozen=True)
class ReflectOutcome:
    transcript: SessionTranscript
    passed: bool
    coin: int
    cycles: CycleStructure


def reflect_trial(
    config: SessionConfig,
    flip: PauliLabel,
    rng: np.random.Generator,
    random_claim: bool = True,
) -> ReflectOutcome:
    matching = EntangledMatching.protocol_start(config.n_pairs)
    alice = AliceParty(config.n_pairs, matching, rng, config.noise)
    bob = ReflectingBob(config.n_pairs, matching, rng, config.noise, flip=flip, random_claim=random_claim)
    transcript = run_session(config, alice, bob)
    return ReflectOutcome(transcript, transcript.accepted, transcript.alice_coin, bob.cycles)


def run_reflect_attack(
    config: SessionConfig,
    flip: PauliLabel,
    rng: np.random.Generator,
    random_claim: bool = True,
) -> Tuple[SessionTranscript, bool, int]:
    """Returns the transcript, whether Alice accepted, and the coin Alice computes."""
    outcome = reflect_trial(config, flip, rng, random_claim)
    return outcome.transcript, outcome.passed, outcome.coin


def run_fake_sequence_attack(
    config: SessionConfig, desired: int, rng: np.random.Generator
) -> Tuple[SessionTranscript, int]:
    """Returns the transcript and the coin Bob computes."""
    matching = EntangledMatching.protocol_start(config.n_pairs)
    alice = FakeSequenceAlice(config.n_pairs, matching, rng, config.noise, desired=desired)
    bob = BobParty(config.n_pairs, matching, rng, config.noise)
    transcript = run_session(config, alice, bob)
    return transcript, transcript.bob_coin


def run_naive_relay_attack(pauli: PauliLabel, rng: np.random.Generator) -> NaiveExchange:
    """Single-pair exchange without the sequence step: Alice bounces Bob's particle back.

    Bob then measures his own pair, so his coin is parity(pauli) with certainty.
    """
    matching = EntangledMatching.protocol_start(1)
    bob_odd = ParticleId(Party.BOB, 1)
    matching.apply_pauli_to(bob_odd, pauli)
    bob_outcome = matching.measure(ParticleId(Party.BOB, 2), bob_odd, rng)
    return NaiveExchange(None, bob_outcome)


class ExperimentReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    strategy: str = Field(..., description="Strategy descriptor")
    n_pairs: int = Field(..., ge=1)
    trials: int = Field(..., ge=1)
    successes: int = Field(..., ge=0)
    estimate: float = Field(..., ge=0.0, le=1.0)
    ci_low: float = Field(..., ge=0.0, le=1.0)
    ci_high: float = Field(..., ge=0.0, le=1.0)
    forced_coin_rate: float = Field(..., ge=0.0, le=1.0)
    parity_mismatches: int = Field(default=0, ge=0)
    seed: int
    gamma: Optional[float] = None

    @model_validator(mode="after")
    def _interval_contains_estimate(self) -> "ExperimentReport":
        if not self.ci_low <= self.estimate <= self.ci_high:
            raise ValueError("Confidence interval must contain the estimate")
        if self.estimate != self.successes / self.trials:
            raise ValueError("estimate must equal successes / trials")
        return self


@dataclass(frozen=True)
class TrialCounts:
    trials: int = 0
    successes: int = 0
    forced: int = 0
    parity_mismatches: int = 0

    def __add__(self, other: "TrialCounts") -> "TrialCounts":
        return TrialCounts(
            self.trials + other.trials,
            self.successes + other.successes,
            self.forced + other.forced,
            self.parity_mismatches + other.parity_mismatches,
        )


def run_trials(
    strategy: Strategy, n_pairs: int, seed: int, gamma: Optional[float], start: int, stop: int
) -> TrialCounts:
    """Trials ``start..stop-1``; each draws from its own (seed, index) stream."""
    noise = NoiseModel(gamma=gamma) if gamma is not None else None
    config = SessionConfig(n_pairs=n_pairs, seed=seed, noise=noise)
    successes = forced = mismatches = 0
    for index in range(start, stop):
        rng = trial_rng(seed, index)
        if strategy.kind is StrategyKind.REFLECT:
            # Claimed identification fixed to identity: only tau matters.
            outcome = reflect_trial(config, strategy.flip, rng, random_claim=False)
            successes += outcome.passed
            forced += outcome.coin == strategy.desired
        elif strategy.kind is StrategyKind.FAKE_SEQUENCE:
            transcript, bob_coin = run_fake_sequence_attack(config, strategy.desired, rng)
            successes += bob_coin == strategy.desired
            forced += bob_coin == strategy.desired
            mismatches += total_parity(transcript.alice_outcomes) != total_parity(transcript.bob_outcomes)
        else:
            transcript = run_honest(config, rng)
            successes += transcript.accepted
            forced += transcript.coin == strategy.desired
    return TrialCounts(stop - start, successes, forced, mismatches)


def _chunks(trials: int, parts: int) -> List[Tuple[int, int]]:
    parts = max(1, min(parts, trials))
    bounds = np.linspace(0, trials, parts + 1).astype(int)
    return [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]


def run_experiment(
    strategy: Strategy,
    n_pairs: int,
    trials: int,
    seed: int,
    gamma: Optional[float] = None,
    workers: int = 1,
) -> ExperimentReport:
    """Run independent trials, optionally over a process pool, and summarize them."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    logger.info(
        f"Running {trials} trials of {strategy.descriptor} at N={n_pairs} "
        f"(seed={seed}, workers={workers})"
    )
    if workers <= 1:
        counts = run_trials(strategy, n_pairs, seed, gamma, 0, trials)
    else:
        counts = TrialCounts()
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = [
                executor.submit(run_trials, strategy, n_pairs, seed, gamma, lo, hi)
                for lo, hi in _chunks(trials, workers * 4)
            ]
            for future in futures:
                counts = counts + future.result()

    low, high = wilson_interval(counts.successes, counts.trials)
    report = ExperimentReport(
        strategy=strategy.descriptor,
        n_pairs=n_pairs,
        trials=counts.trials,
        successes=counts.successes,
        estimate=counts.successes / counts.trials,
        ci_low=low,
        ci_high=high,
        forced_coin_rate=counts.forced / counts.trials,
        parity_mismatches=counts.parity_mismatches,
        seed=seed,
        gamma=gamma,
    )
    logger.info(
        f"{strategy.descriptor}: estimate={report.estimate} "
        f"[{report.ci_low}, {report.ci_high}] forced={report.forced_coin_rate}"
    )
    return report


def estimate_pass_probability(
    config: SessionConfig, trials: int, flip: PauliLabel = PauliLabel.I, workers: int = 1
) -> ExperimentReport:
    """Bob's reflection-attack pass rate; per-trial streams derive from config.seed."""
    gamma = config.noise.gamma if config.noise else None
    return run_experiment(Strategy.reflect(flip), config.n_pairs, trials, config.seed, gamma, workers)


def estimate_fake_sequence(
    config: SessionConfig, desired: int, trials: int, workers: int = 1
) -> ExperimentReport:
    """How often Alice's fake announcement lands Bob on her desired coin."""
    gamma = config.noise.gamma if config.noise else None
    return run_experiment(
        Strategy.fake_sequence(desired), config.n_pairs, trials, config.seed, gamma, workers
    )
