"""
Oracle-vs-engine equivalence suite.

Every check runs the symbolic engine and the dense simulator on the same
question and compares the answers. ``residual_rule`` lets a caller swap in a
deliberately wrong rule to confirm the suite fails.
"""

import itertools
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from . import statevector_oracle as oracle
from .bell_core import (
    BellLabel,
    EntangledMatching,
    ParticleId,
    Party,
    ResidualRule,
    swap_residual,
    total_parity,
)
from .protocol import SessionConfig, run_honest
from .utils import session_rng, trial_rng

logger = logging.getLogger(__name__)

EXACT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _engine_residuals(
    b1: BellLabel, b2: BellLabel, rule: ResidualRule, rng: np.random.Generator
) -> Dict[BellLabel, BellLabel]:
    """Drive the engine until every swapping outcome has shown up once."""
    residuals: Dict[BellLabel, BellLabel] = {}
    a2, a3 = ParticleId(Party.ALICE, 2), ParticleId(Party.ALICE, 3)
    while len(residuals) < 4:
        matching = EntangledMatching.from_pairs(Party.ALICE, [b1, b2], residual_rule=rule)
        outcome = matching.measure(a2, a3, rng)
        residuals[outcome] = matching.label(ParticleId(Party.ALICE, 1), ParticleId(Party.ALICE, 4))
    return residuals


def check_residual_table(rule: ResidualRule, seed: int) -> CheckResult:
    rng = session_rng(seed)
    failures = []
    engine_cache = {}
    for b1, b2, outcome, expected in oracle.residual_table():
        if (b1, b2) not in engine_cache:
            engine_cache[(b1, b2)] = _engine_residuals(b1, b2, rule, rng)
        got = engine_cache[(b1, b2)][outcome]
        if got != expected:
            failures.append(f"{b1.bits}^{b2.bits}|{outcome.bits}: engine {got.bits}, oracle {expected.bits}")
    detail = f"{64 - len(failures)}/64 residual cases match"
    if failures:
        detail += "; first mismatch " + failures[0]
    return CheckResult("residual-table", not failures, detail)


def check_exact_distributions() -> CheckResult:
    """Partner measurement is a point mass; cross-pair measurement is uniform."""
    failures = 0
    for b1, b2 in itertools.product(BellLabel, repeat=2):
        state = oracle.prepare_pairs([b1, b2])
        if oracle.bell_distribution(state, 0, 1).point_mass() != b1:
            failures += 1
        if oracle.bell_distribution(state, 1, 2).total_variation([0.25] * 4) > EXACT_TOLERANCE:
            failures += 1
    return CheckResult("exact-distributions", failures == 0, f"{32 - failures}/32 exact distributions match")


def _histogram(labels: List[BellLabel]) -> np.ndarray:
    counts = np.bincount([int(b) for b in labels], minlength=4)
    return counts / counts.sum()


def check_sampled_swapping(
    rule: ResidualRule, seed: int, samples: int, tolerance: float
) -> CheckResult:
    """Empirical swapping outcomes of the engine against oracle collapses."""
    b1, b2 = BellLabel.PSI_MINUS, BellLabel.PHI_MINUS
    engine_rng, oracle_rng = trial_rng(seed, 0), trial_rng(seed, 1)
    a2, a3 = ParticleId(Party.ALICE, 2), ParticleId(Party.ALICE, 3)
    engine_outcomes = []
    for _ in range(samples):
        matching = EntangledMatching.from_pairs(Party.ALICE, [b1, b2], residual_rule=rule)
        engine_outcomes.append(matching.measure(a2, a3, engine_rng))

    state = oracle.prepare_pairs([b1, b2])
    dist = np.clip(np.asarray(oracle.bell_distribution(state, 1, 2).probabilities), 0.0, None)
    oracle_outcomes = [BellLabel(int(k)) for k in oracle_rng.choice(4, size=samples, p=dist / dist.sum())]

    tv = 0.5 * float(np.sum(np.abs(_histogram(engine_outcomes) - _histogram(oracle_outcomes))))
    return CheckResult(
        "sampled-swapping", tv < tolerance, f"TV distance {tv:.5f} over {samples} samples (< {tolerance})"
    )


def _engine_lemma_violations(
    n_pairs: int, sequences: int, rule: ResidualRule, rng: np.random.Generator
) -> int:
    violations = 0
    for _ in range(sequences):
        labels = [BellLabel(int(v)) for v in rng.integers(4, size=n_pairs)]
        matching = EntangledMatching.from_pairs(Party.ALICE, labels, residual_rule=rule)
        while matching.live_particles():
            live = matching.live_particles()
            i, j = rng.choice(len(live), size=2, replace=False)
            matching.measure(live[int(i)], live[int(j)], rng)
            if not matching.conservation_holds():
                violations += 1
                break
        else:
            if total_parity(matching.outcomes()) != total_parity(labels):
                violations += 1
    return violations


def _oracle_lemma_violations(n_pairs: int, sequences: int, rng: np.random.Generator) -> int:
    violations = 0
    for _ in range(sequences):
        labels = [BellLabel(int(v)) for v in rng.integers(4, size=n_pairs)]
        state = oracle.prepare_pairs(labels)
        live = list(range(2 * n_pairs))
        outcomes = []
        while live:
            i, j = sorted(rng.choice(len(live), size=2, replace=False), reverse=True)
            q1, q2 = live.pop(int(i)), live.pop(int(j))
            outcome, state = oracle.bell_measure_collapse(state, q1, q2, rng)
            outcomes.append(outcome)
        if total_parity(outcomes) != total_parity(labels):
            violations += 1
    return violations


def check_lemma(rule: ResidualRule, seed: int, sequences: int, max_pairs: int = 4) -> CheckResult:
    """Random maximal measurement sequences never change the total parity."""
    engine_violations = oracle_violations = 0
    for n_pairs in range(1, max_pairs + 1):
        engine_violations += _engine_lemma_violations(
            n_pairs, sequences, rule, trial_rng(seed, 100 + n_pairs)
        )
        oracle_violations += _oracle_lemma_violations(n_pairs, sequences, trial_rng(seed, 200 + n_pairs))
    passed = engine_violations == 0 and oracle_violations == 0
    return CheckResult(
        "total-parity-lemma",
        passed,
        f"N<={max_pairs}, {sequences} sequences each: "
        f"{engine_violations} engine / {oracle_violations} oracle violations",
    )


def oracle_honest_distribution(n_pairs: int) -> Tuple[Dict[Tuple[BellLabel, ...], float], int]:
    """Exact joint law of Alice's outcomes in an honest run, from the dense simulator.

    Alice's pair m sits on qubits (2m-2, 2m-1) and Bob's on (2N+2m-2, 2N+2m-1),
    odd particle first. Sending order does not affect the law, so Alice's
    particles are identified in canonical order. Also returns how many
    branches left Bob with a result different from Alice's.
    """
    base = 2 * n_pairs
    state = oracle.prepare_pairs([BellLabel.PHI_PLUS] * base)
    law: Dict[Tuple[BellLabel, ...], float] = {}
    disagreements = 0

    def branch(current, m, prefix, weight):
        nonlocal disagreements
        if m > n_pairs:
            for k, alice_outcome in enumerate(prefix, start=1):
                bob_dist = oracle.bell_distribution(current, base + 2 * k - 1, 2 * k - 2)
                if bob_dist.point_mass() != alice_outcome:
                    disagreements += 1
                    break
            law[tuple(prefix)] = law.get(tuple(prefix), 0.0) + weight
            return
        q_alice_even, q_bob_odd = 2 * m - 1, base + 2 * m - 2
        dist = oracle.bell_distribution(current, q_alice_even, q_bob_odd)
        for outcome in BellLabel:
            p = dist[outcome]
            if p <= EXACT_TOLERANCE:
                continue
            collapsed = oracle.project(current, q_alice_even, q_bob_odd, outcome)
            branch(collapsed, m + 1, prefix + [outcome], weight * p)

    branch(state, 1, [], 1.0)
    return law, disagreements


def check_honest_protocol(seed: int, samples: int, tolerance: float, max_pairs: int = 3) -> CheckResult:
    """Engine-run honest sessions against the oracle's exact outcome law."""
    worst_tv = 0.0
    total_disagreements = 0
    for n_pairs in range(1, max_pairs + 1):
        law, disagreements = oracle_honest_distribution(n_pairs)
        total_disagreements += disagreements
        config = SessionConfig(n_pairs=n_pairs, seed=seed)
        counts: Counter = Counter()
        for index in range(samples):
            transcript = run_honest(config, trial_rng(seed, 1000 * n_pairs + index))
            if transcript.alice_outcomes != transcript.bob_outcomes:
                total_disagreements += 1
            counts[tuple(transcript.alice_outcomes)] += 1
        cells = set(law) | set(counts)
        tv = 0.5 * sum(abs(counts[c] / samples - law.get(c, 0.0)) for c in cells)
        worst_tv = max(worst_tv, tv)
    passed = worst_tv < tolerance and total_disagreements == 0
    return CheckResult(
        "honest-protocol",
        passed,
        f"N<={max_pairs}: worst TV {worst_tv:.5f} (< {tolerance}), "
        f"{total_disagreements} Alice/Bob disagreements",
    )


def run_verification(
    seed: int,
    lemma_sequences: int,
    samples: int,
    tv_tolerance: float,
    residual_rule: ResidualRule = swap_residual,
) -> List[CheckResult]:
    results = [
        check_residual_table(residual_rule, seed),
        check_exact_distributions(),
        check_sampled_swapping(residual_rule, seed, samples, tv_tolerance),
        check_lemma(residual_rule, seed, lemma_sequences),
        check_honest_protocol(seed, samples, tv_tolerance),
    ]
    for result in results:
        log = logger.info if result.passed else logger.error
        log(f"{result.name}: {'pass' if result.passed else 'FAIL'} ({result.detail})")
    return results


def faulty_residual(b1: BellLabel, b2: BellLabel, outcome: BellLabel) -> BellLabel:
    """Negative control: forgets the measurement outcome."""
    return BellLabel(b1 ^ b2)
