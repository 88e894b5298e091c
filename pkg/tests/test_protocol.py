"""
Tests for the coin tossing protocol.
"""

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.stats import chisquare

from qcoin.adversary import run_naive_relay_attack
from qcoin.analysis import honest_accept_probability
from qcoin.bell_core import BellLabel, EntangledMatching, PauliLabel
from qcoin.errors import EmptyOutcomesError, LengthMismatchError, ProtocolOrderError
from qcoin.protocol import (
    ABORT,
    AliceParty,
    BobParty,
    NoiseModel,
    ParticleBatch,
    Phase,
    ResultsAnnouncement,
    Sequence,
    SequenceAnnouncement,
    SessionConfig,
    SessionTranscript,
    Verdict,
    alice_verify,
    apply_noise,
    run_honest,
    run_naive,
    toss_from_outcomes,
)
from qcoin.utils import read_jsonl, trial_rng


class TestSequence:
    """Test cases for transmission orders."""

    def test_random_is_permutation(self, rng):
        """Test expected use case: a random order of 1..N."""
        seq = Sequence.random(6, rng)
        assert sorted(seq.order) == [1, 2, 3, 4, 5, 6]

    def test_slot_and_inverse(self):
        """Test expected use case: slot_of inverts pair_at."""
        seq = Sequence((3, 1, 2))
        assert seq.pair_at(0) == 3
        assert seq.slot_of(3) == 0
        assert seq.inverse().order == (2, 3, 1)
        assert Sequence.identity(3).order == (1, 2, 3)

    def test_not_a_permutation(self):
        """Test failure case: repeated pair index."""
        with pytest.raises(ValueError):
            Sequence((1, 1, 2))


class TestCoinRule:
    """Test cases for the coin and verification rules."""

    def test_toss_from_outcomes(self):
        """Test expected use case: coin is the total parity."""
        assert toss_from_outcomes([BellLabel.PHI_PLUS]) == 0
        assert toss_from_outcomes([BellLabel.PHI_MINUS]) == 1
        assert toss_from_outcomes([BellLabel.PHI_MINUS, BellLabel.PSI_PLUS]) == 0

    def test_toss_empty(self):
        """Test failure case: no outcomes."""
        with pytest.raises(EmptyOutcomesError):
            toss_from_outcomes([])

    def test_verify_slot_by_slot(self):
        """Test expected use case: same labels in another order are rejected."""
        ours = [BellLabel.PHI_PLUS, BellLabel.PSI_MINUS]
        assert alice_verify(ours, list(ours)) is Verdict.ACCEPT
        assert alice_verify(ours, ours[::-1]) is Verdict.REJECT

    def test_verify_length_mismatch(self):
        """Test failure case: Bob announces the wrong number of results."""
        with pytest.raises(LengthMismatchError):
            alice_verify([BellLabel.PHI_PLUS], [])


class TestNoise:
    """Test cases for the measurement noise model."""

    def test_perfect_noise_draws_nothing(self):
        """Test edge case: gamma = 1 leaves outcome and generator untouched."""
        rng = np.random.default_rng(5)
        state = rng.bit_generator.state
        assert apply_noise(BellLabel.PSI_PLUS, NoiseModel(gamma=1.0), rng) is BellLabel.PSI_PLUS
        assert rng.bit_generator.state == state

    def test_errors_pick_another_label(self, rng):
        """Test expected use case: a failed measurement reports a different label."""
        noise = NoiseModel(gamma=1e-12)
        for label in BellLabel:
            for _ in range(20):
                assert apply_noise(label, noise, rng) is not label

    def test_quarter_gamma_is_uniform(self):
        """Test edge case: gamma = 1/4 reports all four labels equally often."""
        rng = np.random.default_rng(41)
        noise = NoiseModel(gamma=0.25)
        samples = 40000
        reported = [int(apply_noise(BellLabel.PSI_MINUS, noise, rng)) for _ in range(samples)]
        observed = np.bincount(reported, minlength=4)
        assert chisquare(observed, [samples / 4] * 4).pvalue > 0.001

    def test_high_gamma_corruption_rate(self):
        """Test expected use case: gamma = 0.999 corrupts about one report in a thousand."""
        rng = np.random.default_rng(42)
        noise = NoiseModel(gamma=0.999)
        samples = 100_000
        corrupted = sum(
            apply_noise(BellLabel.PHI_PLUS, noise, rng) is not BellLabel.PHI_PLUS
            for _ in range(samples)
        )
        expected = samples * 0.001
        sigma = np.sqrt(samples * 0.001 * 0.999)
        assert abs(corrupted - expected) <= 3 * sigma

    def test_perfect_noise_matches_noiseless_session(self):
        """Test edge case: a gamma = 1 run is the noiseless run, message for message."""
        for i in range(20):
            plain = run_honest(SessionConfig(n_pairs=2, seed=8), trial_rng(8, i))
            perfect = run_honest(
                SessionConfig(n_pairs=2, seed=8, noise=NoiseModel(gamma=1.0)), trial_rng(8, i)
            )
            assert perfect.to_records() == plain.to_records()
            assert perfect.alice_outcomes == plain.alice_outcomes
            assert perfect.coin == plain.coin

    def test_raw_outcomes_agree_under_noise(self):
        """Test expected use case: noise only touches reports, never what was measured."""
        config = SessionConfig(n_pairs=3, seed=6, noise=NoiseModel(gamma=0.7))
        corrupted = 0
        for i in range(100):
            t = run_honest(config, trial_rng(6, i))
            assert t.alice_raw_outcomes == t.bob_raw_outcomes
            assert len(t.alice_raw_outcomes) == 3
            corrupted += t.alice_outcomes != t.alice_raw_outcomes
        assert corrupted > 0

    def test_gamma_range(self):
        """Test failure case: gamma outside (0, 1]."""
        with pytest.raises(ValidationError):
            NoiseModel(gamma=0.0)
        with pytest.raises(ValidationError):
            NoiseModel(gamma=1.2)

    def test_noisy_accept_rate(self):
        """Test expected use case: honest accept rate follows (g^2 + (1-g)^2/3)^N."""
        config = SessionConfig(n_pairs=2, seed=4, noise=NoiseModel(gamma=0.9))
        runs = 3000
        accepted = sum(run_honest(config, trial_rng(4, i)).accepted for i in range(runs))
        expected = honest_accept_probability(0.9, 2)
        sigma = np.sqrt(expected * (1 - expected) / runs)
        assert abs(accepted / runs - expected) < 5 * sigma

    def test_rejected_session_aborts(self):
        """Test edge case: a reject makes the announced coin 'abort'."""
        config = SessionConfig(n_pairs=4, seed=0, noise=NoiseModel(gamma=0.3))
        transcripts = [run_honest(config, trial_rng(0, i)) for i in range(50)]
        rejected = [t for t in transcripts if not t.accepted]
        assert rejected
        assert all(t.coin == ABORT for t in rejected)


class TestHonestSession:
    """Test cases for complete honest runs."""

    @pytest.mark.parametrize("n_pairs", [1, 2, 4, 8])
    def test_accept_and_agree(self, n_pairs):
        """Test expected use case: noiseless runs accept and both coins agree."""
        config = SessionConfig(n_pairs=n_pairs, seed=1)
        for i in range(50):
            t = run_honest(config, trial_rng(1, i))
            assert t.verdict is Verdict.ACCEPT
            assert t.alice_outcomes == t.bob_outcomes
            assert t.alice_raw_outcomes == t.alice_outcomes
            assert t.alice_coin == t.bob_coin == t.coin

    def test_message_order(self, rng):
        """Test expected use case: transcript holds the six phases in order."""
        t = run_honest(SessionConfig(n_pairs=3), rng)
        assert [m.phase for m in t.messages] == list(Phase)
        assert len(t.messages[0].particles) == 3

    def test_same_seed_same_transcript(self):
        """Test expected use case: replaying a seed replays the session."""
        config = SessionConfig(n_pairs=4, seed=9)
        first = run_honest(config, trial_rng(9, 0)).to_records()
        second = run_honest(config, trial_rng(9, 0)).to_records()
        assert first == second

    def test_write_jsonl(self, tmp_path, rng):
        """Test expected use case: one record per message with index, phase, sender, payload."""
        t = run_honest(SessionConfig(n_pairs=2), rng)
        path = str(tmp_path / "transcript.jsonl")
        t.write_jsonl(path)
        records = read_jsonl(path)
        assert [r["index"] for r in records] == list(range(6))
        assert records[0]["phase"] == "alice-batch"
        assert records[0]["sender"] == "alice"
        assert records[-1]["payload"] == {"coin": t.coin}

    def test_invalid_config(self):
        """Test failure case: zero pairs."""
        with pytest.raises(ValidationError):
            SessionConfig(n_pairs=0)

    @pytest.mark.slow
    def test_coin_is_fair_at_scale(self):
        """Test expected use case: 10^5 sessions at N=4 give a fair, always accepted coin."""
        config = SessionConfig(n_pairs=4, seed=2024)
        runs = 100000
        zeros = 0
        for i in range(runs):
            t = run_honest(config, trial_rng(2024, i))
            assert t.accepted and t.alice_coin == t.bob_coin
            zeros += t.coin == 0
        assert abs(zeros / runs - 0.5) < 0.005


class TestPhaseOrder:
    """Test cases for out-of-order protocol actions."""

    def test_transcript_rejects_skipped_phase(self):
        """Test failure case: a sequence announcement before any batch."""
        t = SessionTranscript(SessionConfig(n_pairs=1))
        with pytest.raises(ProtocolOrderError):
            t.append(SequenceAnnouncement(Sequence.identity(1)))

    def test_transcript_rejects_short_results(self, rng):
        """Test failure case: results list shorter than N."""
        t = run_honest(SessionConfig(n_pairs=2), rng)
        fresh = SessionTranscript(SessionConfig(n_pairs=2))
        for message in t.messages[:3]:
            fresh.append(message)
        with pytest.raises(LengthMismatchError):
            fresh.append(ResultsAnnouncement((BellLabel.PHI_PLUS,)))

    def test_party_stage_guard(self, rng):
        """Test failure case: Alice cannot verify before measuring."""
        matching = EntangledMatching.protocol_start(1)
        alice = AliceParty(1, matching, rng)
        bob = BobParty(1, matching, rng)
        bob.receive_batch(alice.send_batch())
        with pytest.raises(ProtocolOrderError):
            alice.verify(ResultsAnnouncement((BellLabel.PHI_PLUS,)))

    def test_batch_sizes(self, rng):
        """Test failure case: a batch of the wrong size."""
        t = SessionTranscript(SessionConfig(n_pairs=2))
        with pytest.raises(LengthMismatchError):
            t.append(ParticleBatch(AliceParty.party, ()))


class TestNaiveExchange:
    """Test cases for the single-pair exchange without a sequence step."""

    def test_honest_outcomes_agree(self):
        """Test expected use case: both sides see the same label."""
        for i in range(30):
            ex = run_naive(trial_rng(3, i))
            assert ex.alice_outcome is ex.bob_outcome

    @pytest.mark.parametrize("pauli", list(PauliLabel))
    def test_relay_forces_bob(self, pauli):
        """Test failure case for the naive scheme: a relaying Alice fixes Bob's coin."""
        for i in range(20):
            ex = run_naive_relay_attack(pauli, trial_rng(5, i))
            assert ex.bob_coin == (pauli.x ^ pauli.z)
