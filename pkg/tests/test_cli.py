"""
Tests for the command-line interface.
"""

import csv
import io
import json

import pytest
from typer.testing import CliRunner

from qcoin.cli import app
from qcoin.utils import read_jsonl
from runlog import RunLogAPI


@pytest.fixture
def runner():
    return CliRunner(mix_stderr=False)


@pytest.fixture
def quick_config(tmp_path):
    """Small verification sizes so the suite runs in a few seconds."""
    path = tmp_path / "quick.yaml"
    path.write_text("lemma_sequences: 100\nsampling_trials: 3000\ntv_tolerance: 0.15\n")
    return str(path)


@pytest.mark.usefixtures("reset_logging")
class TestToss:
    """Test cases for the toss command."""

    def test_deterministic(self, runner):
        """Test expected use case: the same seed prints the same bytes."""
        first = runner.invoke(app, ["toss", "--n-pairs", "4", "--seed", "7"])
        second = runner.invoke(app, ["toss", "--n-pairs", "4", "--seed", "7"])
        assert first.exit_code == 0
        assert first.stdout == second.stdout

    def test_single_pair(self, runner):
        """Test expected use case: one pair, accepted, coin 0 or 1."""
        result = runner.invoke(app, ["toss", "--n-pairs", "1", "--seed", "1"])
        assert result.exit_code == 0
        lines = result.stdout.splitlines()
        assert lines[0] in ("coin: 0", "coin: 1")
        assert lines[1] == "verdict: accept"

    def test_env_seed(self, runner):
        """Test expected use case: QCT_SEED stands in for --seed."""
        from_env = runner.invoke(app, ["toss", "--format", "json"], env={"QCT_SEED": "7"})
        from_flag = runner.invoke(app, ["toss", "--format", "json", "--seed", "7"])
        assert from_env.stdout == from_flag.stdout
        assert json.loads(from_env.stdout)["seed"] == 7

    def test_flag_beats_env(self, runner):
        """Test edge case: an explicit --seed wins over QCT_SEED."""
        result = runner.invoke(app, ["toss", "--format", "json", "--seed", "3"], env={"QCT_SEED": "7"})
        assert json.loads(result.stdout)["seed"] == 3

    def test_noisy_sessions_can_abort(self, runner):
        """Test edge case: heavy noise produces rejects across seeds."""
        verdicts = set()
        for seed in range(10):
            result = runner.invoke(
                app, ["toss", "--n-pairs", "4", "--gamma", "0.5", "--seed", str(seed), "--format", "json"]
            )
            verdicts.add(json.loads(result.stdout)["verdict"])
        assert "reject" in verdicts

    def test_transcript_file(self, runner, tmp_path):
        """Test expected use case: --out writes one JSON line per message."""
        out = tmp_path / "t.jsonl"
        result = runner.invoke(app, ["toss", "--n-pairs", "2", "--seed", "3", "--out", str(out)])
        assert result.exit_code == 0
        records = read_jsonl(str(out))
        assert [r["phase"] for r in records] == [
            "alice-batch",
            "bob-batch",
            "sequence",
            "results",
            "verdict",
            "coin",
        ]

    def test_records_to_db(self, runner, tmp_path):
        """Test expected use case: --db stores the session and its messages."""
        db = str(tmp_path / "runs.db")
        result = runner.invoke(app, ["toss", "--n-pairs", "2", "--seed", "3", "--db", db])
        assert result.exit_code == 0
        sessions = RunLogAPI(db_path=db).list_sessions()
        assert len(sessions) == 1
        assert len(RunLogAPI(db_path=db).get_transcript(sessions[0].id)) == 6

    @pytest.mark.parametrize(
        "args", [["--n-pairs", "0"], ["--gamma", "1.5"], ["--format", "xml"]]
    )
    def test_invalid_config(self, runner, args):
        """Test failure case: invalid settings exit with code 2."""
        result = runner.invoke(app, ["toss", *args])
        assert result.exit_code == 2


@pytest.mark.usefixtures("reset_logging")
class TestCheat:
    """Test cases for the cheat command."""

    def test_reflect_flip_x(self, runner):
        """Test expected use case: flip X forces coin 1 in every trial."""
        result = runner.invoke(
            app,
            ["cheat", "--strategy", "reflect", "--flip", "X", "--n-pairs", "3", "--trials", "300", "--format", "json"],
        )
        assert result.exit_code == 0
        payload = json.loads(result.stdout)
        assert payload["report"]["forced_coin_rate"] == 1.0
        assert payload["report"]["strategy"] == "bob:reflect:X"
        assert payload["model_discrepancy"] is True

    def test_fake_sequence(self, runner):
        """Test expected use case: Alice's attack reports no parity mismatch."""
        result = runner.invoke(
            app,
            ["cheat", "--strategy", "fake-seq", "--desired", "0", "--n-pairs", "2", "--trials", "400", "--format", "json"],
        )
        assert result.exit_code == 0
        assert json.loads(result.stdout)["report"]["parity_mismatches"] == 0

    def test_workers_keep_bytes(self, runner):
        """Test expected use case: parallel trials print the same report."""
        args = ["cheat", "--strategy", "reflect", "--n-pairs", "3", "--trials", "400", "--seed", "5", "--format", "csv"]
        serial = runner.invoke(app, args)
        pooled = runner.invoke(app, [*args, "--workers", "2"])
        assert serial.stdout == pooled.stdout

    @pytest.mark.parametrize(
        "args",
        [
            ["--strategy", "fake-seq", "--flip", "X"],
            ["--strategy", "reflect", "--desired", "1"],
            ["--strategy", "honest"],
            ["--strategy", "teleport"],
            ["--strategy", "reflect", "--flip", "H"],
        ],
    )
    def test_strategy_mismatch(self, runner, args):
        """Test failure case: strategy and party options that do not fit."""
        result = runner.invoke(app, ["cheat", *args, "--trials", "10"])
        assert result.exit_code == 2

    def test_zero_trials(self, runner):
        """Test failure case: trials must be at least one."""
        result = runner.invoke(app, ["cheat", "--strategy", "reflect", "--trials", "0"])
        assert result.exit_code == 2


@pytest.mark.usefixtures("reset_logging")
class TestAnalyze:
    """Test cases for the analyze command."""

    def test_n_eleven_row(self, runner):
        """Test expected use case: N=11 shows 0.009095 and min_gamma 0.99909."""
        result = runner.invoke(app, ["analyze", "--n-pairs", "11", "--format", "csv"])
        assert result.exit_code == 0
        rows = list(csv.DictReader(io.StringIO(result.stdout)))
        values = {(int(r["n_pairs"]), r["model"]): float(r["value"]) for r in rows}
        assert values[(11, "paper-eq4")] == pytest.approx(0.009095, abs=1e-6)
        assert values[(11, "min-gamma")] == pytest.approx(0.99909, abs=5e-5)
        assert values[(1, "paper-eq4")] == values[(1, "appendix-sum")] == values[(1, "permutation-exact")] == 1.0

    def test_json_matches_csv(self, runner):
        """Test expected use case: both formats carry identical values."""
        as_json = runner.invoke(app, ["analyze", "--n-pairs", "6", "--format", "json"])
        as_csv = runner.invoke(app, ["analyze", "--n-pairs", "6", "--format", "csv"])
        json_values = [r["value"] for r in json.loads(as_json.stdout)]
        csv_values = [float(r["value"]) for r in csv.DictReader(io.StringIO(as_csv.stdout))]
        assert json_values == csv_values

    def test_out_file(self, runner, tmp_path):
        """Test expected use case: --out holds the same bytes as stdout."""
        out = tmp_path / "table.txt"
        result = runner.invoke(app, ["analyze", "--n-pairs", "3", "--out", str(out)])
        assert out.read_text() == result.stdout

    def test_bad_threshold(self, runner):
        """Test failure case: p-threshold outside (0, 1)."""
        result = runner.invoke(app, ["analyze", "--p-threshold", "1.5"])
        assert result.exit_code == 2


@pytest.mark.usefixtures("reset_logging")
class TestVerify:
    """Test cases for the verify command."""

    def test_passes(self, runner, quick_config):
        """Test expected use case: the suite passes and exits 0."""
        result = runner.invoke(app, ["--config", quick_config, "verify", "--format", "json"])
        assert result.exit_code == 0
        checks = json.loads(result.stdout)
        residual = [c for c in checks if c["name"] == "residual-table"][0]
        assert residual["detail"].startswith("64/64")

    def test_injected_fault(self, runner, quick_config):
        """Test failure case: a wrong residual rule exits with code 3."""
        result = runner.invoke(app, ["--config", quick_config, "verify", "--inject-fault"])
        assert result.exit_code == 3

    def test_missing_config(self, runner):
        """Test failure case: --config pointing nowhere."""
        result = runner.invoke(app, ["--config", "nowhere.yaml", "verify"])
        assert result.exit_code == 2

    def test_bad_log_level(self, runner):
        """Test failure case: an unknown log level."""
        result = runner.invoke(app, ["--log-level", "LOUD", "analyze"])
        assert result.exit_code == 2

    @pytest.mark.slow
    def test_default_sizes(self, runner):
        """Test expected use case: the shipped defaults pass."""
        result = runner.invoke(app, ["verify"])
        assert result.exit_code == 0
