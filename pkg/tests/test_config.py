"""
Tests for the Config module.
"""

import os
import tempfile
from pathlib import Path

import pytest
from pydantic import ValidationError

from qcoin.config import Config, RunConfig
from qcoin.errors import ConfigError

SHIPPED_CONFIG = Path(__file__).parent.parent / "config" / "default.yaml"


class TestConfig:
    """Test cases for Config class."""

    def test_default_config(self):
        """Test expected use case: default configuration."""
        config = Config()
        assert config.n_pairs == 4
        assert config.seed == 0
        assert config.gamma is None
        assert config.format == "text"
        assert config.p_threshold == 0.01
        assert config.lemma_sequences == 1000
        assert config.sampling_trials == 100000
        assert config.tv_tolerance == 0.02

    def test_custom_config(self):
        """Test edge case: custom configuration values."""
        config = Config(n_pairs=11, gamma=0.999, workers=4)
        assert config.n_pairs == 11
        assert config.gamma == 0.999
        assert config.workers == 4

    def test_from_yaml_nonexistent_file(self):
        """Test failure case: loading from non-existent YAML file."""
        config = Config.from_yaml("nonexistent.yaml")
        assert config == Config()

    def test_to_yaml_and_from_yaml(self):
        """Test expected use case: save and load YAML configuration."""
        with tempfile.TemporaryDirectory() as temp_dir:
            config_path = os.path.join(temp_dir, "conf", "test_config.yaml")

            original_config = Config(n_pairs=6, seed=99, gamma=0.5)
            original_config.to_yaml(config_path)

            loaded_config = Config.from_yaml(config_path)

            assert loaded_config == original_config
            assert loaded_config.trials == 10000

    def test_unknown_keys_rejected(self, tmp_path):
        """Test failure case: a typo in the YAML file."""
        path = tmp_path / "bad.yaml"
        path.write_text("n_pair: 3\n")
        with pytest.raises(ConfigError, match="n_pair"):
            Config.from_yaml(str(path))

    def test_non_mapping_rejected(self, tmp_path):
        """Test failure case: YAML that is not a mapping."""
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError):
            Config.from_yaml(str(path))

    def test_shipped_defaults_match(self):
        """Test expected use case: config/default.yaml mirrors the dataclass defaults."""
        assert Config.from_yaml(str(SHIPPED_CONFIG)) == Config()


class TestRunConfig:
    """Test cases for the validated per-command configuration."""

    def test_build_applies_overrides(self):
        """Test expected use case: given flags win, missing ones fall back."""
        cfg = RunConfig.build("toss", Config(n_pairs=5, seed=3), seed=8, gamma=None)
        assert cfg.n_pairs == 5
        assert cfg.seed == 8
        assert cfg.gamma is None

    def test_cheat_requires_strategy(self):
        """Test failure case: cheat without a strategy."""
        with pytest.raises(ValidationError):
            RunConfig(command="cheat", n_pairs=2, trials=10)

    @pytest.mark.parametrize(
        "overrides",
        [
            {"n_pairs": 0},
            {"trials": 0},
            {"seed": -1},
            {"gamma": 0.0},
            {"gamma": 1.5},
            {"format": "xml"},
            {"p_threshold": 1.0},
        ],
    )
    def test_invalid_values(self, overrides):
        """Test failure case: out-of-range settings."""
        with pytest.raises(ValidationError):
            RunConfig.build("toss", Config(), **overrides)

    def test_unknown_command(self):
        """Test failure case: a command that does not exist."""
        with pytest.raises(ValidationError):
            RunConfig(command="flip", n_pairs=1)
