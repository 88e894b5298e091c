"""
Configuration management for the coin tossing simulator.

``Config`` holds the defaults every command starts from and round-trips
through YAML. ``RunConfig`` is the validated configuration of a single
command invocation, built from a Config plus command-line overrides.
"""

import os
from dataclasses import asdict, dataclass, fields
from typing import Any, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import ConfigError
from .utils import MAX_SEED

SEED_ENV_VAR = "QCT_SEED"
DEFAULT_CONFIG_PATH = "config/default.yaml"

OutputFormat = Literal["text", "json", "csv"]
Command = Literal["toss", "cheat", "analyze", "verify"]


@dataclass
class Config:
    """Defaults shared by all commands."""

    # Protocol
    n_pairs: int = 4
    trials: int = 10000
    seed: int = 0
    gamma: Optional[float] = None

    # Output
    format: str = "text"
    workers: int = 1

    # Analysis
    p_threshold: float = 0.01

    # Logging and persistence
    log_level: str = "WARNING"
    log_dir: Optional[str] = None
    db_path: Optional[str] = None

    # Verification suite
    lemma_sequences: int = 1000
    sampling_trials: int = 100000
    tv_tolerance: float = 0.02

    @classmethod
    def from_yaml(cls, config_path: str = DEFAULT_CONFIG_PATH) -> "Config":
        """Load configuration from a YAML file; a missing file gives the defaults."""
        if not os.path.exists(config_path):
            return cls()
        with open(config_path) as f:
            config_data = yaml.safe_load(f) or {}
        if not isinstance(config_data, dict):
            raise ConfigError(f"{config_path} must contain a mapping")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(config_data) - known)
        if unknown:
            raise ConfigError(f"Unknown configuration keys in {config_path}: {', '.join(unknown)}")
        return cls(**config_data)

    def to_yaml(self, config_path: str = DEFAULT_CONFIG_PATH) -> None:
        directory = os.path.dirname(config_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(config_path, "w") as f:
            yaml.dump(asdict(self), f, default_flow_style=False)


class RunConfig(BaseModel):
    """Validated settings of one CLI command."""

    model_config = ConfigDict(frozen=True)

    command: Command
    n_pairs: int = Field(..., ge=1, description="Entangled pairs per party")
    trials: int = Field(default=1, ge=1, description="Monte Carlo trials")
    seed: int = Field(default=0, ge=0, le=MAX_SEED, description="Master seed")
    strategy: Optional[str] = Field(default=None, description="Strategy descriptor")
    gamma: Optional[float] = Field(default=None, gt=0.0, le=1.0)
    format: OutputFormat = "text"
    out: Optional[str] = None
    workers: int = Field(default=1, ge=1)
    p_threshold: float = Field(default=0.01, gt=0.0, lt=1.0)

    @model_validator(mode="after")
    def _strategy_required_for_cheat(self) -> "RunConfig":
        if self.command == "cheat" and not self.strategy:
            raise ValueError("cheat needs a strategy")
        return self

    @classmethod
    def build(cls, command: str, base: Config, **overrides: Any) -> "RunConfig":
        """Merge CLI overrides (None means "not given") onto a Config."""
        values = {
            "n_pairs": base.n_pairs,
            "trials": base.trials,
            "seed": base.seed,
            "gamma": base.gamma,
            "format": base.format,
            "workers": base.workers,
            "p_threshold": base.p_threshold,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(command=command, **values)
