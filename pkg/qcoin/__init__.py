"""
Quantum coin tossing by entanglement swapping.

Symbolic Bell-pair engine, dense state-vector oracle, the two-party protocol,
cheating strategies and their closed-form analysis, plus a batch CLI.
"""

import logging
import os
from typing import Optional

from .config import Config, RunConfig
from .protocol import SessionConfig, run_honest

_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def setup_logging(log_level: str = "WARNING", log_dir: Optional[str] = None) -> None:
    """Configure the ``qcoin`` and ``runlog`` loggers.

    Console output goes to stderr so command output on stdout stays
    byte-identical between runs. Calling it again replaces the handlers.
    """
    level = getattr(logging, log_level.upper(), None)
    if not isinstance(level, int):
        raise ValueError(f"Unknown log level: {log_level!r}")

    formatter = logging.Formatter(_FORMAT)
    handlers = []

    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    handlers.append(console_handler)

    if log_dir:
        os.makedirs(log_dir, exist_ok=True)
        file_handler = logging.FileHandler(os.path.join(log_dir, "qcoin.log"))
        file_handler.setFormatter(formatter)
        handlers.append(file_handler)

    for name in ("qcoin", "runlog"):
        logger = logging.getLogger(name)
        for handler in list(logger.handlers):
            logger.removeHandler(handler)
            handler.close()
        for handler in handlers:
            logger.addHandler(handler)
        logger.setLevel(level)
        logger.propagate = False


__version__ = "0.1.0"

__all__ = ["Config", "RunConfig", "SessionConfig", "run_honest", "setup_logging"]
