"""
Pytest configuration for the quantum coin tossing tests.
"""

import logging
import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def reset_logging():
    """Undo setup_logging so handlers do not leak between tests."""
    yield
    for name in ("qcoin", "runlog"):
        logger = logging.getLogger(name)
        for handler in list(logger.handlers):
            logger.removeHandler(handler)
            handler.close()
        logger.setLevel(logging.NOTSET)
        logger.propagate = True
