"""
Utility functions for the quantum coin tossing toolkit.

Shared helpers for reproducible randomness, number formatting and
line-delimited record files.
"""

import json
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

import numpy as np

SEED_BITS = 64
MAX_SEED = 2**SEED_BITS - 1


def ensure_directory(path: str) -> None:
    """Ensure a directory exists, creating it if necessary."""
    Path(path).mkdir(parents=True, exist_ok=True)


def session_rng(seed: int) -> np.random.Generator:
    """Generator for a single run keyed only by the master seed."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed))


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream: trial ``index`` under master ``seed``.

    The stream depends only on (seed, index), so any trial can be replayed in
    isolation and chunking across workers never changes results.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def format_number(value: Optional[float]) -> str:
    """Shortest round-trip decimal; integers stay integers."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_jsonl(records: Iterable[Dict[str, Any]], path: str) -> None:
    """Write one JSON object per line."""
    parent = os.path.dirname(path)
    if parent:
        ensure_directory(parent)
    with open(path, "w") as f:
        for record in records:
            f.write(json.dumps(record, sort_keys=True) + "\n")


def read_jsonl(path: str) -> List[Dict[str, Any]]:
    """Load records written by write_jsonl; missing file gives an empty list."""
    if not os.path.exists(path):
        return []
    with open(path) as f:
        return [json.loads(line) for line in f if line.strip()]
