"""
Backend-agnostic interface to the run log.

Callers hand over plain dicts (``SessionTranscript.to_records()`` and
``ExperimentReport.model_dump()``), so the store never imports the simulator.
"""

import json

from .sqlite_backend import SQLiteRunLogBackend

_SESSION_FIELDS = (
    "n_pairs",
    "seed",
    "gamma",
    "strategy",
    "verdict",
    "coin",
    "alice_coin",
    "bob_coin",
)
_EXPERIMENT_FIELDS = (
    "strategy",
    "n_pairs",
    "trials",
    "successes",
    "estimate",
    "ci_low",
    "ci_high",
    "forced_coin_rate",
    "parity_mismatches",
    "seed",
    "gamma",
)


class RunLogAPI:
    """Unified API for run log operations."""

    def __init__(self, backend=None, db_path="runs/qcoin.db"):
        self.backend = backend or SQLiteRunLogBackend(db_path=db_path)

    # Session operations
    def record_session(self, summary, messages):
        fields = {k: summary.get(k) for k in _SESSION_FIELDS if summary.get(k) is not None}
        if "coin" in fields:
            fields["coin"] = str(fields["coin"])
        return self.backend.add_session(messages=list(messages), **fields)

    def get_session(self, session_id):
        return self.backend.get_session(session_id)

    def list_sessions(self, n_pairs=None):
        return self.backend.list_sessions(n_pairs=n_pairs)

    # Message operations
    def get_messages(self, session_id):
        return self.backend.get_messages(session_id)

    def get_transcript(self, session_id):
        """Messages back in ``to_records()`` form."""
        return [
            {
                "index": m.index,
                "phase": m.phase,
                "sender": m.sender,
                "payload": json.loads(m.payload),
            }
            for m in self.get_messages(session_id)
        ]

    # Experiment operations
    def record_experiment(self, report):
        return self.backend.add_experiment(**{k: report.get(k) for k in _EXPERIMENT_FIELDS})

    def list_experiments(self, strategy=None):
        return self.backend.list_experiments(strategy=strategy)
