"""
Run log for coin tossing sessions and experiments.

Persists protocol transcripts and Monte Carlo reports in SQLite so runs can
be inspected after the fact.
"""

from .api import RunLogAPI

__all__ = ["RunLogAPI"]
