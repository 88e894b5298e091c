"""
Exceptions raised by the quantum coin tossing toolkit.

Every error derives from QCoinError so callers (the CLI in particular) can
catch the whole family in one place.
"""


class QCoinError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(QCoinError, ValueError):
    """Invalid run or session configuration."""


class UnknownParticleError(QCoinError, KeyError):
    """A particle identifier that was never part of the matching."""


class AlreadyMeasuredError(QCoinError, ValueError):
    """A particle that has already been consumed by a Bell measurement."""


class SelfMeasurementError(QCoinError, ValueError):
    """A Bell measurement requested on one particle twice."""


class TooManyQubitsError(QCoinError, ValueError):
    """The dense simulator was asked for more qubits than it supports."""


class QubitIndexError(QCoinError, IndexError):
    """Qubit index outside the register."""


class CoincidentQubitsError(QCoinError, ValueError):
    """Both measured qubits are the same qubit."""


class EmptyOutcomesError(QCoinError, ValueError):
    """A coin was requested from an empty list of outcomes."""


class LengthMismatchError(QCoinError, ValueError):
    """Two result lists that must be compared slot by slot differ in length."""


class SizeMismatchError(QCoinError, ValueError):
    """Two sequences over different pair counts."""


class StrategyMismatchError(QCoinError, ValueError):
    """A cheating strategy assigned to the wrong party."""


class ProtocolOrderError(QCoinError, RuntimeError):
    """A protocol message or action arrived out of phase order."""
