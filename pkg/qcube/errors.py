class QcubeError(Exception):
    """Base class of every error raised by the package."""


class DimensionError(QcubeError, ValueError):
    """A dimension is out of range or two objects disagree on it."""


class DimacsError(QcubeError, ValueError):
    """Malformed DIMACS, iCNF or cube file."""


class ColoringFormatError(QcubeError, ValueError):
    """Malformed coloring text file."""


class ThresholdError(QcubeError, ValueError):
    """A threshold is not a dyadic rational with denominator 2^n."""


class SolverError(QcubeError, RuntimeError):
    """An external tool failed or produced output that cannot be read."""


class ModelCheckError(SolverError):
    """A returned model falsifies a clause of the formula it was solved for."""

    def __init__(self, clause, message: str = "") -> None:
        self.clause = list(clause)
        super().__init__(message or f"model falsifies clause {self.clause}")


class OracleLimitError(QcubeError):
    """An exhaustive sweep was requested beyond the default dimension limit."""
