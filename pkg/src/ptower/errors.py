"""Exception types raised across the package."""


class PtowerError(Exception):
    """Base class for all package errors."""


class NotDivisible(PtowerError):
    """A residue is not divisible by p."""


class PrecisionExhausted(PtowerError):
    """An operation would leave no p-adic digits."""


class NotFinite(PtowerError):
    """A module presented over Z/p^n does not have finite length there."""


class RamifiedInput(PtowerError):
    """Frobenius substitution was asked to act on the ramification slot."""


class NotMonomial(PtowerError):
    """A monomial-only operation received a non-monomial ideal."""


class NotSquarefree(PtowerError):
    """A squarefree-only operation received a non-squarefree monomial ideal."""


class Mismatch(PtowerError):
    """Two independent computations of the same object disagree."""


class ModeMismatch(PtowerError):
    """An operation is not defined for the tower's mode."""


class HypothesisFailed(PtowerError):
    """A standing hypothesis on the input does not hold."""


class DimensionMismatch(PtowerError):
    """Homology persists in untrusted degrees; the sequence is not a system of parameters here."""


class WindowTooSmall(PtowerError):
    """The truncation degree cannot see the whole requested invariant."""


class ValidationError(PtowerError):
    """A job configuration failed validation."""


class ParseError(PtowerError):
    """Malformed configuration or polynomial text."""

    def __init__(self, message, line=None, col=None):
        self.message = message
        self.line = line
        self.col = col
        parts = []
        if line is not None:
            parts.append(f"line {line}")
        if col is not None:
            parts.append(f"col {col}")
        where = ", ".join(parts) + ": " if parts else ""
        super().__init__(where + message)
