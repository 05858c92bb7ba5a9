"""Exception hierarchy. Everything user-facing derives from SSGError."""

from __future__ import annotations


class SSGError(Exception):
    """Base class for domain errors raised by this package."""


class FormatError(SSGError):
    """Malformed game text or rational literal.

    Carries the 1-based line and column of the offending token when known.
    """

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        if line is not None:
            where = f"line {line}"
            if col is not None:
                where += f", column {col}"
            message = f"{where}: {message}"
        super().__init__(message)


class ValidationError(SSGError):
    """A structural invariant of a game or value vector is violated."""


class StrategyError(SSGError):
    """A strategy does not match the game it is applied to."""


class GenerationError(SSGError):
    """The random generator exhausted its retry budget."""


class PreconditionError(SSGError):
    """An operation was called on an input outside its domain."""


class BudgetError(SSGError):
    """An exhaustive computation would exceed its configured budget."""


class LPError(SSGError):
    """Base class for linear program failures."""


class InfeasibleError(LPError):
    """The linear program has no feasible point."""


class UnboundedError(LPError):
    """The linear program's objective is unbounded."""


class NonConvergenceError(SSGError):
    """Iteration hit its sweep limit before meeting the tolerance.

    The partial result is attached so callers can inspect it.
    """

    def __init__(self, message: str, values=None, iterations: int = 0):
        super().__init__(message)
        self.values = values
        self.iterations = iterations


class CertificateError(SSGError):
    """A certificate is structurally incompatible with the game."""


class InternalCheckError(SSGError):
    """An internal consistency check failed; indicates a bug, not bad input."""
