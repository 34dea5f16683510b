"""Exception types shared across the toolkit."""

from __future__ import annotations


class SetsylError(Exception):
    """Base class for all library errors."""


class ParseError(SetsylError):
    """Malformed surface syntax. Carries the source position."""

    def __init__(self, message: str, line: int, col: int, expected: frozenset = frozenset()):
        self.line = line
        self.col = col
        self.expected = frozenset(expected)
        super().__init__(f"{line}:{col}: {message}")


class ArityError(ParseError):
    """An operator application with the wrong number of arguments."""


class MixedAtomError(SetsylError):
    """An atom mixes operators from two different theory signatures."""


class UnsupportedAtomError(SetsylError):
    """An atom outside the fragment the called procedure handles."""


class UnboundVariableError(SetsylError):
    """Evaluation hit a variable the assignment does not cover."""


class BoundTooLargeError(SetsylError):
    """Universe enumeration requested beyond the supported rank."""


class SearchSpaceTooLargeError(SetsylError):
    """Bounded model search refused: the assignment space exceeds the guard."""


class ResourceLimitError(SetsylError):
    """Solver candidate budget exhausted before a verdict was reached."""


class NonConvexPluginError(SetsylError):
    """A plugin that is not convex was offered to the equality-propagation loop."""


class NonlinearTermError(SetsylError):
    """A term the linear-arithmetic plugin cannot express as a linear form."""


class PreconditionError(SetsylError):
    """A documented operation precondition does not hold for the arguments."""


class InvariantViolation(SetsylError):
    """An internal consistency check failed; indicates a bug, not bad input."""
