"""Exception hierarchy shared by every module of the engine."""

from __future__ import annotations


class PolyinvError(Exception):
    """Base class for all engine errors."""


class RingMismatchError(PolyinvError, ValueError):
    pass


class ArityError(PolyinvError, ValueError):
    pass


class ParseError(PolyinvError, ValueError):
    """Syntax error in polynomial text or in a loop file.

    ``line`` and ``column`` are 1-based; they are ``None`` when the error is
    not tied to a position (for instance an arity mismatch detected after
    parsing).
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}, column {column}: " if column is not None else f"line {line}: "
        super().__init__(where + message)


class UnsupportedGuardError(PolyinvError, ValueError):
    """The loop guard uses a feature the requested command cannot handle."""


class ResourceExhausted(PolyinvError):
    """A computation hit one of its caps.

    ``partial`` holds whatever the computation had established so far (a
    prefix of an invariant-set chain, a partial candidate list, ...).
    """

    timed_out = False

    def __init__(self, reason: str, partial=None):
        self.reason = reason
        self.partial = partial
        super().__init__(reason)


class DeadlineExceeded(ResourceExhausted):
    """The cooperative wall-clock deadline passed."""

    timed_out = True


class FallbackFailed(ResourceExhausted):
    """The z-variable repair phase of the truncated-ideal computation failed.

    ``candidates`` and ``failing`` are the candidate polynomials and the
    subset that did not pass the invariant check; ``timed_out`` tells
    whether the underlying cause was the deadline.
    """

    def __init__(self, reason: str, candidates=None, failing=None, timed_out: bool = False):
        self.candidates = candidates
        self.failing = failing
        self.timed_out = timed_out
        super().__init__(reason, partial=candidates)
