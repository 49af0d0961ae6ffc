"""Cooperative resource governance.

Long-running kernels call :func:`checkpoint` periodically.  A deadline and a
coefficient bit-size ceiling can be installed for a dynamic extent with
:func:`limits`; nested calls only ever tighten the active limits.
"""

from __future__ import annotations

import contextlib
import contextvars
import time
from dataclasses import dataclass

from .errors import DeadlineExceeded, ResourceExhausted


@dataclass(frozen=True)
class _Active:
    deadline: float | None = None
    max_coeff_bits: int | None = None


_ACTIVE: contextvars.ContextVar[_Active] = contextvars.ContextVar("polyinv_limits", default=_Active())


def _tighter(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


@contextlib.contextmanager
def limits(timeout: float | None = None, max_coeff_bits: int | None = None):
    """Install a deadline ``timeout`` seconds from now and/or a bit ceiling."""
    cur = _ACTIVE.get()
    deadline = None if timeout is None else time.monotonic() + timeout
    new = _Active(_tighter(cur.deadline, deadline), _tighter(cur.max_coeff_bits, max_coeff_bits))
    token = _ACTIVE.set(new)
    try:
        yield new
    finally:
        _ACTIVE.reset(token)


def checkpoint(partial=None) -> None:
    """Raise :class:`DeadlineExceeded` if the active deadline has passed."""
    deadline = _ACTIVE.get().deadline
    if deadline is not None and time.monotonic() > deadline:
        raise DeadlineExceeded("deadline exceeded", partial)


def remaining() -> float | None:
    deadline = _ACTIVE.get().deadline
    return None if deadline is None else deadline - time.monotonic()


def max_coeff_bits() -> int | None:
    return _ACTIVE.get().max_coeff_bits


def check_bits(bits: int, what: str = "coefficient", partial=None) -> None:
    ceiling = _ACTIVE.get().max_coeff_bits
    if ceiling is not None and bits > ceiling:
        raise ResourceExhausted(f"{what} size {bits} bits exceeds ceiling of {ceiling} bits", partial)
