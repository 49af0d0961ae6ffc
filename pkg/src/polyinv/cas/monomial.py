"""Monomials, packed exponent vectors and monomial orders.

A monomial over ``n`` variables is an exponent tuple.  Internally exponent
vectors are packed into one Python int with 32 bits per variable (variable
``i`` in bits ``32*i .. 32*i+31``), so the product of monomials is integer
addition.  Exponents must stay below 2**31; the top bit of each field is the
borrow guard used by divisibility tests.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

FIELD_BITS = 32
FIELD_MASK = (1 << FIELD_BITS) - 1
_GUARD_BIT = 1 << (FIELD_BITS - 1)

Monomial = tuple  # exponent tuple, one entry per ring variable


def pack(exps) -> int:
    key = 0
    for i, e in enumerate(exps):
        if e:
            if e < 0 or e >= _GUARD_BIT:
                raise ValueError(f"exponent {e} out of range")
            key |= e << (FIELD_BITS * i)
    return key


def unpack(key: int, n: int) -> tuple:
    return tuple((key >> (FIELD_BITS * i)) & FIELD_MASK for i in range(n))


def guard_mask(nfields: int) -> int:
    mask = 0
    for i in range(nfields):
        mask |= _GUARD_BIT << (FIELD_BITS * i)
    return mask


def divides(a: int, b: int, guard: int) -> bool:
    """True iff packed monomial ``a`` divides ``b`` (same layout, same guard)."""
    return ((b | guard) - a) & guard == guard


class OrderKind(enum.Enum):
    DEGLEX = "deglex"
    GREVLEX = "grevlex"
    LEX = "lex"
    BLOCK = "block"


@dataclass(frozen=True)
class MonomialOrder:
    """A monomial order, realised as a nonnegative integer weight matrix.

    ``BLOCK`` with ``split=k`` compares the variables ``k, k+1, ...`` first
    (by grevlex) and breaks ties with ``base`` on the variables ``0..k-1``.
    It is the elimination order used for the auxiliary variable of the
    radical-membership test.
    """

    kind: OrderKind
    split: int | None = None
    base: OrderKind = OrderKind.GREVLEX

    @classmethod
    def parse(cls, name: str) -> "MonomialOrder":
        return cls(OrderKind(name.lower()))

    @property
    def name(self) -> str:
        if self.kind is OrderKind.BLOCK:
            return f"block({self.split},{self.base.value})"
        return self.kind.value

    def weight_rows(self, n: int) -> tuple:
        return _weight_rows(self.kind, self.split, self.base, n)

    def sort_key(self, exps) -> tuple:
        """Key such that larger keys are larger monomials."""
        return tuple(sum(w * e for w, e in zip(row, exps)) for row in self.weight_rows(len(exps)))


def _grevlex_rows(n: int, offset: int, total: int) -> list:
    rows = []
    for j in range(n, 0, -1):
        row = [0] * total
        for i in range(j):
            row[offset + i] = 1
        rows.append(tuple(row))
    return rows


def _base_rows(kind: OrderKind, n: int, offset: int, total: int) -> list:
    if kind is OrderKind.GREVLEX:
        return _grevlex_rows(n, offset, total)
    units = []
    for i in range(n):
        row = [0] * total
        row[offset + i] = 1
        units.append(tuple(row))
    if kind is OrderKind.LEX:
        return units
    if kind is OrderKind.DEGLEX:
        deg = [0] * total
        for i in range(n):
            deg[offset + i] = 1
        return [tuple(deg)] + units
    raise ValueError(f"{kind} is not a base order")


@lru_cache(maxsize=None)
def _weight_rows(kind: OrderKind, split, base: OrderKind, n: int) -> tuple:
    if kind is not OrderKind.BLOCK:
        return tuple(_base_rows(kind, n, 0, n))
    if split is None or not 0 <= split <= n:
        raise ValueError("block order needs 0 <= split <= n")
    rows = _grevlex_rows(n - split, split, n) + _base_rows(base, split, 0, n)
    return tuple(rows)


DEGLEX = MonomialOrder(OrderKind.DEGLEX)
GREVLEX = MonomialOrder(OrderKind.GREVLEX)
LEX = MonomialOrder(OrderKind.LEX)


def block_order(split: int, base: MonomialOrder = GREVLEX) -> MonomialOrder:
    return MonomialOrder(OrderKind.BLOCK, split, base.kind)


def display_key(exps) -> tuple:
    """Sort key for the canonical display order.

    Ascending total degree; within one degree, lexicographically descending
    with ``x1 > x2 > ...``.  This is also the indexing order of template
    coefficients.
    """
    return (sum(exps), tuple(-e for e in exps))


def _compositions(n: int, d: int):
    if n == 1:
        yield (d,)
        return
    for first in range(d, -1, -1):
        for rest in _compositions(n - 1, d - first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def monomial_basis(n: int, d: int) -> tuple:
    """All exponent tuples of total degree <= d, in display order.

    >>> monomial_basis(2, 2)
    ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))
    """
    if n < 1 or d < 0:
        raise ValueError("monomial_basis needs n >= 1 and d >= 0")
    out = []
    for deg in range(d + 1):
        out.extend(_compositions(n, deg))
    assert len(out) == math.comb(n + d, d)
    return tuple(out)
