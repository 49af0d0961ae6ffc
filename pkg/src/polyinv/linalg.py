"""Exact linear algebra over Q, plus a modular kernel with exact lifting.

Vectors are lists of ``mpq``.  The exact routines use fraction-free
(Bareiss) elimination with the first-nonzero pivot in column order.  The
modular routines work on one word-sized prime at a time and lift through
CRT and rational reconstruction; their output is a *guess* that callers
certify exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from math import gcd, lcm

import gmpy2
from gmpy2 import mpq, mpz

from .kernels import ModEchelon
from .limits import checkpoint


def integer_row(row) -> list:
    """Scale a rational row to coprime integers (sign preserved)."""
    den = reduce(lcm, (int(mpq(c).denominator) for c in row), 1)
    ints = [mpz(mpq(c) * den) for c in row]
    g = reduce(gcd, (int(abs(v)) for v in ints), 0)
    if g > 1:
        ints = [v // g for v in ints]
    return ints


def echelon(rows, ncols: int):
    """Fraction-free row echelon form.

    Returns ``(E, pivots)``: the nonzero rows of a Bareiss echelon form
    (integer entries) and their pivot columns.  The pivot row for each
    column is the first remaining row with a nonzero entry there.
    """
    work = [integer_row(r) for r in rows]
    for r in work:
        if len(r) != ncols:
            raise ValueError(f"row of length {len(r)} in a system with {ncols} columns")
    work = [r for r in work if any(r)]
    pivots = []
    prev = mpz(1)
    top = 0
    for c in range(ncols):
        if top == len(work):
            break
        sel = next((i for i in range(top, len(work)) if work[i][c]), None)
        if sel is None:
            continue
        work[top], work[sel] = work[sel], work[top]
        prow = work[top]
        piv = prow[c]
        for i in range(top + 1, len(work)):
            row = work[i]
            f = row[c]
            for j in range(c, ncols):
                row[j] = (piv * row[j] - f * prow[j]) // prev
        prev = piv
        pivots.append(c)
        top += 1
        checkpoint()
    return work[:top], pivots


def rank(rows, ncols: int | None = None) -> int:
    rows = list(rows)
    if not rows:
        return 0
    return len(echelon(rows, ncols if ncols is not None else len(rows[0]))[1])


def kernel_basis(rows, ncols: int) -> list:
    """Exact basis of the right kernel ``{v : R v = 0}``.

    One vector per non-pivot column, with a 1 there and 0 at the other
    non-pivot columns (the reduced echelon form of the kernel).
    """
    E, pivots = echelon(rows, ncols)
    return _kernel_from_echelon(E, pivots, ncols)


def _kernel_from_echelon(E, pivots, ncols):
    pivset = set(pivots)
    free = [c for c in range(ncols) if c not in pivset]
    out = []
    for f in free:
        v = [mpq(0)] * ncols
        v[f] = mpq(1)
        for row, p in zip(reversed(E), reversed(pivots)):
            s = mpq(0)
            for j in range(p + 1, ncols):
                if row[j] and v[j]:
                    s += row[j] * v[j]
            v[p] = -s / row[p]
        out.append(v)
    return out


def rref(vectors) -> list:
    """Reduced row echelon form (nonzero rows only) of a list of rational vectors."""
    rows = [[mpq(c) for c in v] for v in vectors]
    if not rows:
        return []
    ncols = len(rows[0])
    top = 0
    for c in range(ncols):
        sel = next((i for i in range(top, len(rows)) if rows[i][c]), None)
        if sel is None:
            continue
        rows[top], rows[sel] = rows[sel], rows[top]
        prow = rows[top]
        inv = 1 / prow[c]
        for j in range(c, ncols):
            prow[j] *= inv
        for i, row in enumerate(rows):
            if i != top and row[c]:
                f = row[c]
                for j in range(c, ncols):
                    if prow[j]:
                        row[j] -= f * prow[j]
        top += 1
        if top == len(rows):
            break
    return rows[:top]


def span_equal(A, B) -> bool:
    """``span(A) == span(B)`` via rank A = rank B = rank [A; B]."""
    A = list(A)
    B = list(B)
    if not A or not B:
        return rank(A + B) == 0 if (A or B) else True
    n = len(A[0])
    ra = rank(A, n)
    return ra == rank(B, n) == rank(A + B, n)


def in_span(v, A) -> bool:
    A = list(A)
    if not any(v):
        return True
    if not A:
        return False
    return rank(A, len(v)) == rank(A + [v], len(v))


@dataclass
class LinearSystem:
    """Rows of a homogeneous system; columns indexed by ``monomials``."""

    rows: list
    monomials: tuple

    @property
    def ncols(self) -> int:
        return len(self.monomials)

    def kernel(self) -> list:
        return kernel_basis(self.rows, self.ncols)


# -- modular arithmetic ---------------------------------------------------

_PRIME_SEED = (1 << 62) - (1 << 40)


def primes(start: int = _PRIME_SEED):
    """Deterministic stream of primes just above ``start``."""
    p = mpz(start)
    while True:
        p = gmpy2.next_prime(p)
        yield int(p)


def to_mod(q, p: int):
    """``q`` as an element of Z/p, or None when p divides its denominator."""
    q = mpq(q)
    den = int(q.denominator) % p
    if den == 0:
        return None
    return int(q.numerator) * pow(den, -1, p) % p


ModularEchelon = ModEchelon


def rational_reconstruct(a: int, m: int):
    """The fraction n/d with |n|, d <= sqrt(m/2) congruent to a mod m, or None."""
    a %= m
    bound = gmpy2.isqrt(m // 2)
    r0, r1 = mpz(m), mpz(a)
    s0, s1 = mpz(0), mpz(1)
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    if gcd(int(r1), int(s1)) != 1:
        return None
    return mpq(r1, s1)


class CRTLift:
    """Accumulate residues of a fixed-shape integer table across primes."""

    def __init__(self):
        self.modulus = mpz(1)
        self.values = None

    def add(self, residues, p: int):
        if self.values is None:
            self.values = [mpz(r) for r in residues]
            self.modulus = mpz(p)
            return
        m = self.modulus
        inv = int(gmpy2.invert(m % p, p))
        self.values = [v + m * (((r - v) % p) * inv % p) for v, r in zip(self.values, residues)]
        self.modulus = m * p

    def reconstruct(self):
        out = []
        for v in self.values:
            q = rational_reconstruct(int(v), int(self.modulus))
            if q is None:
                return None
            out.append(q)
        return out
