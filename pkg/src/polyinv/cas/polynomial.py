"""Exact multivariate polynomials over the rationals.

Coefficients are :class:`gmpy2.mpq` values (reduced, positive denominator).
Terms live in a dict keyed by packed exponent vectors; the display order is
imposed only when terms are listed or printed.  All objects are immutable.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, lcm

import gmpy2
from gmpy2 import mpq, mpz

from ..errors import ArityError, RingMismatchError
from ..limits import checkpoint
from ..kernels import addmul_terms, mul_terms
from .monomial import FIELD_BITS, FIELD_MASK, display_key, pack, unpack

Rational = type(mpq(0))
_MPZ = type(mpz(0))


def to_rational(value) -> "mpq":
    """Convert an exact number (int, Fraction, mpz, mpq or text) to ``mpq``."""
    if isinstance(value, Rational):
        return value
    if isinstance(value, (int, _MPZ)):
        return mpq(value)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        text = value.strip()
        num, _, den = text.partition("/")
        try:
            if den:
                return mpq(int(num), int(den))
            return mpq(int(num))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational constant: {value!r}") from exc
    raise TypeError(f"inexact or unsupported coefficient type: {type(value).__name__}")


def as_fraction(q) -> Fraction:
    q = to_rational(q)
    return Fraction(int(q.numerator), int(q.denominator))


def make_ring(names) -> tuple:
    ring = tuple(names)
    if len(set(ring)) != len(ring):
        raise ValueError(f"duplicate variable names in {ring}")
    if not ring:
        raise ValueError("a ring needs at least one variable")
    return ring


class Polynomial:
    """A polynomial in ``Q[ring]``.

    Build from a mapping ``{exponent tuple: coefficient}``; use
    :func:`polyinv.cas.parse_polynomial` for text.
    """

    __slots__ = ("ring", "_t", "_hash")

    def __init__(self, ring, terms=None):
        ring = make_ring(ring)
        n = len(ring)
        t = {}
        for exps, c in (terms or {}).items():
            if len(exps) != n:
                raise ArityError(f"exponent vector {exps} does not match ring of {n} variables")
            c = to_rational(c)
            if c:
                k = pack(exps)
                t[k] = t.get(k, 0) + c
        self.ring = ring
        self._t = {k: c for k, c in t.items() if c}
        self._hash = None

    @classmethod
    def _raw(cls, ring, t):
        obj = object.__new__(cls)
        obj.ring = ring
        obj._t = t
        obj._hash = None
        return obj

    @classmethod
    def zero(cls, ring) -> "Polynomial":
        return cls._raw(make_ring(ring), {})

    @classmethod
    def constant(cls, ring, value) -> "Polynomial":
        c = to_rational(value)
        return cls._raw(make_ring(ring), {0: c} if c else {})

    @classmethod
    def variable(cls, ring, which) -> "Polynomial":
        ring = make_ring(ring)
        i = ring.index(which) if isinstance(which, str) else int(which)
        if not 0 <= i < len(ring):
            raise ArityError(f"variable index {i} out of range")
        return cls._raw(ring, {1 << (FIELD_BITS * i): mpq(1)})

    @classmethod
    def monomial(cls, ring, exps, coeff=1) -> "Polynomial":
        return cls(ring, {tuple(exps): coeff})

    # -- inspection ------------------------------------------------------

    @property
    def nvars(self) -> int:
        return len(self.ring)

    def is_zero(self) -> bool:
        return not self._t

    def __bool__(self) -> bool:
        return bool(self._t)

    def __len__(self) -> int:
        return len(self._t)

    def is_constant(self) -> bool:
        return not self._t or (len(self._t) == 1 and 0 in self._t)

    def constant_term(self):
        return self._t.get(0, mpq(0))

    def terms(self) -> list:
        """``(coefficient, exponent tuple)`` pairs in display order."""
        n = len(self.ring)
        items = [(unpack(k, n), c) for k, c in self._t.items()]
        items.sort(key=lambda it: display_key(it[0]))
        return [(c, e) for e, c in items]

    def as_dict(self) -> dict:
        n = len(self.ring)
        return {unpack(k, n): c for k, c in self._t.items()}

    def coefficient(self, exps):
        return self._t.get(pack(exps), mpq(0))

    def total_degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self._t:
            return -1
        n = len(self.ring)
        return max(sum(unpack(k, n)) for k in self._t)

    def degree_in(self, indices) -> int:
        """Largest total degree in the given subset of variables (-1 for zero)."""
        if not self._t:
            return -1
        idx = list(indices)
        return max(sum((k >> (FIELD_BITS * i)) & FIELD_MASK for i in idx) for k in self._t)

    def variables(self) -> frozenset:
        used = set()
        for k in self._t:
            i = 0
            while k:
                if k & FIELD_MASK:
                    used.add(i)
                k >>= FIELD_BITS
                i += 1
        return frozenset(used)

    def max_coeff_bits(self) -> int:
        return max((c.numerator.bit_length() + c.denominator.bit_length() for c in self._t.values()), default=0)

    # -- arithmetic ------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            if other.ring != self.ring:
                raise RingMismatchError(f"ring mismatch: {self.ring} vs {other.ring}")
            return other
        try:
            return Polynomial.constant(self.ring, other)
        except TypeError:
            return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        t = dict(self._t)
        addmul_terms(t, other._t, mpq(1), 0)
        return Polynomial._raw(self.ring, t)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.ring, {k: -c for k, c in self._t.items()})

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        t = dict(self._t)
        addmul_terms(t, other._t, mpq(-1), 0)
        return Polynomial._raw(self.ring, t)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            if other.ring != self.ring:
                raise RingMismatchError(f"ring mismatch: {self.ring} vs {other.ring}")
            return Polynomial._raw(self.ring, mul_terms(self._t, other._t))
        try:
            c = to_rational(other)
        except TypeError:
            return NotImplemented
        return self.scale(c)

    __rmul__ = __mul__

    def scale(self, c) -> "Polynomial":
        c = to_rational(c)
        if not c:
            return Polynomial._raw(self.ring, {})
        return Polynomial._raw(self.ring, {k: v * c for k, v in self._t.items()})

    def shift(self, exps) -> "Polynomial":
        """Multiply by the monomial ``x^exps``."""
        s = pack(exps)
        return Polynomial._raw(self.ring, {k + s: c for k, c in self._t.items()})

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            raise ValueError("polynomial powers need a nonnegative integer exponent")
        result = {0: mpq(1)}
        base = self._t
        while e:
            if e & 1:
                result = mul_terms(result, base)
            e >>= 1
            if e:
                base = mul_terms(base, base)
        return Polynomial._raw(self.ring, result)

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.ring == other.ring and self._t == other._t
        if isinstance(other, (int, Fraction, Rational, _MPZ)):
            return self.is_constant() and self.constant_term() == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self._t.items())))
        return self._hash

    # -- evaluation and substitution ---------------------------------------

    def eval(self, point):
        """Exact value at ``point`` (a sequence of rationals)."""
        n = len(self.ring)
        if len(point) != n:
            raise ArityError(f"point has {len(point)} coordinates, ring has {n} variables")
        pt = [to_rational(v) for v in point]
        return eval_terms(self._t, pt)

    __call__ = eval

    def embed(self, ring) -> "Polynomial":
        """View this polynomial in a ring whose first variables are this ring's."""
        ring = make_ring(ring)
        if ring[: len(self.ring)] != self.ring:
            raise RingMismatchError(f"{ring} does not extend {self.ring}")
        return Polynomial._raw(ring, self._t)

    def restrict(self, ring) -> "Polynomial":
        """Inverse of :meth:`embed`; fails if a dropped variable occurs."""
        ring = make_ring(ring)
        if self.ring[: len(ring)] != ring:
            raise RingMismatchError(f"{ring} is not a prefix of {self.ring}")
        limit = 1 << (FIELD_BITS * len(ring))
        if any(k >= limit for k in self._t):
            raise RingMismatchError("polynomial uses variables outside the target ring")
        return Polynomial._raw(ring, self._t)

    def compose(self, F) -> "Polynomial":
        return compose(self, F)

    # -- normal forms --------------------------------------------------------

    def leading(self):
        """``(coefficient, exponents)`` of the DegLex-largest term (x1 > x2 > ...)."""
        if not self._t:
            raise ValueError("zero polynomial has no leading term")
        n = len(self.ring)

        def deglex(key):
            e = unpack(key, n)
            return (sum(e), e)

        k = max(self._t, key=deglex)
        return self._t[k], unpack(k, n)

    def canonical(self) -> "Polynomial":
        """Integer coefficients with content 1 and positive leading coefficient.

        Invariants only matter up to a nonzero scalar; this representative
        makes them comparable.  The zero polynomial is its own canonical form.
        """
        if not self._t:
            return self
        den = reduce(lcm, (int(c.denominator) for c in self._t.values()), 1)
        ints = {k: int(c.numerator) * (den // int(c.denominator)) for k, c in self._t.items()}
        content = reduce(gcd, (abs(v) for v in ints.values()), 0)
        lead, _ = self.leading()
        if lead < 0:
            content = -content
        return Polynomial._raw(self.ring, {k: mpq(v // content) for k, v in ints.items()})

    def is_canonical(self) -> bool:
        return self == self.canonical()

    def monic(self) -> "Polynomial":
        lead, _ = self.leading()
        return self.scale(1 / lead)

    # -- text ----------------------------------------------------------------

    def __str__(self):
        from .text import format_polynomial

        return format_polynomial(self)

    def __repr__(self):
        return f"Polynomial({str(self)!r}, ring={self.ring})"


def eval_terms(t: dict, pt) -> "mpq":
    n = len(pt)
    powers = [[mpq(1), v] for v in pt]
    total = mpq(0)
    for k, c in t.items():
        checkpoint()
        term = c
        i = 0
        while k:
            e = k & FIELD_MASK
            if e:
                pw = powers[i]
                while len(pw) <= e:
                    pw.append(pw[-1] * pw[1])
                term = term * pw[e]
            k >>= FIELD_BITS
            i += 1
            if i > n:
                raise ArityError("term uses a variable beyond the point's length")
        total += term
    return total


def add(f: Polynomial, g: Polynomial) -> Polynomial:
    if f.ring != g.ring:
        raise RingMismatchError(f"ring mismatch: {f.ring} vs {g.ring}")
    return f + g


def mul(f: Polynomial, g: Polynomial) -> Polynomial:
    if f.ring != g.ring:
        raise RingMismatchError(f"ring mismatch: {f.ring} vs {g.ring}")
    return f * g


def evaluate(f: Polynomial, point):
    return f.eval(point)


class PolyMap:
    """A polynomial map ``x -> (f_1(x), ..., f_n(x))`` of a ring to itself."""

    __slots__ = ("components",)

    def __init__(self, components):
        comps = tuple(components)
        if not comps:
            raise ArityError("a polynomial map needs at least one component")
        ring = comps[0].ring
        for f in comps:
            if f.ring != ring:
                raise RingMismatchError("all components must share one ring")
        if len(comps) != len(ring):
            raise ArityError(f"map has {len(comps)} components but the ring has {len(ring)} variables")
        self.components = comps

    @classmethod
    def identity(cls, ring) -> "PolyMap":
        ring = make_ring(ring)
        return cls(Polynomial.variable(ring, i) for i in range(len(ring)))

    @property
    def ring(self) -> tuple:
        return self.components[0].ring

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def __eq__(self, other):
        return isinstance(other, PolyMap) and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __call__(self, point):
        pt = [to_rational(v) for v in point]
        if len(pt) != len(self.components):
            raise ArityError("point dimension does not match the map")
        return tuple(eval_terms(f._t, pt) for f in self.components)

    def extended(self, ring) -> "PolyMap":
        """The map on a larger ring: same components, identity on new variables."""
        ring = make_ring(ring)
        if ring[: len(self.ring)] != self.ring:
            raise RingMismatchError(f"{ring} does not extend {self.ring}")
        comps = [f.embed(ring) for f in self.components]
        comps += [Polynomial.variable(ring, i) for i in range(len(self.ring), len(ring))]
        return PolyMap(comps)

    def then(self, other: "PolyMap") -> "PolyMap":
        """``other`` applied after ``self``: ``x -> other(self(x))``."""
        return PolyMap(compose(g, self) for g in other.components)

    def __str__(self):
        return "(" + ", ".join(str(f) for f in self.components) + ")"

    __repr__ = __str__


def compose(g: Polynomial, F) -> Polynomial:
    """Substitute ``F[i]`` for the ``i``-th variable of ``g``.

    ``F`` is a :class:`PolyMap` or a sequence of polynomials over one ring
    (possibly different from ``g``'s).  Evaluation is a recursive Horner
    scheme over the variables of ``g``.
    """
    comps = tuple(F.components if isinstance(F, PolyMap) else F)
    n = len(g.ring)
    if len(comps) != n:
        raise ArityError(f"cannot compose a polynomial in {n} variables with {len(comps)} components")
    target = comps[0].ring if comps else g.ring
    for f in comps:
        if f.ring != target:
            raise RingMismatchError("components of the substitution must share one ring")
    if not g._t:
        return Polynomial._raw(target, {})
    items = [(unpack(k, n), c) for k, c in g._t.items()]
    cache = [dict() for _ in range(n)]
    return Polynomial._raw(target, _horner(items, 0, comps, cache))


def _power(comps, cache, i, e):
    pw = cache[i]
    got = pw.get(e)
    if got is None:
        if e == 1:
            got = comps[i]._t
        else:
            half = _power(comps, cache, i, e // 2)
            got = mul_terms(half, half)
            if e & 1:
                got = mul_terms(got, comps[i]._t)
        pw[e] = got
    return got


def _horner(items, i, comps, cache):
    n = len(comps)
    while i < n and all(e[i] == 0 for e, _ in items):
        i += 1
    if i == n:
        total = sum((c for _, c in items), mpq(0))
        return {0: total} if total else {}
    groups = {}
    for e, c in items:
        groups.setdefault(e[i], []).append((e, c))
    degrees = sorted(groups, reverse=True)
    acc = _horner(groups[degrees[0]], i + 1, comps, cache)
    for prev, deg in zip(degrees, degrees[1:]):
        checkpoint()
        acc = mul_terms(acc, _power(comps, cache, i, prev - deg))
        addmul_terms(acc, _horner(groups[deg], i + 1, comps, cache), mpq(1), 0)
    if degrees[-1]:
        acc = mul_terms(acc, _power(comps, cache, i, degrees[-1]))
    return acc


def compose_all(gs, F) -> list:
    return [compose(g, F) for g in gs]
