"""Gröbner bases over Q, normal forms and radical membership.

Buchberger's algorithm with the Gebauer–Möller pair update (coprime
leading monomials and the chain criterion) and the normal selection
strategy.  Basis elements are kept monic with ``mpq`` coefficients; monomials
are encoded as *order keys*: packed integers whose integer order is the
monomial order (see :class:`_Ordering`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from heapq import heappop, heappush

from gmpy2 import mpq

from .cas.monomial import (
    FIELD_BITS,
    FIELD_MASK,
    GREVLEX,
    MonomialOrder,
    OrderKind,
    block_order,
    guard_mask,
)
from .cas.polynomial import Polynomial, make_ring
from .errors import ResourceExhausted, RingMismatchError
from .kernels import addmul_terms, nf_reduce
from .limits import check_bits, checkpoint

AUX_PREFIX = "__t"


class _Ordering:
    """Translate packed exponent vectors into order keys and back.

    An order key stacks the weight-matrix rows of the order above the raw
    exponent fields.  Since the weights are linear and nonnegative, the key
    of a product is the sum of the keys, integer comparison is the monomial
    order, and one guard mask tests divisibility.
    """

    def __init__(self, order: MonomialOrder, n: int):
        rows = order.weight_rows(n)
        nrows = len(rows)
        self.order = order
        self.n = n
        self.lowmask = (1 << (FIELD_BITS * n)) - 1
        self.unit = []
        for i in range(n):
            key = 1 << (FIELD_BITS * i)
            for r, row in enumerate(rows):
                if row[i]:
                    key += row[i] << (FIELD_BITS * (n + nrows - 1 - r))
            self.unit.append(key)
        self.guard = guard_mask(n + nrows)

    def key(self, packed: int) -> int:
        k = 0
        unit = self.unit
        i = 0
        while packed:
            e = packed & FIELD_MASK
            if e:
                k += e * unit[i]
            packed >>= FIELD_BITS
            i += 1
        return k

    def exps(self, key: int) -> int:
        return key & self.lowmask

    def lcm(self, a: int, b: int) -> int:
        ea = a & self.lowmask
        eb = b & self.lowmask
        out = 0
        i = 0
        while ea or eb:
            x = ea & FIELD_MASK
            y = eb & FIELD_MASK
            m = x if x > y else y
            if m:
                out += m * self.unit[i]
            ea >>= FIELD_BITS
            eb >>= FIELD_BITS
            i += 1
        return out

    def divides(self, a: int, b: int) -> bool:
        g = self.guard
        return ((b | g) - a) & g == g

    def to_internal(self, f: Polynomial) -> dict:
        key = self.key
        return {key(k): c for k, c in f._t.items()}

    def to_polynomial(self, ring, terms) -> Polynomial:
        low = self.lowmask
        return Polynomial._raw(ring, {k & low: c for k, c in terms})


def _monic(terms):
    lead = terms[0][1]
    if lead == 1:
        return terms
    inv = 1 / lead
    return [(k, c * inv) for k, c in terms]


def _coeff_bits(terms) -> int:
    return max(c.numerator.bit_length() + c.denominator.bit_length() for _, c in terms)


@dataclass(frozen=True, eq=False)
class GroebnerBasis:
    """Reduced Gröbner basis of an ideal.

    ``generators`` are the basis elements in canonical form (integer
    coefficients, content 1), sorted by increasing leading monomial;
    ``source_ideal`` is the generator list the basis was computed from.
    """

    ring: tuple
    order: MonomialOrder
    generators: tuple
    source_ideal: tuple
    stats: dict = field(default_factory=dict, compare=False)
    _monic: tuple = field(default=(), repr=False, compare=False)

    def is_unit(self) -> bool:
        return len(self.generators) == 1 and self.generators[0].is_constant()

    def is_zero_ideal(self) -> bool:
        return not self.generators

    def __len__(self):
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def leading_monomials(self) -> list:
        ordering = _Ordering(self.order, len(self.ring))
        return [ordering.to_polynomial(self.ring, [(t[0][0], mpq(1))]) for t in self._monic]

    def contains(self, f: Polynomial) -> bool:
        return normal_form(f, self).is_zero()

    def same_as(self, other: "GroebnerBasis") -> bool:
        return (
            self.ring == other.ring
            and self.order == other.order
            and [g.as_dict() for g in self.generators] == [g.as_dict() for g in other.generators]
        )


def _ring_of(gens, ring):
    if ring is not None:
        ring = make_ring(ring)
    for g in gens:
        if ring is None:
            ring = g.ring
        elif g.ring != ring:
            raise RingMismatchError(f"ring mismatch: {g.ring} vs {ring}")
    if ring is None:
        raise ValueError("cannot infer the ring of an empty generator list; pass ring=")
    return ring


class _Buchberger:
    def __init__(self, ordering: _Ordering, max_pairs=None):
        self.o = ordering
        self.max_pairs = max_pairs
        self.basis = []
        self.leads = []
        self.active = []
        self.pairs = {}
        self.heap = []
        self.red_leads = []
        self.red_tails = []
        self.unit = False
        self.processed = 0
        self.zero_reductions = 0

    def _refresh_reducers(self):
        self.red_leads = [self.leads[i] for i in self.active]
        self.red_tails = [self.basis[i][1:] for i in self.active]

    def reduce(self, terms: dict):
        return nf_reduce(terms, self.red_leads, self.red_tails, self.o.guard)

    def seed(self, polys):
        for p in polys:
            self.basis.append(p)
            self.leads.append(p[0][0])
            self.active.append(len(self.basis) - 1)
        self._refresh_reducers()

    def add(self, terms: list):
        if terms[0][0] == 0:
            self.unit = True
            return
        check_bits(_coeff_bits(terms), "Gröbner basis coefficient", partial=self.current())
        idx = len(self.basis)
        self.basis.append(terms)
        self.leads.append(terms[0][0])
        self._update(idx)
        self._refresh_reducers()

    def _update(self, h):
        o = self.o
        leads = self.leads
        hl = leads[h]
        lcm = o.lcm
        divides = o.divides

        def coprime(g):
            return lcm(hl, leads[g]) == hl + leads[g]

        cands = list(self.active)
        kept = []
        while cands:
            g1 = cands.pop(0)
            l1 = lcm(hl, leads[g1])
            if coprime(g1):
                kept.append(g1)
                continue
            if any(divides(lcm(hl, leads[g2]), l1) for g2 in cands) or any(
                divides(lcm(hl, leads[g2]), l1) for g2 in kept
            ):
                continue
            kept.append(g1)
        new_pairs = [g for g in kept if not coprime(g)]
        survivors = {}
        for (i, j), l in self.pairs.items():
            if divides(hl, l) and lcm(leads[i], hl) != l and lcm(leads[j], hl) != l:
                continue
            survivors[(i, j)] = l
        for g in new_pairs:
            l = lcm(hl, leads[g])
            survivors[(g, h)] = l
            heappush(self.heap, (l, g, h))
        self.pairs = survivors
        self.active = [g for g in self.active if not divides(hl, leads[g])] + [h]

    def spoly(self, i, j, l):
        f = self.basis[i]
        g = self.basis[j]
        qf = l - f[0][0]
        qg = l - g[0][0]
        s = {k + qf: c for k, c in f[1:]}
        addmul_terms(s, dict(g[1:]), mpq(-1), qg)
        return s

    def current(self):
        return [self.basis[i] for i in self.active]

    def run(self, inputs):
        for terms in inputs:
            rem = self.reduce(terms)
            if rem:
                self.add(_monic(rem))
                if self.unit:
                    return
        while self.heap:
            l, i, j = heappop(self.heap)
            if self.pairs.get((i, j)) != l:
                continue
            del self.pairs[(i, j)]
            self.processed += 1
            if self.max_pairs is not None and self.processed > self.max_pairs:
                raise ResourceExhausted(f"S-pair cap of {self.max_pairs} exceeded", partial=self.current())
            checkpoint(partial=self.current())
            rem = self.reduce(self.spoly(i, j, l))
            if rem:
                self.add(_monic(rem))
                if self.unit:
                    return
            else:
                self.zero_reductions += 1

    def reduced(self):
        if self.unit:
            return [[(0, mpq(1))]]
        polys = sorted(self.current(), key=lambda p: p[0][0])
        out = []
        for idx, p in enumerate(polys):
            others = polys[:idx] + polys[idx + 1 :]
            rem = nf_reduce(dict(p), [q[0][0] for q in others], [q[1:] for q in others], self.o.guard)
            out.append(_monic(rem))
        return out


def _to_basis(ring, order, ordering, polys, source, stats) -> GroebnerBasis:
    gens = tuple(ordering.to_polynomial(ring, p).canonical() for p in polys)
    return GroebnerBasis(ring, order, gens, tuple(source), stats, tuple(tuple(p) for p in polys))


def groebner_basis(gens, order: MonomialOrder = GREVLEX, *, ring=None, start: GroebnerBasis | None = None,
                   max_pairs: int | None = None) -> GroebnerBasis:
    """Reduced Gröbner basis of ``<gens>`` (plus ``start``'s ideal, if given).

    ``start`` must already be a Gröbner basis for an order that agrees with
    ``order`` on its variables; its elements are seeded without S-pairs.
    """
    gens = list(gens)
    ring = _ring_of(gens, ring if ring is not None else (start.ring if start is not None and not gens else None))
    ordering = _Ordering(order, len(ring))
    engine = _Buchberger(ordering, max_pairs)
    source = list(gens)
    if start is not None:
        seeds = []
        for g in start.generators:
            gg = g.embed(ring) if g.ring != ring else g
            items = sorted(ordering.to_internal(gg).items(), reverse=True)
            seeds.append(_monic(items))
        engine.seed(seeds)
        source = list(start.source_ideal) + source
        source = [s.embed(ring) if s.ring != ring else s for s in source]
    inputs = [ordering.to_internal(g) for g in gens if not g.is_zero()]
    # smaller leading monomials first keeps the intermediate bases small
    inputs.sort(key=lambda t: max(t))
    engine.run(inputs)
    stats = {"pairs": engine.processed, "zero_reductions": engine.zero_reductions}
    return _to_basis(ring, order, ordering, engine.reduced(), source, stats)


def normal_form(f: Polynomial, gb: GroebnerBasis) -> Polynomial:
    """Remainder of ``f`` on division by the reduced basis ``gb``."""
    if f.ring != gb.ring:
        raise RingMismatchError(f"ring mismatch: {f.ring} vs {gb.ring}")
    ordering = _Ordering(gb.order, len(gb.ring))
    rem = nf_reduce(ordering.to_internal(f), [p[0][0] for p in gb._monic], [p[1:] for p in gb._monic],
                    ordering.guard)
    return ordering.to_polynomial(gb.ring, rem)


def s_polynomial_certificate(gb: GroebnerBasis) -> bool:
    """Check Buchberger's criterion exhaustively: every S-polynomial reduces to 0."""
    ordering = _Ordering(gb.order, len(gb.ring))
    polys = gb._monic
    leads = [p[0][0] for p in polys]
    tails = [p[1:] for p in polys]
    for i in range(len(polys)):
        for j in range(i + 1, len(polys)):
            l = ordering.lcm(leads[i], leads[j])
            s = {k + l - leads[i]: c for k, c in tails[i]}
            addmul_terms(s, dict(tails[j]), mpq(-1), l - leads[j])
            if nf_reduce(s, leads, tails, ordering.guard):
                return False
    return True


def is_reduced(gb: GroebnerBasis) -> bool:
    """No term of any element is divisible by another element's leading monomial."""
    ordering = _Ordering(gb.order, len(gb.ring))
    polys = gb._monic
    for i, p in enumerate(polys):
        if p[0][1] != 1:
            return False
        for j, q in enumerate(polys):
            if i != j and any(ordering.divides(q[0][0], k) for k, _ in p):
                return False
    return True


def _aux_name(ring) -> str:
    name = AUX_PREFIX
    k = 1
    while name in ring:
        k += 1
        name = f"{AUX_PREFIX}{k}"
    return name


def _base_kind(order: MonomialOrder) -> MonomialOrder:
    return order if order.kind is not OrderKind.BLOCK else GREVLEX


def rabinowitsch_unit(f: Polynomial, gb: GroebnerBasis, max_pairs=None) -> bool:
    """True iff ``<gb, 1 - t*f>`` is the unit ideal, i.e. ``f`` is in the radical."""
    n = len(gb.ring)
    ring2 = gb.ring + (_aux_name(gb.ring),)
    base = _base_kind(gb.order)
    order2 = block_order(n, base)
    if base != gb.order:
        gb = groebner_basis(gb.generators, base, ring=gb.ring, max_pairs=max_pairs)
    t = Polynomial.variable(ring2, n)
    gen = 1 - t * f.embed(ring2)
    gb2 = groebner_basis([gen], order2, ring=ring2, start=gb, max_pairs=max_pairs)
    return gb2.is_unit()


def radical_membership(f: Polynomial, gens, order: MonomialOrder = GREVLEX, **kw) -> bool:
    """Decide ``f in sqrt(<gens>)``."""
    return radical_contains_all([f], gens, order, **kw)


def radical_contains_all(fs, gens, order: MonomialOrder = GREVLEX, *, ring=None, gb: GroebnerBasis | None = None,
                         probes=(), max_pairs=None, stats: dict | None = None) -> bool:
    """True iff every polynomial of ``fs`` lies in the radical of ``<gens>``.

    ``probes`` are optional rational points.  A probe at which all of
    ``gens`` vanish but some ``f`` does not is an exact certificate of
    non-membership and short-cuts the Gröbner computation; probes never
    cause a positive answer.  Plain ideal membership is tried before the
    auxiliary-variable construction.
    """
    fs = list(fs)
    gens = list(gens)
    if not fs:
        return True
    ring = _ring_of(gens + fs, ring)
    for pt in probes:
        if all(g.eval(pt) == 0 for g in gens) and any(f.eval(pt) != 0 for f in fs):
            if stats is not None:
                stats["probe_refutations"] = stats.get("probe_refutations", 0) + 1
            return False
    if gb is None:
        gb = groebner_basis(gens, order, ring=ring, max_pairs=max_pairs)
    if gb.is_unit():
        return True
    for f in fs:
        if normal_form(f, gb).is_zero():
            continue
        if stats is not None:
            stats["rabinowitsch"] = stats.get("rabinowitsch", 0) + 1
        if not rabinowitsch_unit(f, gb, max_pairs=max_pairs):
            return False
    return True
