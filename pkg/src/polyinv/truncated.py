"""Truncated invariant ideals of loops with a fixed initial value.

Every invariant of degree <= d vanishes at the orbit points ``a^0, ..., a^M``,
so the kernel of the evaluation matrix (rows = orbit points, columns =
monomials) spans a superset of the truncated ideal.  Its elements are the
*candidates*.  Candidates that pass the invariant check are kept; the others
are repaired by running the invariant-set chain on their generic linear
combination ``sum z_j c_j``.

The orbit of a nonlinear map grows doubly exponentially, so the kernel is
computed modulo word-sized primes and lifted back by CRT and rational
reconstruction when the exact system is too large.  Lifted candidates are
accepted only once they are certified over Q, either by the invariant check
or by exact evaluation at the orbit points.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from gmpy2 import mpq

from .cas.monomial import GREVLEX, MonomialOrder, monomial_basis, pack
from .cas.polynomial import Polynomial
from .errors import FallbackFailed, ResourceExhausted
from .invariant_set import DEFAULT_MAX_ITERATIONS, invariant_set
from .limits import checkpoint
from .kernels import monomial_row_mod
from .linalg import CRTLift, LinearSystem, ModularEchelon, kernel_basis, primes, rref, to_mod
from .loop import LoopSpec, check_pi_detail, orbit_points

CONFIRM_ROWS = 3
EXACT_BIT_BUDGET = 200_000
MAX_PRIMES = 400
Z_PREFIX = "__z"


class Provenance(enum.Enum):
    ALL_VERIFIED = "AllCandidatesVerified"
    REPAIRED = "RepairedViaFallback"


@dataclass(frozen=True)
class InvariantBasis:
    degree: int
    polynomials: tuple
    provenance: Provenance
    stats: dict = field(default_factory=dict, compare=False)

    @property
    def dimension(self) -> int:
        return len(self.polynomials)


def default_rows(n: int, d: int) -> int:
    return len(monomial_basis(n, d))


# -- evaluation rows --------------------------------------------------------


def evaluation_row(point, monos) -> list:
    """``[point^alpha for alpha in monos]`` computed exactly."""
    n = len(point)
    dmax = max(sum(a) for a in monos)
    powers = []
    for v in point:
        pw = [mpq(1)]
        for _ in range(dmax):
            pw.append(pw[-1] * v)
        powers.append(pw)
    row = []
    for alpha in monos:
        acc = mpq(1)
        for i in range(n):
            if alpha[i]:
                acc *= powers[i][alpha[i]]
        row.append(acc)
    return row


def _orbit_mod(loop: LoopSpec, p: int, count: int):
    """The first ``count`` orbit points reduced mod p, or None if p is unusable.

    The map is iterated on residues, so the cost does not depend on the size
    of the exact orbit.
    """
    n = loop.n
    comps = []
    for f in loop.body:
        terms = []
        for c, exps in f.terms():
            r = to_mod(c, p)
            if r is None:
                return None
            terms.append((r, [(i, e) for i, e in enumerate(exps) if e]))
        comps.append(terms)
    pt = []
    for v in loop.require_init():
        r = to_mod(v, p)
        if r is None:
            return None
        pt.append(r)
    out = [tuple(pt)]
    while len(out) < count:
        checkpoint()
        nxt = []
        for terms in comps:
            acc = 0
            for c, factors in terms:
                for i, e in factors:
                    c = c * pow(pt[i], e, p) % p
                acc += c
            nxt.append(acc % p)
        pt = nxt
        out.append(tuple(pt))
    assert len(out[0]) == n
    return out


def linear_system(loop: LoopSpec, d: int, M: int | None = None) -> LinearSystem:
    """Exact evaluation system of the orbit points ``a^0 .. a^M``."""
    monos = monomial_basis(loop.n, d)
    M = default_rows(loop.n, d) if M is None else M
    pts = orbit_points(loop.body, loop.require_init(), M)
    return LinearSystem([evaluation_row(pt, monos) for pt in pts], monos)


def vector_to_polynomial(v, monos, ring) -> Polynomial:
    return Polynomial._raw(ring, {pack(alpha): mpq(c) for alpha, c in zip(monos, v) if c})


def polynomial_to_vector(f: Polynomial, monos) -> list:
    return [f.coefficient(alpha) for alpha in monos]


def canonical_basis(vectors, monos, ring) -> tuple:
    """RREF of the coefficient vectors with denominators cleared."""
    return tuple(vector_to_polynomial(v, monos, ring).canonical() for v in rref(vectors))


# -- candidate phase --------------------------------------------------------


@dataclass
class _Candidates:
    vectors: list
    rows: int
    method: str
    certified: bool
    primes: int = 0


def _coord_bits(pt) -> int:
    return max(int(v.numerator).bit_length() + int(v.denominator).bit_length() for v in pt)


def _select_rows(loop, monos, M, early_stop):
    """Rows to use: all ``M+1``, or fewer once the rank mod p stops growing."""
    m = len(monos)
    for p in primes():
        pts = _orbit_mod(loop, p, M + 1)
        if pts is None:
            continue
        ech = ModularEchelon(m, p)
        run = 0
        used = 0
        for pt in pts:
            checkpoint()
            used += 1
            if ech.add(monomial_row_mod(pt, monos, p)):
                run = 0
                if ech.rank == m:
                    break
            else:
                run += 1
                if early_stop and run >= CONFIRM_ROWS:
                    break
        return used, ech


def _exact_points(loop, rows: int, d: int):
    """The exact orbit points for ``rows`` rows, or None once they get too large."""
    a = loop.require_init()
    pts = []
    for j in range(rows):
        pt = orbit_points(loop.body, a, j)[j]
        if d * _coord_bits(pt) * rows > EXACT_BIT_BUDGET:
            return None
        pts.append(pt)
    return pts


def _vanishes(vectors, points, monos) -> bool:
    for pt in points:
        checkpoint()
        row = evaluation_row(pt, monos)
        for v in vectors:
            if sum(c * r for c, r in zip(v, row) if c):
                return False
    return True


def _modular_kernel(loop, monos, rows, first: ModularEchelon):
    lift = None
    pivots = None
    prev = None
    count = 0
    stream = primes()
    ech = first
    while count < MAX_PRIMES:
        if ech is None:
            p = next(stream)
            pts = _orbit_mod(loop, p, rows)
            if pts is None:
                continue
            ech = ModularEchelon(len(monos), p)
            for pt in pts:
                checkpoint()
                ech.add(monomial_row_mod(pt, monos, p))
        else:
            # the first echelon form used the first usable prime of the stream
            while next(stream) != ech.p:
                pass
        count += 1
        if pivots is None or len(ech.pivots) > len(pivots):
            pivots = list(ech.pivots)
            lift = CRTLift()
            prev = None
        if ech.pivots == pivots:
            flat = [x for v in ech.kernel() for x in v]
            if not flat:
                return [], count
            lift.add(flat, ech.p)
            rec = lift.reconstruct()
            if rec is not None and rec == prev:
                m = len(monos)
                return [rec[i : i + m] for i in range(0, len(rec), m)], count
            prev = rec
        ech = None
    return None, count


def _candidates(loop: LoopSpec, d: int, M: int | None, early_stop: bool) -> _Candidates:
    monos = monomial_basis(loop.n, d)
    m = len(monos)
    M = default_rows(loop.n, d) if M is None else M
    if M < 0:
        raise ValueError("M must be nonnegative")
    rows, ech = _select_rows(loop, monos, M, early_stop)
    if ech.rank == m:
        # rank mod p never exceeds the rank over Q
        return _Candidates([], rows, "modular", True, 1)
    pts = _exact_points(loop, rows, d)
    if pts is not None:
        vecs = kernel_basis([evaluation_row(pt, monos) for pt in pts], m)
        return _Candidates(vecs, rows, "exact", True)
    vecs, used = _modular_kernel(loop, monos, rows, ech)
    if vecs is None:
        pts = orbit_points(loop.body, loop.require_init(), rows - 1)
        vecs = kernel_basis([evaluation_row(pt, monos) for pt in pts], m)
        return _Candidates(vecs, rows, "exact", True, used)
    return _Candidates(vecs, rows, "modular", False, used)


def _certify(cands: _Candidates, loop, monos) -> _Candidates:
    """Make sure modular candidates are the exact kernel of the rows used."""
    if cands.certified:
        return cands
    pts = orbit_points(loop.body, loop.require_init(), cands.rows - 1)
    if _vanishes(cands.vectors, pts, monos):
        cands.certified = True
        return cands
    vecs = kernel_basis([evaluation_row(pt, monos) for pt in pts], len(monos))
    return _Candidates(vecs, cands.rows, "exact", True, cands.primes)


def candidate_basis(loop: LoopSpec, d: int, M: int | None = None, *, early_stop: bool = True) -> list:
    """Basis of the kernel of the orbit evaluation system, as polynomials.

    Rows are the orbit points ``a^0 .. a^M`` (``M`` defaults to the number
    of monomials of degree <= d); with ``early_stop`` the rows end once
    three consecutive rows add nothing to the rank.
    """
    if d < 1:
        raise ValueError("degree must be at least 1")
    monos = monomial_basis(loop.n, d)
    cands = _certify(_candidates(loop, d, M, early_stop), loop, monos)
    return list(canonical_basis(cands.vectors, monos, loop.ring))


# -- verification and repair ------------------------------------------------


def _batch_holds(loop, polys, max_iterations, order) -> tuple:
    guard = [loop.apply_diseq(f) for f in polys]
    res = invariant_set(guard, loop.body, max_iterations=max_iterations, order=order).require()
    return res.vanishes_at(loop.init), res.iterations


def _z_ring(loop, count):
    return loop.ring + tuple(f"{Z_PREFIX}{j + 1}" for j in range(count))


def repair(loop: LoopSpec, failing, monos, *, max_iterations=DEFAULT_MAX_ITERATIONS,
           order: MonomialOrder = GREVLEX) -> tuple:
    """Invariants in the span of ``failing``.

    Runs the chain on ``sum z_j c_j`` (times ``p`` for a disequality ``p``)
    under the map that fixes the ``z``'s, evaluates the output at ``x = a``
    and returns the ``z``-kernel of the resulting linear forms, mapped back
    to polynomials, together with the chain length.
    """
    n = loop.n
    zring = _z_ring(loop, len(failing))
    F = loop.body.extended(zring)
    h = Polynomial.zero(zring)
    for j, c in enumerate(failing):
        h = h + c.embed(zring) * Polynomial.variable(zring, n + j)
    if loop.guard_diseq is not None:
        h = h * loop.guard_diseq.embed(zring)
    res = invariant_set([h], F, max_iterations=max_iterations, order=order).require()
    a = list(loop.init)
    zero_z = [0] * len(failing)
    rows = []
    for s in res.generators:
        row = []
        for j in range(len(failing)):
            unit = list(zero_z)
            unit[j] = 1
            row.append(s.eval(a + unit) - s.eval(a + zero_z))
        if s.eval(a + zero_z) != 0:
            raise FallbackFailed("chain output is not linear in the combination variables",
                                 failing=list(failing))
        rows.append(row)
    betas = kernel_basis(rows, len(failing)) if rows else [[mpq(int(i == j)) for i in range(len(failing))]
                                                            for j in range(len(failing))]
    out = []
    for beta in betas:
        f = Polynomial.zero(loop.ring)
        for b, c in zip(beta, failing):
            if b:
                f = f + c.scale(b)
        out.append(polynomial_to_vector(f, monos))
    return out, res.iterations


def truncated_invariant_ideal(loop: LoopSpec, d: int, M: int | None = None, *, early_stop: bool = True,
                              max_iterations: int = DEFAULT_MAX_ITERATIONS, order: MonomialOrder = GREVLEX,
                              batch: bool = True) -> InvariantBasis:
    """Basis of the invariants of degree <= d of the loop from its initial value.

    Equation guards are ignored; a disequality ``p != 0`` is honoured by
    testing ``p*g`` instead of ``g``.
    """
    if d < 1:
        raise ValueError("degree must be at least 1")
    loop.require_equational()
    loop.require_init()
    monos = monomial_basis(loop.n, d)
    stats = {"monomials": len(monos)}
    cands = _candidates(loop, d, M, early_stop)
    stats.update(rows=cands.rows, method=cands.method, primes=cands.primes)
    if not cands.vectors:
        return InvariantBasis(d, (), Provenance.ALL_VERIFIED, stats)

    polys = [vector_to_polynomial(v, monos, loop.ring) for v in cands.vectors]
    try:
        if batch:
            ok, its = _batch_holds(loop, polys, max_iterations, order)
            stats["batch_iterations"] = its
            if ok:
                # invariants lie in the exact kernel, so the count certifies a modular basis as well
                basis = canonical_basis(cands.vectors, monos, loop.ring)
                return InvariantBasis(d, basis, Provenance.ALL_VERIFIED, stats)

        full = default_rows(loop.n, d) if M is None else M
        if early_stop and cands.rows < full + 1:
            # the rows stopped early; use the whole system before repairing anything
            stats["early_stop_retracted"] = True
            cands = _candidates(loop, d, M, False)
        return _finish(loop, d, cands, monos, stats, max_iterations, order)
    except FallbackFailed:
        raise
    except ResourceExhausted as exc:
        # the candidates span a superspace of the truncated ideal; hand them back
        exc.partial = list(canonical_basis(cands.vectors, monos, loop.ring))
        raise


def _finish(loop, d, cands, monos, stats, max_iterations, order) -> InvariantBasis:
    stats.update(rows=cands.rows, method=cands.method, primes=cands.primes)
    if not cands.vectors:
        return InvariantBasis(d, (), Provenance.ALL_VERIFIED, stats)
    polys = [vector_to_polynomial(v, monos, loop.ring) for v in cands.vectors]
    passing, failing = [], []
    for v, f in zip(cands.vectors, polys):
        (passing if check_pi_detail(loop, f, max_iterations=max_iterations, order=order) else failing).append(v)
    stats["failing"] = len(failing)
    if not failing:
        return InvariantBasis(d, canonical_basis(passing, monos, loop.ring), Provenance.ALL_VERIFIED, stats)
    cands = _certify(cands, loop, monos)
    if cands.method == "exact" and stats.get("method") == "modular":
        return _finish(loop, d, cands, monos, stats, max_iterations, order)
    failing_polys = [vector_to_polynomial(v, monos, loop.ring) for v in failing]
    try:
        repaired, its = repair(loop, failing_polys, monos, max_iterations=max_iterations, order=order)
    except FallbackFailed:
        raise
    except ResourceExhausted as exc:
        raise FallbackFailed(f"repair phase: {exc.reason}", candidates=polys, failing=failing_polys,
                             timed_out=exc.timed_out) from exc
    stats["fallback_iterations"] = its
    basis = canonical_basis(repaired + passing, monos, loop.ring)
    return InvariantBasis(d, basis, Provenance.REPAIRED, stats)
