"""Polynomial loops: the loop file format, exact orbits, non-termination and CheckPI.

A loop file looks like::

    # Fib1
    vars: x1, x2, x3
    init: 2, 1, 1
    guard: true
    body: x1 <- x2; x2 <- x3; x3 <- 2*x2*x3 - x1

The guard is ``true`` or a ``;``-separated list of ``poly = 0`` equations,
optionally followed by ``poly != 0`` disequalities (several are folded into
their product).  Strict inequalities such as ``x1 > 0`` are parsed so that
commands can reject them with a clear message.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from functools import lru_cache

from .cas.monomial import GREVLEX, MonomialOrder
from .cas.polynomial import PolyMap, Polynomial, to_rational
from .cas.text import format_polynomial, parse_polynomial
from .errors import ArityError, ParseError, RingMismatchError, UnsupportedGuardError
from .invariant_set import DEFAULT_MAX_ITERATIONS, InvariantSetResult, invariant_set
from .limits import check_bits, checkpoint

_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*$")
_RATIONAL = re.compile(r"\s*[-+]?\d+(\s*/\s*\d+)?\s*$")
_KEYS = ("vars", "init", "guard", "body")


@dataclass(frozen=True)
class StrictGuard:
    """A semialgebraic guard atom ``lhs > 0`` (or ``>=``, ``<``, ``<=``)."""

    poly: Polynomial
    relation: str

    def __str__(self):
        return f"{format_polynomial(self.poly)} {self.relation} 0"


@dataclass(frozen=True)
class LoopSpec:
    vars: tuple
    init: tuple | None
    guard_eqs: tuple
    guard_diseq: Polynomial | None
    body: PolyMap
    guard_strict: tuple = ()
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if tuple(self.body.ring) != tuple(self.vars):
            raise RingMismatchError("loop body ring differs from the declared variables")
        if self.init is not None and len(self.init) != len(self.vars):
            raise ArityError(f"init has {len(self.init)} values for {len(self.vars)} variables")
        for g in self.guard_eqs + ((self.guard_diseq,) if self.guard_diseq is not None else ()):
            if g.ring != self.ring:
                raise RingMismatchError("guard polynomial over a different ring")

    @property
    def ring(self) -> tuple:
        return self.vars

    @property
    def n(self) -> int:
        return len(self.vars)

    @property
    def has_init(self) -> bool:
        return self.init is not None

    def require_init(self) -> tuple:
        if self.init is None:
            raise ValueError("this operation needs a loop with an init line")
        return self.init

    def require_equational(self) -> None:
        if self.guard_strict:
            raise UnsupportedGuardError(
                f"inequality guard {self.guard_strict[0]} is not supported; "
                "only polynomial equations and one disequality are allowed"
            )

    def with_init(self, init) -> "LoopSpec":
        return replace(self, init=tuple(to_rational(v) for v in init))

    def without_init(self) -> "LoopSpec":
        return replace(self, init=None)

    def apply_diseq(self, g: Polynomial) -> Polynomial:
        """``p*g`` when the guard carries a disequality ``p != 0``, else ``g``."""
        return g if self.guard_diseq is None else self.guard_diseq * g

    def polynomial(self, text: str) -> Polynomial:
        return parse_polynomial(text, self.ring)


# -- parsing ----------------------------------------------------------------


def _strip_comment(line: str) -> str:
    i = line.find("#")
    return line if i < 0 else line[:i]


def _split(text: str, sep: str, col: int):
    """Split on ``sep`` and yield ``(piece, column of piece)`` (1-based columns)."""
    start = 0
    for part in text.split(sep):
        yield part, col + start
        start += len(part) + len(sep)


def _lead(piece: str, col: int):
    stripped = piece.lstrip()
    return stripped.rstrip(), col + len(piece) - len(stripped)


def _parse_poly(text, ring, line, col):
    body, c = _lead(text, col)
    if not body:
        raise ParseError("expected a polynomial", line, c)
    return parse_polynomial(body, ring, line=line, column=c)


def _parse_rational(text, line, col):
    body, c = _lead(text, col)
    if not _RATIONAL.match(body):
        raise ParseError(f"non-rational constant {body!r}", line, c)
    return to_rational(body.replace(" ", ""))


def parse_loop(text: str, name: str | None = None) -> LoopSpec:
    """Parse a loop file; errors carry 1-based line and column numbers."""
    sections = {}
    order = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        m = re.match(r"\s*([A-Za-z]+)\s*:", line)
        if m and m.group(1) in _KEYS:
            key = m.group(1)
            if key in sections:
                raise ParseError(f"duplicate '{key}:' line", lineno, m.start(1) + 1)
            sections[key] = [(lineno, m.end() + 1, line[m.end():])]
            order.append((key, lineno, m.start(1) + 1))
            current = key
        elif current == "body":
            sections["body"].append((lineno, 1, line))
        else:
            stripped, c = _lead(line, 1)
            raise ParseError(f"expected one of {', '.join(k + ':' for k in _KEYS)}", lineno, c)

    for key in ("vars", "guard", "body"):
        if key not in sections:
            raise ParseError(f"missing '{key}:' line", len(text.splitlines()) or 1, 1)
    expected = [k for k in _KEYS if k in sections]
    for (key, lineno, col), want in zip(order, expected):
        if key != want:
            raise ParseError(f"'{key}:' is out of order; expected '{want}:'", lineno, col)

    lineno, col, rest = sections["vars"][0]
    names = []
    for piece, c in _split(rest, ",", col):
        ident, c = _lead(piece, c)
        if not _IDENT.match(ident):
            raise ParseError(f"invalid variable name {ident!r}", lineno, c)
        if ident.startswith("__"):
            raise ParseError(f"names starting with '__' are reserved: {ident!r}", lineno, c)
        if ident in names:
            raise ParseError(f"duplicate variable {ident!r}", lineno, c)
        names.append(ident)
    ring = tuple(names)

    init = None
    if "init" in sections:
        lineno, col, rest = sections["init"][0]
        init = tuple(_parse_rational(piece, lineno, c) for piece, c in _split(rest, ",", col))
        if len(init) != len(ring):
            raise ArityError(f"line {lineno}: init has {len(init)} values for {len(ring)} variables")

    lineno, col, rest = sections["guard"][0]
    eqs, diseq, strict = _parse_guard(rest, ring, lineno, col)

    assigned = {}
    for lineno, col, rest in sections["body"]:
        for piece, c in _split(rest, ";", col):
            stmt, c = _lead(piece, c)
            if not stmt:
                continue
            lhs, arrow, rhs = stmt.partition("<-")
            if not arrow:
                raise ParseError("expected an assignment 'var <- polynomial'", lineno, c)
            target = lhs.strip()
            if target not in ring:
                raise ParseError(f"assignment to undeclared variable {target!r}", lineno, c)
            if target in assigned:
                raise ParseError(f"variable {target!r} assigned twice", lineno, c)
            assigned[target] = _parse_poly(rhs, ring, lineno, c + len(lhs) + 2)
    missing = [v for v in ring if v not in assigned]
    if missing:
        raise ArityError(f"body has no assignment for {', '.join(missing)}")
    body = PolyMap(assigned[v] for v in ring)
    return LoopSpec(ring, init, tuple(eqs), diseq, body, tuple(strict), name)


def _parse_guard(rest, ring, lineno, col):
    eqs, diseqs, strict = [], [], []
    body, c0 = _lead(rest, col)
    if body == "true":
        return eqs, None, strict
    if not body:
        raise ParseError("expected 'true' or a list of guard atoms", lineno, c0)
    for piece, c in _split(rest, ";", col):
        atom, c = _lead(piece, c)
        if not atom:
            raise ParseError("empty guard atom", lineno, c)
        m = re.search(r"!=|>=|<=|=|>|<", atom)
        if not m:
            raise ParseError("guard atom needs '= 0', '!= 0' or an inequality", lineno, c)
        rel = m.group(0)
        lhs = _parse_poly(atom[: m.start()], ring, lineno, c)
        rhs = _parse_poly(atom[m.end():], ring, lineno, c + m.end())
        poly = lhs - rhs
        if rel == "=":
            if diseqs:
                raise ParseError("equations must precede disequalities", lineno, c)
            eqs.append(poly)
        elif rel == "!=":
            diseqs.append(poly)
        else:
            strict.append(StrictGuard(poly, rel))
    diseq = None
    for p in diseqs:
        diseq = p if diseq is None else diseq * p
    return eqs, diseq, strict


def load_loop(path) -> LoopSpec:
    from pathlib import Path

    path = Path(path)
    return parse_loop(path.read_text(encoding="utf-8"), name=path.stem)


def _format_rational(q) -> str:
    q = to_rational(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_loop(loop: LoopSpec) -> str:
    """Loop file text that :func:`parse_loop` maps back to an equal LoopSpec."""
    lines = []
    if loop.name:
        lines.append(f"# {loop.name}")
    lines.append("vars: " + ", ".join(loop.vars))
    if loop.init is not None:
        lines.append("init: " + ", ".join(_format_rational(v) for v in loop.init))
    atoms = [f"{format_polynomial(g)} = 0" for g in loop.guard_eqs]
    if loop.guard_diseq is not None:
        atoms.append(f"{format_polynomial(loop.guard_diseq)} != 0")
    atoms += [str(s) for s in loop.guard_strict]
    lines.append("guard: " + ("; ".join(atoms) if atoms else "true"))
    lines.append("body: " + "; ".join(f"{v} <- {format_polynomial(f)}" for v, f in zip(loop.vars, loop.body)))
    return "\n".join(lines) + "\n"


# -- orbits -----------------------------------------------------------------


@dataclass(frozen=True)
class Orbit:
    points: tuple

    def __len__(self):
        return len(self.points)

    def __getitem__(self, k):
        return self.points[k]

    def __iter__(self):
        return iter(self.points)


class _LazyOrbit:
    def __init__(self, F: PolyMap, a):
        self.F = F
        self.points = [tuple(a)]

    def upto(self, k: int) -> list:
        pts = self.points
        while len(pts) <= k:
            checkpoint()
            nxt = self.F(pts[-1])
            check_bits(max(int(v.numerator).bit_length() + int(v.denominator).bit_length() for v in nxt),
                       "orbit coordinate")
            pts.append(nxt)
        return pts[: k + 1]


@lru_cache(maxsize=8)
def _orbit_of(F: PolyMap, a: tuple) -> _LazyOrbit:
    return _LazyOrbit(F, a)


def orbit_points(F: PolyMap, a, k: int) -> list:
    """``[a, F(a), ..., F^k(a)]`` computed exactly (and cached per map and start)."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    a = tuple(to_rational(v) for v in a)
    if len(a) != len(F):
        raise ArityError(f"point of dimension {len(a)} for a map on {len(F)} variables")
    return _orbit_of(F, a).upto(k)


def orbit(loop: LoopSpec, k: int) -> Orbit:
    return Orbit(tuple(orbit_points(loop.body, loop.require_init(), k)))


def iter_orbit(loop: LoopSpec, k: int):
    yield from orbit_points(loop.body, loop.require_init(), k)


# -- non-termination --------------------------------------------------------


@dataclass(frozen=True)
class ConditionSet:
    """Initial values ``a`` for which the loop never terminates.

    ``a`` must be a common zero of ``generators``; with a disequality
    ``p != 0`` in the guard, additionally ``p`` must stay nonzero along the
    orbit of ``a`` (``disequality`` records ``p``).
    """

    generators: tuple
    iterations: int
    disequality: Polynomial | None = None

    def contains(self, a, F: PolyMap | None = None, bound: int = 50) -> bool:
        if not all(g.eval(a) == 0 for g in self.generators):
            return False
        if self.disequality is None:
            return True
        if F is None:
            raise ValueError("checking a disequality needs the loop body")
        return all(self.disequality.eval(pt) != 0 for pt in orbit_points(F, a, bound))


def nonterminates(loop: LoopSpec, *, max_iterations: int = DEFAULT_MAX_ITERATIONS,
                  order: MonomialOrder = GREVLEX, diseq_bound: int = 50):
    """Decide whether the loop runs forever from its initial value.

    With an init line the answer is a boolean; without one it is a
    :class:`ConditionSet` describing all non-terminating initial values.
    A disequality is checked along the orbit up to ``diseq_bound`` steps,
    so with a disequality ``True`` means "no exit within that bound".
    """
    loop.require_equational()
    if loop.guard_eqs:
        res = invariant_set(list(loop.guard_eqs), loop.body, max_iterations=max_iterations, order=order).require()
        gens, its = res.generators, res.iterations
    else:
        gens, its = (), 0
    cond = ConditionSet(tuple(gens), its, loop.guard_diseq)
    if loop.init is None:
        return cond
    return cond.contains(loop.init, loop.body, diseq_bound)


# -- CheckPI ----------------------------------------------------------------

PREFILTER_POINTS = 4


@dataclass(frozen=True)
class CheckResult:
    holds: bool
    method: str
    chain: InvariantSetResult | None = None

    def __bool__(self):
        return self.holds


def check_pi_detail(loop: LoopSpec, g: Polynomial, *, max_iterations: int = DEFAULT_MAX_ITERATIONS,
                    order: MonomialOrder = GREVLEX, prefilter: int = PREFILTER_POINTS) -> CheckResult:
    """Decide whether ``g`` is a polynomial invariant of the loop from its init.

    Equation guards are ignored (the loop is treated as ``L(a, 0, F)``); a
    disequality ``p`` turns the test polynomial into ``p*g``.  A nonzero
    value at one of the first orbit points is an exact early "no".
    """
    a = loop.require_init()
    if g.ring != loop.ring:
        raise RingMismatchError(f"polynomial ring {g.ring} differs from loop ring {loop.ring}")
    test = loop.apply_diseq(g)
    if test.is_zero():
        return CheckResult(True, "zero")
    for pt in orbit_points(loop.body, a, prefilter):
        if test.eval(pt) != 0:
            return CheckResult(False, "orbit")
    res = invariant_set([test], loop.body, max_iterations=max_iterations, order=order).require()
    return CheckResult(res.vanishes_at(a), "invariant-set", res)


def check_pi(loop: LoopSpec, g: Polynomial, **kw) -> bool:
    return check_pi_detail(loop, g, **kw).holds


# -- property-check helpers -------------------------------------------------

ORBIT_CHECK_BOUND = 50
ORBIT_CHECK_BITS = 1 << 14


def _point_bits(pt) -> int:
    return max((int(v.numerator).bit_length() + int(v.denominator).bit_length() for v in pt), default=0)


def checkable_orbit(F: PolyMap, a, bound: int = ORBIT_CHECK_BOUND, max_bits: int = ORBIT_CHECK_BITS) -> list:
    """``a, F(a), ...`` up to ``F^bound(a)``, cut short once a coordinate exceeds ``max_bits``.

    Quadratic bodies double the coordinate size at every step, so a fixed
    bound of 50 is out of reach for them; the shortened prefix is still an
    exact necessary condition for invariance.
    """
    pts = [tuple(to_rational(v) for v in a)]
    while len(pts) <= bound:
        nxt = F(pts[-1])
        if _point_bits(nxt) > max_bits:
            break
        pts.append(nxt)
    return pts


def vanishes_on_orbit(loop: LoopSpec, polys, bound: int = ORBIT_CHECK_BOUND,
                      max_bits: int = ORBIT_CHECK_BITS) -> bool:
    """True iff every polynomial (times the disequality, if any) is zero along the orbit prefix."""
    pts = checkable_orbit(loop.body, loop.require_init(), bound, max_bits)
    polys = [loop.apply_diseq(p) for p in polys]
    return all(p.eval(pt) == 0 for pt in pts for p in polys)
