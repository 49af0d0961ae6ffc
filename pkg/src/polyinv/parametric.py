"""Truncated invariant ideals for all initial values at once.

The generic template ``g(x, y) = sum_i y_i x^alpha_i`` treats the template
coefficients as extra loop variables that the body leaves unchanged.  The
invariant-set chain of ``g`` under ``F_m = (F, identity on y)`` consists of
the polynomials ``h_j = g(F^j(x), y)``, all linear in ``y``; their
coefficient matrix ``A(x)`` has, at every initial value ``a``, the
truncated invariant ideal of the loop from ``a`` as its kernel.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from gmpy2 import mpq

from .cas.monomial import GREVLEX, MonomialOrder, monomial_basis, pack
from .cas.polynomial import PolyMap, Polynomial, to_rational
from .cas.text import format_polynomial, monomial_text
from .errors import ArityError
from .invariant_set import DEFAULT_MAX_ITERATIONS, invariant_set
from .linalg import integer_row, kernel_basis, rref
from .truncated import canonical_basis

Y_PREFIX = "__y"


@dataclass(frozen=True)
class GenericTemplate:
    template: Polynomial
    degree: int
    monomials: tuple
    x_ring: tuple

    @property
    def m(self) -> int:
        return len(self.monomials)

    @property
    def ring(self) -> tuple:
        return self.template.ring


def generic_template(n_or_ring, d: int) -> GenericTemplate:
    """``y1 + y2*x1 + ... `` over all monomials of degree <= d in display order."""
    if isinstance(n_or_ring, int):
        x_ring = tuple(f"x{i + 1}" for i in range(n_or_ring))
    else:
        x_ring = tuple(n_or_ring)
    n = len(x_ring)
    if n < 1 or d < 1:
        raise ValueError("generic_template needs n >= 1 and d >= 1")
    monos = monomial_basis(n, d)
    ring = x_ring + tuple(f"{Y_PREFIX}{i + 1}" for i in range(len(monos)))
    terms = {}
    for i, alpha in enumerate(monos):
        terms[pack(tuple(alpha) + tuple(int(j == i) for j in range(len(monos))))] = mpq(1)
    return GenericTemplate(Polynomial._raw(ring, terms), d, monos, x_ring)


def split_linear(s: Polynomial, n: int, m: int) -> list:
    """Coefficients ``[A_1(x), ..., A_m(x)]`` of ``s = sum_i y_i A_i(x)``.

    Raises ValueError when ``s`` is not homogeneous linear in the ``y``'s.
    """
    x_ring = s.ring[:n]
    parts = [dict() for _ in range(m)]
    for exps, c in s.as_dict().items():
        ys = [i for i in range(m) if exps[n + i]]
        if len(ys) != 1 or exps[n + ys[0]] != 1:
            raise ValueError("chain polynomial is not linear in the template coefficients")
        parts[ys[0]][pack(exps[:n])] = c
    return [Polynomial._raw(x_ring, t) for t in parts]


@dataclass(frozen=True)
class PolyMatrix:
    """Rows of polynomial entries in the loop variables, one per chain polynomial."""

    rows: tuple
    monomials: tuple
    x_ring: tuple
    degree: int
    iterations: int = 0
    diseq: Polynomial | None = None
    stats: dict = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return len(self.x_ring)

    @property
    def m(self) -> int:
        return len(self.monomials)

    def at(self, a) -> list:
        a = [to_rational(v) for v in a]
        if len(a) != self.n:
            raise ArityError(f"point of dimension {len(a)} for a matrix over {self.n} variables")
        return [[e.eval(a) for e in row] for row in self.rows]

    def trimmed(self) -> "PolyMatrix":
        """Q-linear basis of the row space (same kernel at every point)."""
        keys = sorted({k for row in self.rows for e in row for k in e._t})
        index = {k: i for i, k in enumerate(keys)}
        width = len(keys)
        flat = []
        for row in self.rows:
            v = [mpq(0)] * (width * self.m)
            for j, e in enumerate(row):
                for k, c in e._t.items():
                    v[j * width + index[k]] = c
            flat.append(v)
        out = []
        for v in rref(flat):
            v = integer_row(v)
            row = []
            for j in range(self.m):
                t = {keys[i]: mpq(v[j * width + i]) for i in range(width) if v[j * width + i]}
                row.append(Polynomial._raw(self.x_ring, t))
            out.append(tuple(row))
        return PolyMatrix(tuple(out), self.monomials, self.x_ring, self.degree, self.iterations, self.diseq,
                          dict(self.stats, trimmed=True))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "d": self.degree,
            "m": self.m,
            "variables": list(self.x_ring),
            "monomials": [monomial_text(pack(a), self.x_ring) for a in self.monomials],
            "rows": [[format_polynomial(e) for e in row] for row in self.rows],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _probe_points(n, m, x_part, seed=0, count=2):
    """Points ``(a, b)`` with ``b`` in the kernel of the current rows at a random ``a``."""
    rng = random.Random(seed)

    def probes(S):
        pts = []
        for _ in range(count):
            a = [mpq(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(n)]
            rows = [[e.eval(a) for e in x_part(s)] for s in S]
            ker = kernel_basis(rows, m)
            if not ker:
                continue
            b = [mpq(0)] * m
            for v in ker:
                c = rng.randint(1, 7)
                b = [bi + c * vi for bi, vi in zip(b, v)]
            pts.append(a + b)
        return pts

    return probes


def invariant_matrix(F: PolyMap, d: int, diseq: Polynomial | None = None, *,
                     max_iterations: int = DEFAULT_MAX_ITERATIONS, order: MonomialOrder = GREVLEX,
                     probes: bool = True) -> PolyMatrix:
    """The polynomial matrix whose kernel at ``a`` is the degree-``d`` truncated ideal from ``a``.

    With a disequality ``p`` the chain starts from ``p*g`` instead of ``g``.
    """
    tpl = generic_template(F.ring, d)
    n, m = len(F.ring), tpl.m
    Fm = F.extended(tpl.ring)
    g = tpl.template
    if diseq is not None:
        g = g * diseq.embed(tpl.ring)
    cache = {}

    def x_part(s):
        key = id(s)
        if key not in cache:
            cache[key] = (s, split_linear(s, n, m))
        return cache[key][1]

    res = invariant_set([g], Fm, max_iterations=max_iterations, order=order,
                        probes=_probe_points(n, m, x_part) if probes else None).require()
    rows = tuple(tuple(split_linear(s, n, m)) for s in res.generators)
    return PolyMatrix(rows, tpl.monomials, tuple(F.ring), d, res.iterations, diseq,
                      {"chain": len(res.generators), **res.stats})


def kernel_at(A: PolyMatrix, a) -> list:
    """Basis (canonical, RREF) of the degree-``d`` invariants of the loop started at ``a``."""
    rows = A.at(a)
    vecs = kernel_basis(rows, A.m) if rows else [[mpq(int(i == j)) for i in range(A.m)] for j in range(A.m)]
    return list(canonical_basis(vecs, A.monomials, A.x_ring))
