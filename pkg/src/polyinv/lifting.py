"""Lifting an invariant found for one initial value to all initial values.

``f(x) - f(a)`` is an invariant for every initial value ``a`` exactly when
the hypersurface ``V(f - t)`` (with ``t`` a new variable fixed by the body)
is its own invariant set under ``(F, t)``, i.e. when the invariant-set chain
of ``f - t`` stops without any update.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cas.monomial import GREVLEX, MonomialOrder
from .cas.polynomial import PolyMap, Polynomial
from .errors import RingMismatchError
from .groebner import radical_contains_all
from .invariant_set import DEFAULT_MAX_ITERATIONS, InvariantSetResult, invariant_set

LIFT_VAR = "__t"


@dataclass(frozen=True)
class LiftResult:
    lifts: bool
    iterations: int
    chain: InvariantSetResult

    def __bool__(self):
        return self.lifts


def lift_detail(f: Polynomial, F: PolyMap, *, max_iterations: int = DEFAULT_MAX_ITERATIONS,
                order: MonomialOrder = GREVLEX) -> LiftResult:
    if f.ring != F.ring:
        raise RingMismatchError(f"polynomial ring {f.ring} differs from map ring {F.ring}")
    ring = F.ring + (LIFT_VAR,)
    t = Polynomial.variable(ring, len(F.ring))
    X = f.embed(ring) - t
    res = invariant_set([X], F.extended(ring), max_iterations=max_iterations, order=order).require()
    # V(chain) is inside V(f - t) by construction; equality needs the other containment
    lifts = radical_contains_all(list(res.generators), [X], order, ring=ring)
    return LiftResult(lifts, res.iterations, res)


def lift_invariant(f: Polynomial, F: PolyMap, **kw) -> bool:
    """True iff ``f(x) - f(a)`` is an invariant of the loop for every initial value ``a``."""
    return lift_detail(f, F, **kw).lifts
