"""Invariant sets of polynomial maps.

The invariant set of ``F`` in ``X = V(g)`` is the set of points whose whole
forward orbit stays in ``X``.  It is the limit of the descending chain
``V(g) ⊇ V(g, g∘F) ⊇ V(g, g∘F, g∘F²) ⊇ ...``; the chain is extended until
the next composition already vanishes on the current variety.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .cas.monomial import GREVLEX, MonomialOrder
from .cas.polynomial import PolyMap, Polynomial, compose_all
from .errors import DeadlineExceeded, ResourceExhausted, RingMismatchError
from .groebner import GroebnerBasis, groebner_basis, radical_contains_all
from .limits import check_bits, checkpoint

DEFAULT_MAX_ITERATIONS = 64


class Status(enum.Enum):
    STABILIZED = "stabilized"
    RESOURCE_EXHAUSTED = "resource_exhausted"


@dataclass(frozen=True)
class InvariantSetResult:
    """Outcome of the chain computation.

    ``generators`` is ``g, g∘F, ..., g∘F^N`` (raw union, not inter-reduced)
    and ``iterations`` is ``N``, the number of updates.  When the status is
    ``RESOURCE_EXHAUSTED`` the generators describe a superset of the
    invariant set.  ``full_space`` marks the empty-guard case.
    """

    generators: tuple
    iterations: int
    status: Status
    reason: str | None = None
    timed_out: bool = False
    full_space: bool = False
    stats: dict = field(default_factory=dict, compare=False)

    @property
    def stabilized(self) -> bool:
        return self.status is Status.STABILIZED

    def require(self) -> "InvariantSetResult":
        """Return self, or raise the matching resource error."""
        if self.stabilized:
            return self
        cls = DeadlineExceeded if self.timed_out else ResourceExhausted
        raise cls(self.reason or "resource exhausted", partial=list(self.generators))

    def vanishes_at(self, point) -> bool:
        return all(g.eval(point) == 0 for g in self.generators)

    def reduced_basis(self, order: MonomialOrder = GREVLEX) -> GroebnerBasis | None:
        """Reduced Gröbner basis of the generators, for display."""
        if self.full_space:
            return None
        return groebner_basis(self.generators, order, ring=self.generators[0].ring)


def _nonzero(polys):
    return [p for p in polys if not p.is_zero()]


def invariant_set(g, F: PolyMap, *, max_iterations: int = DEFAULT_MAX_ITERATIONS, order: MonomialOrder = GREVLEX,
                  probes=None, max_pairs: int | None = None) -> InvariantSetResult:
    """Compute generators of the invariant set of ``F`` in ``V(g)``.

    ``probes`` is an optional list of points, or a callable taking the
    current generator list and returning points; it only speeds up
    negative radical-membership answers.
    """
    g = list(g) if not isinstance(g, Polynomial) else [g]
    if not g:
        return InvariantSetResult((), 0, Status.STABILIZED, full_space=True)
    ring = F.ring
    for p in g:
        if p.ring != ring:
            raise RingMismatchError(f"guard ring {p.ring} differs from map ring {ring}")
    S = list(g)
    stats = {"probe_refutations": 0, "rabinowitsch": 0}
    iterations = 0

    def exhausted(exc):
        return InvariantSetResult(tuple(S), iterations, Status.RESOURCE_EXHAUSTED, str(exc),
                                  timed_out=isinstance(exc, DeadlineExceeded), stats=stats)

    try:
        gb = groebner_basis(S, order, ring=ring, max_pairs=max_pairs)
        nxt = compose_all(g, F)
        while True:
            checkpoint(partial=S)
            pts = probes(S) if callable(probes) else (probes or ())
            if radical_contains_all(nxt, S, order, ring=ring, gb=gb, probes=pts, max_pairs=max_pairs,
                                    stats=stats):
                return InvariantSetResult(tuple(S), iterations, Status.STABILIZED, stats=stats)
            if iterations >= max_iterations:
                return InvariantSetResult(tuple(S), iterations, Status.RESOURCE_EXHAUSTED,
                                          f"iteration cap of {max_iterations} reached", stats=stats)
            S.extend(nxt)
            iterations += 1
            new = _nonzero(nxt)
            gb = groebner_basis(new, order, ring=ring, start=gb, max_pairs=max_pairs)
            nxt = compose_all(nxt, F)
            for p in nxt:
                check_bits(p.max_coeff_bits(), "composition coefficient", partial=S)
    except ResourceExhausted as exc:
        return exhausted(exc)


def forward_invariance_certificate(result: InvariantSetResult, F: PolyMap, order: MonomialOrder = GREVLEX) -> bool:
    """True iff ``s∘F`` lies in the radical of the generators for every generator ``s``.

    This certifies ``F(V(S)) ⊆ V(S)``.
    """
    if result.full_space:
        return True
    if not result.stabilized:
        raise ValueError("certificate requires a stabilized result")
    gens = list(result.generators)
    return radical_contains_all(compose_all(gens, F), gens, order, ring=F.ring)
