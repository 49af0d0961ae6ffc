"""Exact arithmetic foundation: rationals, monomials, polynomials, maps."""

from .monomial import (
    DEGLEX,
    GREVLEX,
    LEX,
    Monomial,
    MonomialOrder,
    OrderKind,
    block_order,
    display_key,
    monomial_basis,
)
from .polynomial import (
    PolyMap,
    Polynomial,
    Rational,
    add,
    as_fraction,
    compose,
    compose_all,
    evaluate,
    make_ring,
    mul,
    to_rational,
)
from .text import format_polynomial, natural_ring, parse_polynomial


def parse_map(texts, ring) -> PolyMap:
    return PolyMap(parse_polynomial(t, ring) for t in texts)


__all__ = [
    "DEGLEX",
    "GREVLEX",
    "LEX",
    "Monomial",
    "MonomialOrder",
    "OrderKind",
    "PolyMap",
    "Polynomial",
    "Rational",
    "add",
    "as_fraction",
    "block_order",
    "compose",
    "compose_all",
    "display_key",
    "evaluate",
    "format_polynomial",
    "make_ring",
    "monomial_basis",
    "mul",
    "natural_ring",
    "parse_map",
    "parse_polynomial",
    "to_rational",
]
