import random

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from polyinv.errors import RingMismatchError
from polyinv.lifting import lift_detail, lift_invariant
from polyinv.loop import vanishes_on_orbit
from polyinv.truncated import truncated_invariant_ideal

from .conftest import F2, P, bench

CUBICS = {
    "fib1": "x1^2 + x2^2 + x3^2 - 2*x1*x2*x3",
    "fib2": "-x2 - 2*x1*x3 + 4*x1^2*x2",
    "fib3": "x1 + x2 + x3 - x1^2 + x1*x2 + x1*x3 - x2^2 + x2*x3 - x3^2 + x1*x2*x3",
}


def strip_constant(f):
    return f - f.constant_term()


def random_point(rng, n):
    return tuple(mpq(rng.randint(-6, 6), rng.randint(1, 3)) for _ in range(n))


@pytest.mark.parametrize("name", sorted(CUBICS))
def test_cubic_invariants_lift(name):
    loop = bench(name)
    f = loop.polynomial(CUBICS[name])
    assert lift_invariant(f, loop.body)


@pytest.mark.parametrize("name", sorted(CUBICS))
def test_computed_invariant_lifts_after_stripping(name):
    loop = bench(name)
    (g,) = truncated_invariant_ideal(loop, 3).polynomials
    assert lift_invariant(strip_constant(g), loop.body)


@pytest.mark.parametrize("name", sorted(CUBICS))
def test_lift_is_sound_on_random_initial_values(name):
    loop = bench(name)
    f = loop.polynomial(CUBICS[name])
    rng = random.Random(name)
    for _ in range(10):
        a = random_point(rng, loop.n)
        shifted = loop.with_init(a)
        assert vanishes_on_orbit(shifted, [f - f.eval(a)])


def test_fibonacci_quartic_lifts():
    loop = bench("fibonacci")
    assert lift_invariant(loop.polynomial("x1^4 + 2*x1^3*x2 - x1^2*x2^2 - 2*x1*x2^3 + x2^4"), loop.body)


@pytest.mark.parametrize("f, F", [
    ("x1", ("x1 + 1", "x2")),
    ("x1^2 + x1*x2 - x2^2", ("x2", "x1 + x2")),
])
def test_non_lifting(f, F):
    res = lift_detail(P(f), F2(*F))
    assert not res and res.iterations >= 1


def test_constants_lift():
    assert lift_invariant(P("5"), F2("x1^2 - x2", "3*x1"))


def test_conserved_coordinate():
    assert lift_invariant(P("x1"), F2("x1", "x2 + x1"))


def test_ring_mismatch():
    with pytest.raises(RingMismatchError):
        lift_invariant(bench("fib1").polynomial("x1"), F2("x1", "x2"))


def test_no_update_means_lift():
    for name, text in CUBICS.items():
        loop = bench(name)
        res = lift_detail(loop.polynomial(text), loop.body)
        assert res.iterations == 0 and res.lifts


@settings(max_examples=20)
@given(st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3))
def test_lifted_polynomials_are_orbit_invariants(a, b, c):
    F = F2(f"{a}*x1 + x2", f"{b}*x2 + {c}")
    f = P("x1 + x2")
    if lift_invariant(f, F):
        for pt in [(0, 0), (1, -2), (mpq(1, 2), 3)]:
            x = pt
            for _ in range(6):
                x = F(x)
                assert f.eval(x) == f.eval(pt)
