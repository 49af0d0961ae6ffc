import random

import pytest
from gmpy2 import mpq

from polyinv.cas import PolyMap, Polynomial, parse_map, parse_polynomial
from polyinv.errors import DeadlineExceeded, ResourceExhausted
from polyinv.invariant_set import Status, forward_invariance_certificate, invariant_set
from polyinv.limits import limits

from .conftest import F2, P

G = "x1^2 - x1*x2 + 9*x1^3 - 24*x1^2*x2 + 16*x1*x2^2"
LINEAR = ("10*x1 - 8*x2", "6*x1 - 4*x2")


@pytest.fixture
def guarded():
    return invariant_set([P(G)], F2(*LINEAR))


class TestGuardedLinearLoop:
    def test_one_update_and_listed_generators(self, guarded):
        assert guarded.stabilized
        assert guarded.iterations == 1
        listed = [P(G), P("360*x1^3 - 1248*x1^2*x2 + 40*x1^2 + 1408*x1*x2^2 - 72*x1*x2 - 512*x2^3 + 32*x2^2")]
        assert [g.canonical() for g in guarded.generators] == [f.canonical() for f in listed]

    def test_certificate(self, guarded):
        assert forward_invariance_certificate(guarded, F2(*LINEAR))

    def test_orbit_soundness_on_generated_points(self, guarded):
        # V(S) is the curve x1 - x2 + (3x1 - 4x2)^2 = 0, parametrized by u = 3x1 - 4x2
        F = F2(*LINEAR)
        for u in [mpq(1), mpq(-2), mpq(1, 3), mpq(5, 7)]:
            a = (-u - 4 * u * u, -u - 3 * u * u)
            assert guarded.vanishes_at(a)
            pt = a
            for _ in range(25):
                assert P(G).eval(pt) == 0
                pt = F(pt)

    def test_reduced_basis_for_display(self, guarded):
        gb = guarded.reduced_basis()
        assert all(gb.contains(g) for g in guarded.generators)


class TestSmallCases:
    def test_forward_invariant_guard(self):
        res = invariant_set([P("x1")], F2("x1", "x2 + 1"))
        assert res.stabilized and res.iterations == 0
        assert res.generators == (P("x1"),)

    def test_squaring_map_keeps_x1_equal_one(self):
        res = invariant_set([P("x1 - 1")], F2("x1^2", "x2"))
        assert res.stabilized and res.iterations == 0
        for x2 in range(-3, 4):
            assert res.vanishes_at((1, x2))
        assert not res.vanishes_at((-1, 0))

    def test_fixed_point_guard(self):
        res = invariant_set([P("x1"), P("x2")], F2("0", "0"))
        assert res.stabilized
        assert forward_invariance_certificate(res, F2("0", "0"))

    def test_empty_guard_is_full_space(self):
        res = invariant_set([], F2("x1", "x2"))
        assert res.full_space and res.stabilized and res.generators == ()

    def test_truncated_chain_fails_certificate(self):
        from dataclasses import replace

        F = F2("x1 + 1", "x2")
        fake = replace(invariant_set([P("x1")], F2("x1", "x2")), generators=(P("x1"),))
        assert not forward_invariance_certificate(fake, F)

    def test_shift_empties_the_set(self):
        res = invariant_set([P("x1")], F2("x1 + 1", "x2"))
        assert res.stabilized
        gb = res.reduced_basis()
        assert gb.is_unit()


class TestCaps:
    def test_iteration_cap_returns_partial_chain(self):
        res = invariant_set([P(G)], F2(*LINEAR), max_iterations=0)
        assert res.status is Status.RESOURCE_EXHAUSTED
        assert res.generators == (P(G),)
        with pytest.raises(ResourceExhausted) as info:
            res.require()
        assert info.value.partial == [P(G)]

    def test_deadline_is_reported_as_timeout(self):
        with limits(timeout=0.0):
            res = invariant_set([P(G)], F2(*LINEAR))
        assert res.status is Status.RESOURCE_EXHAUSTED and res.timed_out
        with pytest.raises(DeadlineExceeded):
            res.require()

    def test_coefficient_ceiling(self):
        with limits(max_coeff_bits=4):
            res = invariant_set([P(G)], F2(*LINEAR))
        assert res.status is Status.RESOURCE_EXHAUSTED and not res.timed_out

    def test_prefix_property(self):
        F = F2("x2", "x1 + x2")
        g = [P("x1*x2 - 1")]
        full = invariant_set(g, F)
        for cap in range(full.iterations + 1):
            part = invariant_set(g, F, max_iterations=cap)
            assert full.generators[: len(part.generators)] == part.generators


def _random_linear_map(rng):
    c = [rng.randint(-3, 3) for _ in range(4)]
    return F2(f"{c[0]}*x1 + {c[1]}*x2", f"{c[2]}*x1 + {c[3]}*x2")


def test_random_chains_are_monotone_and_certified():
    from polyinv.groebner import radical_contains_all

    rng = random.Random(5)
    for _ in range(8):
        F = _random_linear_map(rng)
        a, b = rng.randint(-2, 2), rng.randint(-2, 2)
        g = [P(f"x1^2 + {a}*x1*x2 + {b}*x2")]
        res = invariant_set(g, F, max_iterations=8)
        if not res.stabilized:
            continue
        gens = list(res.generators)
        k = len(g)
        # each update added something outside the radical of what came before
        for j in range(k, len(gens), k):
            assert not radical_contains_all(gens[j : j + k], gens[:j], ring=F.ring)
        assert forward_invariance_certificate(res, F)
