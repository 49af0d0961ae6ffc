import random

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from polyinv.linalg import (
    CRTLift,
    LinearSystem,
    ModularEchelon,
    echelon,
    in_span,
    integer_row,
    kernel_basis,
    primes,
    rank,
    rational_reconstruct,
    rref,
    span_equal,
    to_mod,
)

entries = st.integers(-6, 6)


def matrices(max_rows=5, max_cols=6):
    return st.integers(1, max_cols).flatmap(
        lambda m: st.lists(st.lists(entries, min_size=m, max_size=m), min_size=1, max_size=max_rows)
    )


def mat_vec(rows, v):
    return [sum(mpq(a) * b for a, b in zip(r, v)) for r in rows]


class TestKernel:
    def test_zero_matrix(self):
        ker = kernel_basis([[0, 0, 0]], 3)
        assert ker == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]

    def test_identity(self):
        assert kernel_basis([[1, 0], [0, 1]], 2) == []

    def test_known_kernel(self):
        ker = kernel_basis([[1, 2, 3], [2, 4, 6]], 3)
        assert span_equal(ker, [[-2, 1, 0], [-3, 0, 1]])

    def test_linear_system_wrapper(self):
        sys_ = LinearSystem([[1, -1]], ((1,), (0,)))
        assert sys_.ncols == 2
        assert sys_.kernel() == [[1, 1]]

    def test_row_length_checked(self):
        with pytest.raises(ValueError):
            kernel_basis([[1, 2]], 3)

    @given(matrices())
    def test_rank_nullity(self, rows):
        m = len(rows[0])
        ker = kernel_basis(rows, m)
        assert rank(rows, m) + len(ker) == m
        for v in ker:
            assert all(x == 0 for x in mat_vec(rows, v))
        assert rank(ker, m) == len(ker) if ker else True


class TestEchelon:
    def test_first_nonzero_pivot(self):
        E, piv = echelon([[0, 2, 4], [3, 1, 1]], 3)
        assert piv == [0, 1]

    @given(matrices())
    def test_rref_spans_same_space(self, rows):
        R = rref(rows)
        assert span_equal(R, rows)
        for i, r in enumerate(R):
            lead = next(j for j, x in enumerate(r) if x)
            assert r[lead] == 1
            assert all(R[k][lead] == 0 for k in range(len(R)) if k != i)

    def test_integer_row(self):
        assert integer_row([mpq(1, 2), mpq(-3, 4), 0]) == [2, -3, 0]
        assert integer_row([6, 9]) == [2, 3]

    def test_in_span(self):
        assert in_span([2, 4], [[1, 2]])
        assert not in_span([1, 0], [[1, 2]])


class TestModular:
    P = next(primes())

    def test_primes_are_large_and_increasing(self):
        it = primes()
        ps = [next(it) for _ in range(3)]
        assert ps == sorted(ps) and ps[0] > 2 ** 61

    def test_to_mod(self):
        assert to_mod(mpq(1, 2), 7) == 4
        assert to_mod(mpq(1, 7), 7) is None

    @pytest.mark.parametrize("q", [mpq(3, 7), mpq(-22, 9), mpq(0), mpq(123456789, 1000003)])
    def test_rational_reconstruction(self, q):
        assert rational_reconstruct(to_mod(q, self.P), self.P) == q

    def test_crt_lift_recovers_large_fraction(self):
        q = mpq(2 ** 80 + 3, 3 ** 40)
        lift = CRTLift()
        it = primes()
        for _ in range(4):
            p = next(it)
            lift.add([to_mod(q, p), to_mod(-q, p)], p)
        assert lift.reconstruct() == [q, -q]

    @settings(max_examples=50)
    @given(matrices(max_rows=6, max_cols=7))
    def test_modular_kernel_matches_exact(self, rows):
        m = len(rows[0])
        ech = ModularEchelon(m, self.P)
        for r in rows:
            ech.add([x % self.P for x in r])
        exact = kernel_basis(rows, m)
        assert ech.rank == m - len(exact)
        reduced = [[to_mod(x, self.P) for x in v] for v in exact]
        assert ech.kernel() == reduced

    def test_dependent_row_reported(self):
        ech = ModularEchelon(3, self.P)
        assert ech.add([1, 2, 3])
        assert not ech.add([2, 4, 6])
        assert ech.add([0, 0, 1])
        assert ech.pivots == [0, 2]


def test_random_rank_agrees_with_modular():
    rng = random.Random(11)
    p = next(primes())
    for _ in range(20):
        m = rng.randint(1, 8)
        rows = [[rng.randint(-3, 3) for _ in range(m)] for _ in range(rng.randint(1, 8))]
        ech = ModularEchelon(m, p)
        for r in rows:
            ech.add(r)
        assert ech.rank == rank(rows, m)
