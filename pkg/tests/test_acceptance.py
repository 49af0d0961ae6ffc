"""End-to-end acceptance gate.

Each criterion is a function that raises AssertionError on failure and
returns a one-line detail string on success.  Under pytest every criterion
is a test and a PASS/FAIL line per criterion is printed in the terminal
summary; run as a script, the same lines go to stdout.
"""

import json
import random
import sys
import time
from pathlib import Path

import pytest
from click.testing import CliRunner
from gmpy2 import mpq


from polyinv.cas import PolyMap, Polynomial, compose, monomial_basis, parse_map, parse_polynomial
from polyinv.cli import main as cli_main
from polyinv.cli import run_bench, strip_wall_times
from polyinv.errors import DeadlineExceeded
from polyinv.groebner import groebner_basis, s_polynomial_certificate
from polyinv.invariant_set import forward_invariance_certificate, invariant_set
from polyinv.lifting import lift_detail
from polyinv.limits import limits
from polyinv.linalg import span_equal
from polyinv.loop import load_loop, vanishes_on_orbit
from polyinv.parametric import invariant_matrix, kernel_at
from polyinv.truncated import polynomial_to_vector, truncated_invariant_ideal

PACKAGE = Path(__file__).resolve().parents[1] / "src" / "polyinv"
BENCHMARKS = PACKAGE / "benchmarks"
SAMPLES = PACKAGE / "samples"
RING = ("x1", "x2")

RESULTS = {}


def bench(name):
    return load_loop(BENCHMARKS / f"{name}.loop")


def vecs(polys, monos):
    return [polynomial_to_vector(f, monos) for f in polys]


# -- 1 -----------------------------------------------------------------------

GUARD = "x1^2 - x1*x2 + 9*x1^3 - 24*x1^2*x2 + 16*x1*x2^2"
FIRST = "360*x1^3 - 1248*x1^2*x2 + 40*x1^2 + 1408*x1*x2^2 - 72*x1*x2 - 512*x2^3 + 32*x2^2"
LINEAR_MAP = ("10*x1 - 8*x2", "6*x1 - 4*x2")


def criterion_1():
    F = parse_map(LINEAR_MAP, RING)
    t0 = time.perf_counter()
    res = invariant_set([parse_polynomial(GUARD, RING)], F)
    elapsed = time.perf_counter() - t0
    assert res.stabilized, res.status
    assert res.iterations == 1, res.iterations
    expected = [parse_polynomial(t, RING).canonical() for t in (GUARD, FIRST)]
    assert [g.canonical() for g in res.generators] == expected
    assert elapsed < 10, elapsed
    return f"1 update, 2 generators, {elapsed:.2f}s"


# -- 2 -----------------------------------------------------------------------

CASE_TABLE = {
    (0, 0): ["x1", "x2", "x1*x2", "x1^2", "x2^2"],
    (1, 1): ["x1 - x2", "x1^2 - x1*x2", "-x1*x2 + x2^2"],
    (4, 3): ["3*x1 - 4*x2", "-3*x1^2 + 16*x1*x2 - 16*x2^2", "-3*x1*x2 + 4*x2^2"],
    (1, 0): ["9*x1 - 9*x2 - 9*x1^2 + 24*x1*x2 - 16*x2^2"],
}


def criterion_2():
    t0 = time.perf_counter()
    monos = monomial_basis(2, 2)
    dims = []
    for a, expected in CASE_TABLE.items():
        out = CliRunner().invoke(cli_main, ["--json", "parametric", str(SAMPLES / "linear.loop"),
                                            "--degree", "2", "--at", f"{a[0]},{a[1]}"])
        assert out.exit_code == 0, out.output
        rep = json.loads(out.stdout)
        got = [parse_polynomial(t, RING) for t in rep["basis"]]
        want = [parse_polynomial(t, RING) for t in expected]
        assert rep["dimension"] == len(want), (a, rep["dimension"])
        assert span_equal(vecs(got, monos), vecs(want, monos)), a
        dims.append(rep["dimension"])
    elapsed = time.perf_counter() - t0
    assert elapsed < 60, elapsed
    return f"dims {tuple(dims)}, spans equal, {elapsed:.2f}s"


# -- 3 -----------------------------------------------------------------------

TABLE = {
    "fib1": (0, 0, 1, 4),
    "fib3": (0, 0, 1, 4),
    "fib2": (0, 0, 1),
    "nagata": (1, 5, 13, 26),
    "example9": (0, 0, 3, 11),
    "example10": (0, 2, 8, 19),
    "squares": (1, 5, 13, 26),
    "yagzhev9": (3,),
    "yagzhev11": (0, 0),
}
# slow cells; each must either finish or time out gracefully
TL_CELLS = [("fib2", 4), ("yagzhev9", 2), ("yagzhev9", 3), ("yagzhev9", 4), ("yagzhev11", 3), ("yagzhev11", 4)]
TL_LIMIT = 360.0


def criterion_3():
    t0 = time.perf_counter()
    for name, dims in TABLE.items():
        loop = bench(name)
        got = tuple(truncated_invariant_ideal(loop, d).dimension for d in range(1, len(dims) + 1))
        assert got == dims, (name, got, dims)
    finished = []
    for name, d in TL_CELLS:
        try:
            with limits(timeout=TL_LIMIT):
                res = truncated_invariant_ideal(bench(name), d)
            finished.append(f"{name}:d{d}={res.dimension}")
        except DeadlineExceeded as exc:
            assert exc.partial is not None
    # graceful timeout on a cell that cannot finish in a millisecond
    try:
        with limits(timeout=0.001):
            truncated_invariant_ideal(bench("yagzhev9"), 4)
        raise AssertionError("expected a timeout")
    except DeadlineExceeded as exc:
        assert exc.timed_out
    out = CliRunner().invoke(cli_main, ["--json", "--timeout-seconds", "0.001", "truncated",
                                        str(BENCHMARKS / "yagzhev9.loop"), "-d", "4"])
    assert out.exit_code == 2 and json.loads(out.stdout)["status"] == "timeout"
    elapsed = time.perf_counter() - t0
    return f"{sum(map(len, TABLE.values()))} cells exact; TL cells computed: {', '.join(finished)}; {elapsed:.1f}s"


# -- 4 -----------------------------------------------------------------------

NAMED = {
    "fib1": (3, "-2 + x1^2 + x2^2 + x3^2 - 2*x1*x2*x3"),
    "fib2": (3, "76 - x2 - 2*x1*x3 + 4*x1^2*x2"),
    "fib3": (3, "7 + x1 + x2 + x3 - x1^2 + x1*x2 + x1*x3 - x2^2 + x2*x3 - x3^2 + x1*x2*x3"),
    "fibonacci": (4, "-1 + x1^4 + 2*x1^3*x2 - x1^2*x2^2 - 2*x1*x2^3 + x2^4"),
}
YAGZHEV9_D1 = ["x1 - x3 + x5", "x2 - x4 + x6", "x8 - x7 - 7"]
SQUARES_D2 = [
    "1 + x1 + x2 + x3",
    "1 + x1 + x2 + x3^2",
    "2 + 3*x1 + 3*x2 + x1^2 + 2*x1*x2 + x2^2",
    "-2 - x1 - 3*x2 + x1^2 + 2*x1*x3 - x2^2",
    "-2 - 3*x1 - x2 - x1^2 + x2^2 + 2*x2*x3",
]


def criterion_4():
    for name, (d, text) in NAMED.items():
        loop = bench(name)
        res = truncated_invariant_ideal(loop, d)
        assert res.polynomials == (loop.polynomial(text).canonical(),), name
    for name, d, listed in (("yagzhev9", 1, YAGZHEV9_D1), ("squares", 2, SQUARES_D2)):
        loop = bench(name)
        monos = monomial_basis(loop.n, d)
        res = truncated_invariant_ideal(loop, d)
        assert span_equal(vecs(res.polynomials, monos), vecs([loop.polynomial(t) for t in listed], monos)), name
    return "4 named invariants equal in canonical form; Yagzhev9 d1 and Squares d2 spans equal"


# -- 5 -----------------------------------------------------------------------


def criterion_5():
    lifted = []
    for name in ("fib1", "fib2", "fib3"):
        loop = bench(name)
        (g,) = truncated_invariant_ideal(loop, 3).polynomials
        f = g - g.constant_term()
        res = lift_detail(f, loop.body)
        assert res.lifts, name
        assert forward_invariance_certificate(res.chain, loop.body.extended(res.chain.generators[0].ring))
        rng = random.Random(f"lift-{name}")
        for _ in range(10):
            a = tuple(mpq(rng.randint(-6, 6), rng.randint(1, 3)) for _ in range(loop.n))
            assert vanishes_on_orbit(loop.with_init(a), [f - f.eval(a)]), (name, a)
        lifted.append(name)
    return f"lifts for {', '.join(lifted)}; 10 random initial values each vanish on orbit"


# -- 6 -----------------------------------------------------------------------

# cells where the template route finishes well inside the limit
CROSS_CELLS = [("fibonacci", 1), ("fibonacci", 2), ("nagata", 1), ("example10", 1), ("squares", 1)]


def _random_poly(rng, ring, deg, terms):
    out = {}
    for _ in range(terms):
        e = tuple(rng.randint(0, deg) for _ in ring)
        out[e] = mpq(rng.randint(-5, 5), rng.randint(1, 4))
    return Polynomial(ring, out)


def criterion_6():
    counts = dict(gb=0, fwd=0, orbit=0, cross=0, compose=0)

    # invariant-set outputs: forward invariance and S-polynomial certificates
    chains = [([parse_polynomial(GUARD, RING)], parse_map(LINEAR_MAP, RING)),
              ([parse_polynomial("x1", RING)], parse_map(("x1", "x2 + 1"), RING)),
              ([parse_polynomial("x1 - 1", RING)], parse_map(("x1^2", "x2"), RING)),
              ([parse_polynomial("x1*x2 - 1", RING)], parse_map(("x2", "x1 + x2"), RING))]
    for guard, F in chains:
        res = invariant_set(guard, F)
        assert res.stabilized
        assert forward_invariance_certificate(res, F)
        counts["fwd"] += 1
        gb = groebner_basis(list(res.generators), ring=F.ring)
        assert s_polynomial_certificate(gb)
        counts["gb"] += 1

    # every invariant labelled by the fixed-initial-value route vanishes on 50 orbit steps
    for name, dims in TABLE.items():
        loop = bench(name)
        for d in range(1, len(dims) + 1):
            polys = truncated_invariant_ideal(loop, d).polynomials
            assert vanishes_on_orbit(loop, polys, bound=50), (name, d)
            counts["orbit"] += len(polys)

    # the two routes agree wherever the template route terminates
    for name, d in CROSS_CELLS:
        loop = bench(name)
        with limits(timeout=TL_LIMIT):
            A = invariant_matrix(loop.body, d)
        K = kernel_at(A, loop.init)
        fixed = truncated_invariant_ideal(loop, d)
        assert span_equal(vecs(K, A.monomials), vecs(fixed.polynomials, A.monomials)), (name, d)
        assert vanishes_on_orbit(loop, K, bound=50)
        counts["orbit"] += len(K)
        counts["cross"] += 1
    linear = load_loop(SAMPLES / "linear.loop")
    A = invariant_matrix(linear.body, 2)
    rng = random.Random(6)
    for _ in range(5):
        a = (rng.randint(-6, 6), rng.randint(-6, 6))
        fixed = truncated_invariant_ideal(linear.with_init(a), 2)
        assert span_equal(vecs(kernel_at(A, a), A.monomials), vecs(fixed.polynomials, A.monomials)), a
        counts["cross"] += 1

    # compose is a ring homomorphism and commutes with evaluation
    rng = random.Random(2024)
    for _ in range(1000):
        f, g = _random_poly(rng, RING, 3, 4), _random_poly(rng, RING, 3, 4)
        F = PolyMap([_random_poly(rng, RING, 2, 3) for _ in RING])
        a = tuple(mpq(rng.randint(-7, 7), rng.randint(1, 5)) for _ in RING)
        assert compose(f + g, F) == compose(f, F) + compose(g, F)
        assert compose(f * g, F) == compose(f, F) * compose(g, F)
        assert compose(f, F).eval(a) == f.eval(F(a))
        counts["compose"] += 1
    return ("S-poly certs {gb}, forward-invariance certs {fwd}, orbit-checked polynomials {orbit}, "
            "cross-validated cells {cross}, compose cases {compose}").format(**counts)


# -- 7 -----------------------------------------------------------------------


def criterion_7():
    t0 = time.perf_counter()
    first = json.dumps(strip_wall_times(run_bench(BENCHMARKS, [1, 2, 3, 4], TL_LIMIT)), sort_keys=True)
    second = json.dumps(strip_wall_times(run_bench(BENCHMARKS, [1, 2, 3, 4], TL_LIMIT)), sort_keys=True)
    assert first == second
    return f"two sweeps byte-identical ({len(first)} bytes), {time.perf_counter() - t0:.1f}s"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7]


def _run(number, fn):
    t0 = time.perf_counter()
    try:
        detail = fn()
    except AssertionError as exc:
        RESULTS[number] = (False, f"{exc!r}", time.perf_counter() - t0)
        raise
    RESULTS[number] = (True, detail, time.perf_counter() - t0)


def summary_lines():
    lines = []
    for number in sorted(RESULTS):
        ok, detail, elapsed = RESULTS[number]
        lines.append(f"criterion {number}: {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s) {detail}")
    return lines


@pytest.mark.parametrize("number", range(1, len(CRITERIA) + 1), ids=lambda n: f"criterion{n}")
def test_criterion(number):
    _run(number, CRITERIA[number - 1])


if __name__ == "__main__":
    failed = False
    for number, fn in enumerate(CRITERIA, 1):
        try:
            _run(number, fn)
        except AssertionError:
            failed = True
        print(summary_lines()[-1], flush=True)
    sys.exit(1 if failed else 0)
