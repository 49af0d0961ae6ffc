"""Command-line interface.

Every command prints a human-readable report, or with ``--json`` one JSON
object with at least the keys ``command, status, degree, dimension, basis,
iterations, wall_ms``.  Exit codes: 0 success, 1 parse or usage error,
2 resource exhausted (the partial result is still printed).
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import click

from . import kernels
from .cas.monomial import GREVLEX, LEX
from .cas.text import format_polynomial
from .errors import FallbackFailed, ParseError, PolyinvError, ResourceExhausted, UnsupportedGuardError
from .invariant_set import DEFAULT_MAX_ITERATIONS, invariant_set
from .lifting import lift_detail
from .limits import limits
from .loop import check_pi_detail, load_loop, nonterminates
from .parametric import invariant_matrix, kernel_at

DEFAULT_TIMEOUT = 360.0
EXIT_OK, EXIT_ERROR, EXIT_EXHAUSTED = 0, 1, 2
ORDERS = {"grevlex": GREVLEX, "lex": LEX}
TL = "TL"


class Settings:
    def __init__(self, json_out=False, timeout=DEFAULT_TIMEOUT, max_iterations=DEFAULT_MAX_ITERATIONS,
                 max_coeff_bits=None, order="grevlex"):
        self.json_out = json_out
        self.timeout = timeout
        self.max_iterations = max_iterations
        self.max_coeff_bits = max_coeff_bits
        self.order = order

    @property
    def monomial_order(self):
        return ORDERS[self.order]

    def limits(self):
        timeout = self.timeout if self.timeout and self.timeout > 0 else None
        return limits(timeout=timeout, max_coeff_bits=self.max_coeff_bits)


def _texts(polys) -> list:
    return [format_polynomial(p) for p in polys]


def _report(command, status="ok", degree=None, dimension=None, basis=None, iterations=None, wall_ms=0, **extra):
    out = {
        "command": command,
        "status": status,
        "degree": degree,
        "dimension": dimension,
        "basis": basis if basis is not None else [],
        "iterations": iterations,
        "wall_ms": wall_ms,
    }
    out.update(extra)
    return out


def _emit(settings: Settings, report: dict, text: str) -> None:
    if settings.json_out:
        click.echo(json.dumps(report, indent=2))
    else:
        click.echo(text)


def _error_exit(settings: Settings, command: str, exc: Exception) -> None:
    msg = str(exc)
    click.echo(f"error: {msg}", err=True)
    if settings.json_out:
        click.echo(json.dumps(_report(command, "error", error=msg), indent=2))
    sys.exit(EXIT_ERROR)


def _partial_texts(partial) -> list:
    if isinstance(partial, (list, tuple)):
        return [format_polynomial(p) if hasattr(p, "ring") else str(p) for p in partial]
    return []


def _exhausted_exit(settings: Settings, command: str, exc: ResourceExhausted, t0: float, **extra) -> None:
    status = "timeout" if exc.timed_out else "error"
    partial = _partial_texts(exc.partial)
    report = _report(command, status, wall_ms=_ms(t0), reason=exc.reason, resource_exhausted=True,
                     partial=partial, **extra)
    click.echo(f"resource exhausted: {exc.reason}", err=True)
    lines = [f"status: {status} ({exc.reason})"]
    if partial:
        lines.append("partial:")
        lines.extend(f"  {p}" for p in partial)
    _emit(settings, report, "\n".join(lines))
    sys.exit(EXIT_EXHAUSTED)


def _ms(t0: float) -> int:
    return int(round((time.perf_counter() - t0) * 1000))


def _load(settings: Settings, command: str, path: str):
    try:
        return load_loop(path)
    except (ParseError, OSError, PolyinvError) as exc:
        _error_exit(settings, command, exc)


def _parse_point(text: str, n: int):
    from .cas.polynomial import to_rational

    parts = [p.strip() for p in text.split(",") if p.strip()]
    if len(parts) != n:
        raise click.BadParameter(f"expected {n} comma-separated values, got {len(parts)}")
    try:
        return [to_rational(p) for p in parts]
    except (ValueError, ZeroDivisionError) as exc:
        raise click.BadParameter(str(exc)) from exc


def _common(f):
    """Attach the global flags to a subcommand too, so they work after it."""
    f = click.option("--order", type=click.Choice(sorted(ORDERS)), default=None,
                     help="Monomial order for Groebner bases.")(f)
    f = click.option("--max-coeff-bits", type=int, default=None,
                     help="Ceiling on coefficient size in bits.")(f)
    f = click.option("--max-iterations", type=int, default=None,
                     help="Cap on invariant-set chain updates.")(f)
    f = click.option("--timeout-seconds", type=float, default=None,
                     help="Cooperative wall-clock limit (0 disables).")(f)
    f = click.option("--json", "json_out", is_flag=True, default=None, help="Emit one JSON object.")(f)
    return f


def _settings(ctx, json_out, timeout_seconds, max_iterations, max_coeff_bits, order) -> Settings:
    base = ctx.obj or Settings()
    return Settings(
        json_out=base.json_out if json_out is None else json_out,
        timeout=base.timeout if timeout_seconds is None else timeout_seconds,
        max_iterations=base.max_iterations if max_iterations is None else max_iterations,
        max_coeff_bits=base.max_coeff_bits if max_coeff_bits is None else max_coeff_bits,
        order=base.order if order is None else order,
    )


@click.group()
@click.option("--json", "json_out", is_flag=True, default=False, help="Emit one JSON object.")
@click.option("--timeout-seconds", type=float, default=DEFAULT_TIMEOUT, show_default=True,
              help="Cooperative wall-clock limit (0 disables).")
@click.option("--max-iterations", type=int, default=DEFAULT_MAX_ITERATIONS, show_default=True,
              help="Cap on invariant-set chain updates.")
@click.option("--max-coeff-bits", type=int, default=None, help="Ceiling on coefficient size in bits.")
@click.option("--order", type=click.Choice(sorted(ORDERS)), default="grevlex", show_default=True,
              help="Monomial order for Groebner bases.")
@click.version_option(package_name="artifact")
@click.pass_context
def main(ctx, json_out, timeout_seconds, max_iterations, max_coeff_bits, order):
    """Polynomial loop invariants from the command line."""
    ctx.obj = Settings(json_out, timeout_seconds, max_iterations, max_coeff_bits, order)


@main.command("invariant-set")
@click.argument("loop_file", type=click.Path(dir_okay=False))
@_common
@click.pass_context
def invariant_set_cmd(ctx, loop_file, **flags):
    """Invariant set of the loop body inside the guard variety."""
    s = _settings(ctx, **flags)
    loop = _load(s, "invariant-set", loop_file)
    t0 = time.perf_counter()
    try:
        loop.require_equational()
        if not loop.guard_eqs:
            raise UnsupportedGuardError("invariant-set needs a guard with at least one equation")
        with s.limits():
            res = invariant_set(list(loop.guard_eqs), loop.body, max_iterations=s.max_iterations,
                                order=s.monomial_order)
            if not res.stabilized:
                raise res_error(res)
            extra = {}
            if loop.has_init:
                extra["nonterminating"] = bool(nonterminates(loop, max_iterations=s.max_iterations,
                                                             order=s.monomial_order))
    except UnsupportedGuardError as exc:
        _error_exit(s, "invariant-set", exc)
    except ResourceExhausted as exc:
        _exhausted_exit(s, "invariant-set", exc, t0, iterations=_partial_iterations(exc))
    gens = [g.canonical() for g in res.generators]
    basis = _texts(gens)
    report = _report("invariant-set", "ok", basis=basis, iterations=res.iterations, wall_ms=_ms(t0),
                     dimension=None, **extra)
    lines = [f"status: stabilized after {res.iterations} update(s)", "generators:"]
    lines += [f"  {b}" for b in basis]
    if "nonterminating" in extra:
        lines.append(f"nonterminating from init: {str(extra['nonterminating']).lower()}")
    _emit(s, report, "\n".join(lines))


class _ChainExhausted(ResourceExhausted):
    pass


def res_error(res) -> ResourceExhausted:
    exc = _ChainExhausted(res.reason or "resource exhausted", partial=[g.canonical() for g in res.generators])
    exc.timed_out = res.timed_out
    exc.iterations = res.iterations
    return exc


def _partial_iterations(exc):
    return getattr(exc, "iterations", None)


@main.command("truncated")
@click.argument("loop_file", type=click.Path(dir_okay=False))
@click.option("--degree", "-d", type=click.IntRange(min=1), required=True)
@click.option("--rows", "-M", "rows", type=click.IntRange(min=0), default=None,
              help="Orbit points a^0..a^M to use (default: number of monomials).")
@_common
@click.pass_context
def truncated_cmd(ctx, loop_file, degree, rows, **flags):
    """Basis of the invariants of degree <= d from the loop's initial value."""
    from .truncated import truncated_invariant_ideal

    s = _settings(ctx, **flags)
    loop = _load(s, "truncated", loop_file)
    t0 = time.perf_counter()
    try:
        with s.limits():
            res = truncated_invariant_ideal(loop, degree, rows, max_iterations=s.max_iterations,
                                            order=s.monomial_order)
    except (UnsupportedGuardError, ValueError) as exc:
        _error_exit(s, "truncated", exc)
    except FallbackFailed as exc:
        _exhausted_exit(s, "truncated", exc, t0, degree=degree)
    except ResourceExhausted as exc:
        _exhausted_exit(s, "truncated", exc, t0, degree=degree)
    basis = _texts(res.polynomials)
    report = _report("truncated", "ok", degree=degree, dimension=res.dimension, basis=basis, wall_ms=_ms(t0),
                     iterations=res.stats.get("batch_iterations"), provenance=res.provenance.value,
                     rows=res.stats.get("rows"))
    lines = [f"degree {degree}: dimension {res.dimension} ({res.provenance.value})"]
    lines += [f"  {b}" for b in basis]
    lines.append(f"wall time: {report['wall_ms']} ms")
    _emit(s, report, "\n".join(lines))


@main.command("parametric")
@click.argument("loop_file", type=click.Path(dir_okay=False))
@click.option("--degree", "-d", type=click.IntRange(min=1), required=True)
@click.option("--at", "at", default=None, help="Initial value a1,...,an to specialize the matrix at.")
@click.option("--trimmed/--full", default=False, show_default=True,
              help="Print a Q-linear row basis instead of every chain row.")
@click.option("--matrix-out", type=click.Path(dir_okay=False, writable=True), default=None,
              help="Also write the matrix JSON to this file.")
@_common
@click.pass_context
def parametric_cmd(ctx, loop_file, degree, at, trimmed, matrix_out, **flags):
    """Polynomial matrix whose kernel at a is the degree-d truncated ideal from a."""
    s = _settings(ctx, **flags)
    loop = _load(s, "parametric", loop_file)
    t0 = time.perf_counter()
    try:
        loop.require_equational()
        point = _parse_point(at, loop.n) if at is not None else None
        with s.limits():
            A = invariant_matrix(loop.body, degree, loop.guard_diseq, max_iterations=s.max_iterations,
                                 order=s.monomial_order)
            shown = A.trimmed() if trimmed else A
            basis = _texts(kernel_at(A, point)) if point is not None else []
    except click.BadParameter as exc:
        _error_exit(s, "parametric", exc)
    except UnsupportedGuardError as exc:
        _error_exit(s, "parametric", exc)
    except ResourceExhausted as exc:
        _exhausted_exit(s, "parametric", exc, t0, degree=degree)
    matrix = shown.to_json()
    if matrix_out:
        Path(matrix_out).write_text(json.dumps(matrix, indent=2) + "\n")
    report = _report("parametric", "ok", degree=degree, dimension=len(basis) if point is not None else None,
                     basis=basis, iterations=A.iterations, wall_ms=_ms(t0), matrix=matrix,
                     at=[str(v) for v in point] if point is not None else None)
    lines = [json.dumps(matrix, indent=2)]
    if point is not None:
        lines.append(f"kernel at ({', '.join(str(v) for v in point)}): dimension {len(basis)}")
        lines += [f"  {b}" for b in basis]
    _emit(s, report, "\n".join(lines))


def _poly_arg(s, command, loop, text):
    try:
        return loop.polynomial(text)
    except (ParseError, PolyinvError) as exc:
        _error_exit(s, command, exc)


@main.command("check")
@click.argument("loop_file", type=click.Path(dir_okay=False))
@click.option("--poly", "poly", required=True, help="Candidate invariant.")
@_common
@click.pass_context
def check_cmd(ctx, loop_file, poly, **flags):
    """Decide whether a polynomial is an invariant of the loop from its init."""
    s = _settings(ctx, **flags)
    loop = _load(s, "check", loop_file)
    f = _poly_arg(s, "check", loop, poly)
    t0 = time.perf_counter()
    try:
        loop.require_equational()
        with s.limits():
            res = check_pi_detail(loop, f, max_iterations=s.max_iterations, order=s.monomial_order)
    except (UnsupportedGuardError, ValueError) as exc:
        _error_exit(s, "check", exc)
    except ResourceExhausted as exc:
        _exhausted_exit(s, "check", exc, t0)
    its = res.chain.iterations if res.chain is not None else None
    report = _report("check", "ok", degree=f.total_degree(), basis=[format_polynomial(f.canonical())],
                     iterations=its, wall_ms=_ms(t0), holds=res.holds, method=res.method)
    lines = [str(res.holds).lower(), f"certificate: {res.method}" + (f", {its} update(s)" if its is not None else "")]
    _emit(s, report, "\n".join(lines))


@main.command("lift")
@click.argument("loop_file", type=click.Path(dir_okay=False))
@click.option("--poly", "poly", required=True, help="Polynomial f; tests f(x) - f(a) for every a.")
@_common
@click.pass_context
def lift_cmd(ctx, loop_file, poly, **flags):
    """Decide whether f(x) - f(a) is invariant for every initial value a."""
    s = _settings(ctx, **flags)
    loop = _load(s, "lift", loop_file)
    f = _poly_arg(s, "lift", loop, poly)
    t0 = time.perf_counter()
    try:
        with s.limits():
            res = lift_detail(f, loop.body, max_iterations=s.max_iterations, order=s.monomial_order)
    except ResourceExhausted as exc:
        _exhausted_exit(s, "lift", exc, t0)
    report = _report("lift", "ok", degree=f.total_degree(), basis=[format_polynomial(f.canonical())],
                     iterations=res.iterations, wall_ms=_ms(t0), lifts=res.lifts)
    lines = [str(res.lifts).lower(), f"certificate: chain of f - t stabilized after {res.iterations} update(s)"]
    _emit(s, report, "\n".join(lines))


# -- benchmark sweep --------------------------------------------------------


def _parse_degrees(text: str) -> list:
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            out = list(range(int(lo), int(hi) + 1))
        else:
            out = sorted({int(t) for t in text.split(",") if t.strip()})
    except ValueError as exc:
        raise click.BadParameter(f"bad degree range {text!r}") from exc
    if not out or min(out) < 1:
        raise click.BadParameter("degrees must be positive")
    return out


def _bench_cell(args) -> dict:
    path, degree, timeout, max_iterations, order = args
    from .truncated import truncated_invariant_ideal

    name = Path(path).stem
    cell = {"benchmark": name, "degree": degree}
    t0 = time.perf_counter()
    if timeout is not None and timeout <= 0:
        return dict(cell, status="timeout", dimension=TL, wall_ms=0)
    try:
        loop = load_loop(path)
        with limits(timeout=timeout):
            res = truncated_invariant_ideal(loop, degree, max_iterations=max_iterations, order=ORDERS[order])
    except ResourceExhausted as exc:
        status = "timeout" if exc.timed_out else "error"
        return dict(cell, status=status, dimension=TL if exc.timed_out else None, reason=exc.reason,
                    wall_ms=_ms(t0))
    except (PolyinvError, ValueError, OSError) as exc:
        return dict(cell, status="error", dimension=None, reason=str(exc), wall_ms=_ms(t0))
    texts = _texts(res.polynomials)
    digest = hashlib.sha256("\n".join(texts).encode()).hexdigest()
    return dict(cell, status="ok", dimension=res.dimension, provenance=res.provenance.value,
                basis_sha256=digest, wall_ms=_ms(t0))


def run_bench(corpus_dir, degrees, timeout, *, max_iterations=DEFAULT_MAX_ITERATIONS, order="grevlex",
              jobs=1, skip_after_timeout=True) -> dict:
    """Truncated-ideal dimensions for every ``.loop`` file and degree.

    After a timeout the remaining higher degrees of that benchmark are marked
    TL without being run.
    """
    paths = sorted(Path(corpus_dir).glob("*.loop"))
    cells = []
    if jobs > 1:
        tasks = [(str(p), d, timeout, max_iterations, order) for p in paths for d in degrees]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(_bench_cell, tasks))
    else:
        for p in paths:
            dead = False
            for d in degrees:
                if dead:
                    cells.append({"benchmark": p.stem, "degree": d, "status": "timeout", "dimension": TL,
                                  "reason": "skipped after a lower-degree timeout", "wall_ms": 0})
                    continue
                cell = _bench_cell((str(p), d, timeout, max_iterations, order))
                cells.append(cell)
                dead = skip_after_timeout and cell["status"] == "timeout"
    return {
        "command": "bench",
        "status": "ok",
        "degrees": list(degrees),
        "timeout_seconds": timeout,
        "benchmarks": [p.stem for p in paths],
        "cells": cells,
    }


def bench_csv(table: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    degrees = table["degrees"]
    w.writerow(["benchmark"] + [f"d={d}" for d in degrees])
    by = {(c["benchmark"], c["degree"]): c for c in table["cells"]}
    for name in table["benchmarks"]:
        row = [name]
        for d in degrees:
            c = by[(name, d)]
            row.append(c["dimension"] if c["status"] != "error" else "ERR")
        w.writerow(row)
    return buf.getvalue()


def strip_wall_times(obj):
    """Copy of a report with every ``wall_ms`` field removed."""
    if isinstance(obj, dict):
        return {k: strip_wall_times(v) for k, v in obj.items() if k != "wall_ms"}
    if isinstance(obj, list):
        return [strip_wall_times(v) for v in obj]
    return obj


@main.command("bench")
@click.argument("corpus_dir", type=click.Path(file_okay=False, exists=True))
@click.option("--degrees", default="1..4", show_default=True, help="Range like 1..4 or a list like 1,3.")
@click.option("--timeout", "timeout", type=float, default=None, help="Per-cell limit in seconds.")
@click.option("--format", "fmt", type=click.Choice(["table", "csv", "json"]), default="table", show_default=True)
@click.option("--output", "-o", type=click.Path(dir_okay=False, writable=True), default=None,
              help="Write the CSV or JSON export here as well.")
@click.option("--jobs", "-j", type=click.IntRange(min=1), default=1, show_default=True)
@_common
@click.pass_context
def bench_cmd(ctx, corpus_dir, degrees, timeout, fmt, output, jobs, **flags):
    """Sweep the truncated-ideal dimensions over a corpus of loops."""
    s = _settings(ctx, **flags)
    try:
        degs = _parse_degrees(degrees)
    except click.BadParameter as exc:
        _error_exit(s, "bench", exc)
    timeout = s.timeout if timeout is None else timeout
    table = run_bench(corpus_dir, degs, timeout, max_iterations=s.max_iterations, order=s.order, jobs=jobs)
    if s.json_out:
        fmt = "json"
    text = json.dumps(table, indent=2) if fmt == "json" else bench_csv(table)
    if fmt == "table":
        text = text.replace(",", "\t")
    if output:
        Path(output).write_text(text if text.endswith("\n") else text + "\n")
    click.echo(text.rstrip("\n"))


@main.command("backend")
def backend_cmd():
    """Print which kernel backend is active."""
    click.echo(kernels.BACKEND)


if __name__ == "__main__":
    main()
