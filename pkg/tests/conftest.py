from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from polyinv.cas import parse_map, parse_polynomial
from polyinv.loop import load_loop

PACKAGE = Path(__file__).resolve().parents[1] / "src" / "polyinv"
BENCHMARKS = PACKAGE / "benchmarks"
SAMPLES = PACKAGE / "samples"

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def bench(name):
    return load_loop(BENCHMARKS / f"{name}.loop")


def sample(name):
    return load_loop(SAMPLES / f"{name}.loop")


def P(text, ring=("x1", "x2")):
    return parse_polynomial(text, ring)


def F2(*texts, ring=("x1", "x2")):
    return parse_map(texts, ring)


@pytest.fixture(scope="session")
def benchmarks_dir():
    return BENCHMARKS


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    lines = test_acceptance.summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
