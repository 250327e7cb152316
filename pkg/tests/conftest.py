from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import strategies as st

from fpcheck.algebra import ExecutionUniverse, FuzzyProcess, make_process

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "corpus"

E1 = ExecutionUniverse(["a"])
E2 = ExecutionUniverse(["a", "b"])
E3 = ExecutionUniverse(["a", "b", "c"])


def proc(universe, delta=None, gamma=None):
    return make_process(universe, delta or {}, gamma or {})


def p1(d, g):
    """Process on the one-point universe with delta(a)=d, gamma(a)=g."""
    return make_process(E1, {"a": d}, {"a": g})


GRID = [Fraction(i, 4) for i in range(5)]


def processes(universe=E2, values=GRID, total=False):
    pair = st.tuples(st.sampled_from(values), st.sampled_from(values))
    if total:
        pair = pair.filter(lambda dg: dg[0] or dg[1])
    return st.lists(pair, min_size=len(universe), max_size=len(universe)).map(
        lambda pairs: FuzzyProcess(
            universe, tuple(d for d, _ in pairs), tuple(g for _, g in pairs)
        )
    )


@pytest.fixture
def corpus():
    return CORPUS


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
