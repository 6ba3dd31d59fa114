import numpy as np
import pytest

from nucleus import UndirectedGraph

# vertices a..g -> 0..6: K5 on abcde, plus f joined to a,b,e and g joined to c,d
FIG1_NAMES = "abcdefg"
FIG1_EDGES = ["ab", "ac", "ad", "ae", "bc", "bd", "be", "cd", "ce", "de",
              "af", "bf", "ef", "cg", "dg"]

ACCEPTANCE = {}


def fig1_graph():
    pairs = [(FIG1_NAMES.index(x), FIG1_NAMES.index(y)) for x, y in FIG1_EDGES]
    return UndirectedGraph.from_edges(pairs, n=7)


def tri(name):
    return tuple(sorted(FIG1_NAMES.index(ch) for ch in name))


@pytest.fixture
def fig1():
    return fig1_graph()


def record(criterion, ok, detail=""):
    ACCEPTANCE[criterion] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        status = "PASS" if ok is True else ("SKIP" if ok is None else "FAIL")
        terminalreporter.write_line(f"criterion {key}: {status} {detail}".rstrip())
