import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from deligne.defining_graph import parse  # noqa: E402

DATA = Path(__file__).parent / "data"


def make_graph(gens, rels):
    doc = {"generators": list(gens), "relations": [{"pair": [a, b], "m": m} for a, b, m in rels]}
    return parse(json.dumps(doc))


def triangle(p, q, r):
    return make_graph("abc", [("a", "b", p), ("b", "c", q), ("a", "c", r)])


@pytest.fixture
def example_graph():
    return make_graph("str", [("s", "t", 4), ("t", "r", 2)])


HYPERBOLIC_TRIANGLES = [(5, 5, 5), (2, 4, 5), (2, 3, 7), (3, 3, 4), (2, 5, 5), (4, 4, 4)]


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
