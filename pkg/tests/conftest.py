import random

import pytest

from cascadekit.events import validate_sequence
from cascadekit.graph import FollowerGraph

# follower -> followee; activation order 1..7
FIXTURE_EDGES = [(3, 1), (4, 1), (4, 2), (5, 2), (6, 1), (6, 3), (7, 1)]
FIXTURE_ORDER = [1, 2, 3, 4, 5, 6, 7]


@pytest.fixture
def fixture_graph():
    return FollowerGraph.from_edges(FIXTURE_EDGES)


@pytest.fixture
def fixture_seq():
    seq, _ = validate_sequence("fig4", [(u, t) for t, u in enumerate(FIXTURE_ORDER)])
    return seq


def random_instance(rng: random.Random, max_nodes: int = 12):
    """Random follow graph on <= max_nodes users plus a random activation order.

    Some activated users may be missing from the graph entirely.
    """
    n = rng.randint(1, max_nodes)
    users = list(range(n))
    density = rng.random()
    edges = [(u, v) for u in users for v in users if u != v and rng.random() < density * 0.5]
    k = rng.randint(1, n)
    order = rng.sample(users, k)
    if rng.random() < 0.2:
        order.insert(rng.randint(0, len(order)), f"ghost{rng.randint(0, 3)}")
        order = list(dict.fromkeys(order))
    return edges, order


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
