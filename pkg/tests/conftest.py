import pytest

from rdomtw.graph import Graph


def path(n):
    return Graph(n, [(i, i + 1) for i in range(1, n)])


def cycle(n):
    return Graph(n, [(i, i % n + 1) for i in range(1, n + 1)])


def complete(n):
    return Graph(n, [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)])


def star(leaves):
    return Graph(leaves + 1, [(1, i) for i in range(2, leaves + 2)])


@pytest.fixture
def graphs():
    return {"path": path, "cycle": cycle, "complete": complete, "star": star}
