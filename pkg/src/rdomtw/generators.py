"""Random test instances: plain random graphs and partial k-trees with a known decomposition."""

import random

from .graph import Graph
from .treedecomp import TreeDecomposition


def random_graph(n, p, rng=None):
    rng = rng or random.Random()
    return Graph(n, [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)
                     if rng.random() < p])


def random_connected_graph(n, p, rng=None):
    """Random spanning tree plus independent extra edges with probability ``p``."""
    rng = rng or random.Random()
    order = list(range(1, n + 1))
    rng.shuffle(order)
    edges = {tuple(sorted((order[i], order[rng.randrange(i)]))) for i in range(1, n)}
    for u in range(1, n + 1):
        for v in range(u + 1, n + 1):
            if rng.random() < p:
                edges.add((u, v))
    return Graph(n, edges)


def random_partial_ktree(n, k, keep=0.7, rng=None):
    """A random partial k-tree with a width-k decomposition.

    The decomposition alternates separator bags (k vertices) and full bags
    (k+1 vertices); branching happens only at separators, so a nice form of
    it joins on k-vertex bags.
    """
    if n <= k:
        raise ValueError("need n > k")
    rng = rng or random.Random()
    edges = set()
    base = list(range(1, k + 1))
    for i in range(k):
        for j in range(i + 1, k):
            if rng.random() < keep:
                edges.add((base[i], base[j]))
    bags = [frozenset(base)]
    tree = []
    separators = [0]
    for v in range(k + 1, n + 1):
        s = rng.choice(separators)
        sep = bags[s]
        for w in sep:
            if rng.random() < keep:
                edges.add((min(v, w), max(v, w)))
        full = len(bags)
        bags.append(sep | {v})
        tree.append((s, full))
        drop = rng.choice(sorted(sep))
        nxt = len(bags)
        bags.append((sep - {drop}) | {v})
        tree.append((full, nxt))
        separators.append(nxt)
    return Graph(n, edges), TreeDecomposition(bags, tree)
