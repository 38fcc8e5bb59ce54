"""Brute-force ground truth for r-domination and consistent-cut counting.

Everything here is deliberately naive: subsets are enumerated by size and
then lexicographically, and every candidate is checked with BFS.
"""

from itertools import combinations

from .graph import UNREACHABLE, bfs_distances, components, is_connected

DEFAULT_CAP = 20
CUT_COUNT_CAP = 7


class CapExceeded(ValueError):
    """Raised instead of running an exhaustive search that is too large."""


def _check_cap(g, cap):
    if g.n > cap:
        raise CapExceeded(f"brute force refused: n={g.n} exceeds cap {cap}")


def is_r_dominating(g, D, r):
    D = set(D)
    if g.n == 0:
        return True
    if not D:
        return False
    d = bfs_distances(g, D).dist
    return all(d[v] is not UNREACHABLE and d[v] <= r for v in g.vertices())


def subsets_by_size(n, sizes=None):
    """Subsets of 1..n in order of cardinality, then lexicographically."""
    for k in range(n + 1) if sizes is None else sizes:
        for s in combinations(range(1, n + 1), k):
            yield s


def brute_min_rds(g, r, cap=DEFAULT_CAP):
    _check_cap(g, cap)
    for s in subsets_by_size(g.n):
        if is_r_dominating(g, s, r):
            return len(s), set(s)
    raise AssertionError("the full vertex set always dominates")


def brute_min_rcds(g, r, cap=DEFAULT_CAP):
    """Minimum connected r-dominating set, or ``None`` if none exists."""
    _check_cap(g, cap)
    if g.n == 0 or len(components(g)) > 1:
        # a connected set lives in one component and cannot reach the others
        return None
    for s in subsets_by_size(g.n, range(1, g.n + 1)):
        if is_connected(g, s) and is_r_dominating(g, s, r):
            return len(s), set(s)
    return None


def count_consistent_cuts(g, C, root):
    """Number of bipartitions (C1, C2) of C with no edge of G[C] across and root in C1."""
    C = sorted(set(C))
    if root not in C:
        raise ValueError(f"root {root} is not in C")
    rest = [v for v in C if v != root]
    es = g.induced(C)
    count = 0
    for mask in range(1 << len(rest)):
        side = {root: 0}
        for i, v in enumerate(rest):
            side[v] = (mask >> i) & 1
        if all(side[u] == side[v] for u, v in es):
            count += 1
    return count


def brute_count_cuts_kW(g, r, k, W, weights, root, cap=CUT_COUNT_CAP):
    """Exact number of consistent cuts over r-dominating k-sets of weight W containing root.

    ``weights`` is indexable by vertex id.
    """
    _check_cap(g, cap)
    total = 0
    for s in subsets_by_size(g.n, [k]):
        if root not in s or sum(weights[v] for v in s) != W:
            continue
        if is_r_dominating(g, s, r):
            total += count_consistent_cuts(g, s, root)
    return total


def brute_count_table(g, r, k_max, weights, root, cap=CUT_COUNT_CAP):
    """``{(k, W): count}`` for every nonzero cell with k <= k_max."""
    _check_cap(g, cap)
    out = {}
    for s in subsets_by_size(g.n, range(1, k_max + 1)):
        if root not in s or not is_r_dominating(g, s, r):
            continue
        key = (len(s), sum(weights[v] for v in s))
        out[key] = out.get(key, 0) + count_consistent_cuts(g, s, root)
    return out


def brute_treewidth(g, cap=10):
    """Exact treewidth by minimising over all elimination orders (tiny graphs only)."""
    from itertools import permutations

    _check_cap(g, cap)
    best = max(g.n - 1, 0)
    for order in permutations(g.vertices()):
        nb = {v: set(g.adj[v]) for v in g.vertices()}
        w = 0
        for v in order:
            w = max(w, len(nb[v]))
            if w >= best:
                break
            for a in nb[v]:
                nb[a] |= nb[v] - {a}
                nb[a].discard(v)
            del nb[v]
        best = min(best, w)
    return best
