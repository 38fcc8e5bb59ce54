"""Simple undirected graphs, BFS distances and PACE .gr text I/O."""

from collections import deque

UNREACHABLE = None


class ParseError(ValueError):
    def __init__(self, msg, line=None):
        self.line = line
        if line is not None:
            msg = f"line {line}: {msg}"
        super().__init__(msg)


class Graph:
    """Undirected simple graph on vertices 1..n.

    Immutable after construction.  ``adj[v]`` is the sorted neighbour tuple
    of vertex ``v``; index 0 is unused.
    """

    __slots__ = ("n", "edges", "adj")

    def __init__(self, n, edges=()):
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        es = set()
        for u, v in edges:
            if not (1 <= u <= n and 1 <= v <= n):
                raise ValueError(f"edge ({u}, {v}) out of range 1..{n}")
            if u == v:
                raise ValueError(f"self-loop at {u}")
            es.add((u, v) if u < v else (v, u))
        nbrs = [[] for _ in range(n + 1)]
        for u, v in es:
            nbrs[u].append(v)
            nbrs[v].append(u)
        self.n = n
        self.edges = frozenset(es)
        self.adj = tuple(tuple(sorted(a)) for a in nbrs)

    @property
    def m(self):
        return len(self.edges)

    def vertices(self):
        return range(1, self.n + 1)

    def has_edge(self, u, v):
        return (min(u, v), max(u, v)) in self.edges

    def sorted_edges(self):
        return sorted(self.edges)

    def induced(self, subset):
        """Edges of G[subset] (vertex ids unchanged)."""
        s = set(subset)
        return [(u, v) for u, v in self.sorted_edges() if u in s and v in s]

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


class DistanceOracle:
    """Hop distances from a source set, optionally inside an induced subgraph.

    ``dist[v]`` is an int or ``UNREACHABLE``.
    """

    __slots__ = ("sources", "restriction", "dist", "parent")

    def __init__(self, sources, restriction, dist, parent):
        self.sources = sources
        self.restriction = restriction
        self.dist = dist
        self.parent = parent

    def __getitem__(self, v):
        return self.dist[v]

    def reachable(self, v):
        return self.dist[v] is not UNREACHABLE

    def path_to(self, v):
        """A shortest path from the source set to ``v`` (source first)."""
        if self.dist[v] is UNREACHABLE:
            return None
        path = [v]
        while self.parent[path[-1]] is not None:
            path.append(self.parent[path[-1]])
        return path[::-1]


def bfs_distances(g, sources, restriction=None):
    sources = [sources] if isinstance(sources, int) else sorted(set(sources))
    allowed = None
    if restriction is not None:
        allowed = set(restriction)
        bad = [s for s in sources if s not in allowed]
        if bad:
            raise ValueError(f"sources {bad} lie outside the restriction")
    dist = [UNREACHABLE] * (g.n + 1)
    parent = [None] * (g.n + 1)
    q = deque()
    for s in sources:
        if not 1 <= s <= g.n:
            raise ValueError(f"source {s} out of range")
        dist[s] = 0
        q.append(s)
    while q:
        u = q.popleft()
        du = dist[u] + 1
        for w in g.adj[u]:
            if dist[w] is UNREACHABLE and (allowed is None or w in allowed):
                dist[w] = du
                parent[w] = u
                q.append(w)
    return DistanceOracle(tuple(sources), None if allowed is None else frozenset(allowed), dist, parent)


def all_pairs_distances(g):
    """Matrix of hop distances (``UNREACHABLE`` for different components)."""
    return [None] + [bfs_distances(g, v).dist for v in g.vertices()]


def is_connected(g, subset):
    s = set(subset)
    if not s:
        return False
    d = bfs_distances(g, min(s), s)
    return all(d.dist[v] is not UNREACHABLE for v in s)


def components(g, subset=None):
    s = set(g.vertices()) if subset is None else set(subset)
    seen = set()
    out = []
    for v in sorted(s):
        if v in seen:
            continue
        d = bfs_distances(g, v, s)
        comp = [w for w in s if d.dist[w] is not UNREACHABLE]
        seen.update(comp)
        out.append(sorted(comp))
    return out


def _ints(tokens, lineno):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise ParseError(f"non-integer token in {' '.join(tokens)!r}", lineno) from None


def parse_gr(text):
    if not isinstance(text, str):
        text = text.read()
    n = m = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        toks = raw.split()
        if not toks or toks[0] == "c":
            continue
        if toks[0] == "p":
            if n is not None:
                raise ParseError("duplicate header", lineno)
            if len(toks) != 4 or toks[1] != "tw":
                raise ParseError("malformed header, expected 'p tw <n> <m>'", lineno)
            n, m = _ints(toks[2:], lineno)
            if n < 0 or m < 0:
                raise ParseError("negative count in header", lineno)
            continue
        if n is None:
            raise ParseError("edge line before header", lineno)
        if len(toks) != 2:
            raise ParseError("edge line must have two vertex ids", lineno)
        u, v = _ints(toks, lineno)
        for x in (u, v):
            if not 1 <= x <= n:
                raise ParseError(f"vertex id {x} out of range 1..{n}", lineno)
        if u == v:
            raise ParseError(f"self-loop at vertex {u}", lineno)
        edges.append((u, v))
    if n is None:
        raise ParseError("missing header 'p tw <n> <m>'")
    if len(edges) != m:
        raise ParseError(f"header announces {m} edges, found {len(edges)}")
    return Graph(n, edges)


def write_gr(g):
    lines = [f"p tw {g.n} {g.m}"]
    lines += [f"{u} {v}" for u, v in g.sorted_edges()]
    return "\n".join(lines) + "\n"
