"""Tree decompositions: PACE .td I/O, validation, min-fill heuristic,
and conversion to nice and edge-nice rooted forms."""

from collections import defaultdict, deque

from .graph import ParseError


class Violation:
    """One failed decomposition condition (1: cover, 2: edges, 3: subtree)."""

    def __init__(self, condition, message):
        self.condition = condition
        self.message = message

    def __repr__(self):
        return f"Violation({self.condition!r}, {self.message!r})"

    def __str__(self):
        return f"condition {self.condition}: {self.message}"


class TDValidationError(ValueError):
    def __init__(self, violations):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


class TreeDecomposition:
    """Bags ``bags[i]`` (frozensets) joined by ``tree_edges`` over bag indices 0..len-1."""

    def __init__(self, bags, tree_edges=()):
        self.bags = [frozenset(b) for b in bags]
        self.tree_edges = [tuple(e) for e in tree_edges]

    @property
    def width(self):
        return max((len(b) for b in self.bags), default=0) - 1

    def neighbours(self):
        nb = defaultdict(list)
        for a, b in self.tree_edges:
            nb[a].append(b)
            nb[b].append(a)
        return nb

    def __repr__(self):
        return f"TreeDecomposition(bags={len(self.bags)}, width={self.width})"


def parse_td(text, g):
    if not isinstance(text, str):
        text = text.read()
    header = None
    bags = {}
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        toks = raw.split()
        if not toks or toks[0] == "c":
            continue
        try:
            if toks[0] == "s":
                if header is not None:
                    raise ParseError("duplicate header", lineno)
                if len(toks) != 5 or toks[1] != "td":
                    raise ParseError("malformed header, expected 's td <bags> <width+1> <n>'", lineno)
                header = tuple(int(t) for t in toks[2:])
            elif toks[0] == "b":
                if header is None:
                    raise ParseError("bag line before header", lineno)
                ids = [int(t) for t in toks[1:]]
                if not ids:
                    raise ParseError("bag line without id", lineno)
                bid, verts = ids[0], ids[1:]
                if not 1 <= bid <= header[0]:
                    raise ParseError(f"bag id {bid} out of range", lineno)
                if bid in bags:
                    raise ParseError(f"bag {bid} defined twice", lineno)
                for v in verts:
                    if not 1 <= v <= g.n:
                        raise ParseError(f"vertex {v} out of range 1..{g.n}", lineno)
                bags[bid] = frozenset(verts)
            else:
                if header is None:
                    raise ParseError("tree edge before header", lineno)
                if len(toks) != 2:
                    raise ParseError("tree edge line must have two bag ids", lineno)
                a, b = int(toks[0]), int(toks[1])
                for x in (a, b):
                    if not 1 <= x <= header[0]:
                        raise ParseError(f"bag id {x} out of range", lineno)
                edges.append((a - 1, b - 1))
        except ValueError as e:
            if isinstance(e, ParseError):
                raise
            raise ParseError(f"non-integer token in {raw.strip()!r}", lineno) from None
    if header is None:
        raise ParseError("missing header 's td <bags> <width+1> <n>'")
    nbags, wp1, n = header
    if n != g.n:
        raise ParseError(f"decomposition is for {n} vertices, graph has {g.n}")
    if len(bags) != nbags:
        raise ParseError(f"header announces {nbags} bags, found {len(bags)}")
    td = TreeDecomposition([bags[i] for i in range(1, nbags + 1)], edges)
    if nbags and td.width + 1 != wp1:
        raise ParseError(f"header width+1 is {wp1}, largest bag has {td.width + 1} vertices")
    problems = validate(td, g)
    if problems:
        raise TDValidationError(problems)
    return td


def write_td(td, g):
    lines = [f"s td {len(td.bags)} {td.width + 1} {g.n}"]
    for i, b in enumerate(td.bags, 1):
        lines.append(" ".join(["b", str(i)] + [str(v) for v in sorted(b)]))
    lines += [f"{a + 1} {b + 1}" for a, b in td.tree_edges]
    return "\n".join(lines) + "\n"


def _tree_problems(td):
    k = len(td.bags)
    if k == 0:
        return []
    if len(td.tree_edges) != k - 1:
        return [Violation("tree", f"{k} bags need {k - 1} tree edges, got {len(td.tree_edges)}")]
    nb = td.neighbours()
    seen = {0}
    q = deque([0])
    while q:
        a = q.popleft()
        for b in nb[a]:
            if b not in seen:
                seen.add(b)
                q.append(b)
    if len(seen) != k:
        return [Violation("tree", "bag tree is not connected")]
    return []


def validate(td, g):
    """Return the list of violated conditions; empty means valid."""
    out = _tree_problems(td)
    covered = set().union(*td.bags) if td.bags else set()
    missing = [v for v in g.vertices() if v not in covered]
    if missing:
        out.append(Violation(1, f"vertices {missing[:10]} lie in no bag"))
    extra = sorted(v for v in covered if not 1 <= v <= g.n)
    if extra:
        out.append(Violation(1, f"bags mention unknown vertices {extra[:10]}"))
    where = defaultdict(list)
    for i, b in enumerate(td.bags):
        for v in b:
            where[v].append(i)
    for u, v in g.sorted_edges():
        if not set(where.get(u, ())) & set(where.get(v, ())):
            out.append(Violation(2, f"edge ({u}, {v}) is in no bag"))
    if out and out[0].condition == "tree":
        return out
    nb = td.neighbours()
    for v in sorted(where):
        occ = set(where[v])
        start = where[v][0]
        seen = {start}
        q = deque([start])
        while q:
            a = q.popleft()
            for b in nb[a]:
                if b in occ and b not in seen:
                    seen.add(b)
                    q.append(b)
        if len(seen) != len(occ):
            out.append(Violation(3, f"bags containing vertex {v} are not connected"))
    return out


def min_fill_order(g):
    """Elimination order by minimum fill-in, ties to the smallest vertex id."""
    nb = {v: set(g.adj[v]) for v in g.vertices()}
    order = []
    alive = set(g.vertices())
    while alive:
        best = None
        for v in sorted(alive):
            ns = list(nb[v])
            fill = 0
            for i in range(len(ns)):
                a = nb[ns[i]]
                for j in range(i + 1, len(ns)):
                    if ns[j] not in a:
                        fill += 1
            if best is None or fill < best[0]:
                best = (fill, v)
                if fill == 0:
                    break
        v = best[1]
        ns = list(nb[v])
        for a in ns:
            nb[a].update(ns)
            nb[a].discard(a)
            nb[a].discard(v)
        del nb[v]
        alive.discard(v)
        order.append(v)
    return order


def decompose_from_order(g, order):
    """Tree decomposition induced by an elimination ordering."""
    pos = {v: i for i, v in enumerate(order)}
    nb = {v: set(g.adj[v]) for v in g.vertices()}
    bags = []
    for v in order:
        later = {w for w in nb[v] if pos[w] > pos[v]}
        bags.append(frozenset(later | {v}))
        for a in later:
            nb[a].update(later - {a})
    edges = []
    roots = []
    for i, v in enumerate(order):
        later = bags[i] - {v}
        if later:
            nxt = min(later, key=pos.__getitem__)
            edges.append((i, pos[nxt]))
        else:
            roots.append(i)
    # components of a disconnected graph are chained into one tree
    for a, b in zip(roots, roots[1:]):
        edges.append((a, b))
    return _contract_subsets(TreeDecomposition(bags, edges))


def _contract_subsets(td):
    """Merge every bag into a neighbour that contains it."""
    bags = list(td.bags)
    nb = {i: set() for i in range(len(bags))}
    for a, b in td.tree_edges:
        nb[a].add(b)
        nb[b].add(a)
    alive = set(range(len(bags)))
    changed = True
    while changed:
        changed = False
        for i in sorted(alive):
            sup = [j for j in sorted(nb[i]) if bags[i] <= bags[j]]
            if sup and len(alive) > 1:
                j = sup[0]
                for k in nb[i]:
                    if k != j:
                        nb[k].discard(i)
                        nb[k].add(j)
                        nb[j].add(k)
                nb[j].discard(i)
                del nb[i]
                alive.discard(i)
                changed = True
    idx = {old: new for new, old in enumerate(sorted(alive))}
    edges = sorted({(min(idx[a], idx[b]), max(idx[a], idx[b])) for a in alive for b in nb[a]})
    return TreeDecomposition([bags[i] for i in sorted(alive)], edges)


def min_fill_decompose(g):
    if g.n == 0:
        raise ValueError("graph has no vertices")
    return decompose_from_order(g, min_fill_order(g))


LEAF, INTRODUCE, FORGET, JOIN, INTRODUCE_EDGE = "leaf", "introduce", "forget", "join", "introduce-edge"


class NiceNode:
    __slots__ = ("kind", "bag", "children", "vertex", "edge")

    def __init__(self, kind, bag, children=(), vertex=None, edge=None):
        self.kind = kind
        self.bag = tuple(sorted(bag))
        self.children = tuple(children)
        self.vertex = vertex
        self.edge = edge

    def __repr__(self):
        extra = self.vertex if self.edge is None else self.edge
        return f"<{self.kind} {extra} {list(self.bag)}>"


class NiceTreeDecomposition:
    """Rooted nice decomposition; ``nodes`` are in post-order, the root last."""

    def __init__(self, nodes):
        self.nodes = nodes
        self.root = len(nodes) - 1

    @property
    def width(self):
        return max(len(x.bag) for x in self.nodes) - 1

    def __len__(self):
        return len(self.nodes)

    def parents(self):
        par = [None] * len(self.nodes)
        for i, x in enumerate(self.nodes):
            for c in x.children:
                par[c] = i
        return par

    def subtree_vertices(self):
        """``V_i`` for every node, as frozensets."""
        out = []
        for x in self.nodes:
            s = set(x.bag)
            for c in x.children:
                s |= out[c]
            out.append(frozenset(s))
        return out

    def kinds(self):
        return [x.kind for x in self.nodes]


class EdgeNiceTreeDecomposition(NiceTreeDecomposition):
    def subtree_edges(self):
        """``E_i`` for every node, as frozensets of sorted pairs."""
        out = []
        for x in self.nodes:
            s = set()
            if x.kind == INTRODUCE_EDGE:
                s.add(x.edge)
            for c in x.children:
                s |= out[c]
            out.append(frozenset(s))
        return out


def _rooted_children(td, root=0):
    nb = td.neighbours()
    children = defaultdict(list)
    order = []
    seen = {root}
    stack = [root]
    while stack:
        a = stack.pop()
        order.append(a)
        for b in sorted(nb[a]):
            if b not in seen:
                seen.add(b)
                children[a].append(b)
                stack.append(b)
    return children, order


class _Builder:
    def __init__(self):
        self.nodes = []
        self.size = []

    def add(self, node):
        self.nodes.append(node)
        self.size.append(1 + sum(self.size[c] for c in node.children))
        return len(self.nodes) - 1

    def chain(self, top, target):
        """Forget then introduce from the bag of ``top`` to ``target``."""
        cur = set(self.nodes[top].bag)
        for v in sorted(cur - target):
            cur.discard(v)
            top = self.add(NiceNode(FORGET, cur, (top,), vertex=v))
        for v in sorted(target - cur):
            cur.add(v)
            top = self.add(NiceNode(INTRODUCE, cur, (top,), vertex=v))
        return top


def make_nice(td, g=None):
    """Nice form with empty leaves and an empty root bag."""
    b = _Builder()
    if not td.bags:
        b.add(NiceNode(LEAF, ()))
        return NiceTreeDecomposition(b.nodes)
    children, order = _rooted_children(td)
    top = {}
    for a in reversed(order):
        bag = set(td.bags[a])
        subs = [b.chain(top[c], bag) for c in children[a]]
        if not subs:
            subs = [b.chain(b.add(NiceNode(LEAF, ())), bag)]
        subs.sort(key=lambda i: (b.size[i], i))
        cur = subs[0]
        for other in subs[1:]:
            cur = b.add(NiceNode(JOIN, bag, (cur, other)))
        top[a] = cur
    b.chain(top[order[0]], set())
    return NiceTreeDecomposition(b.nodes)


def make_edge_nice(td, g):
    """Edge-nice form: each edge introduced once, right below the forget
    of whichever endpoint leaves first."""
    nice = make_nice(td, g)
    pending = defaultdict(list)
    forgotten_at = {}
    for i, x in enumerate(nice.nodes):
        if x.kind == FORGET:
            forgotten_at[x.vertex] = i
    for u, v in g.sorted_edges():
        first = min(forgotten_at[u], forgotten_at[v])
        pending[first].append((u, v))
    out = []
    remap = {}
    for i, x in enumerate(nice.nodes):
        kids = tuple(remap[c] for c in x.children)
        if x.kind == FORGET and pending[i]:
            (c,) = kids
            for e in pending[i]:
                out.append(NiceNode(INTRODUCE_EDGE, out[c].bag, (c,), edge=e))
                c = len(out) - 1
            kids = (c,)
        out.append(NiceNode(x.kind, x.bag, kids, vertex=x.vertex))
        remap[i] = len(out) - 1
    return EdgeNiceTreeDecomposition(out)


def check_nice(nice):
    """Structural self-check of a (edge-)nice decomposition; returns messages."""
    errs = []
    for i, x in enumerate(nice.nodes):
        kb = [set(nice.nodes[c].bag) for c in x.children]
        bag = set(x.bag)
        if x.kind == LEAF:
            if x.children or bag:
                errs.append(f"node {i}: leaf must be empty and childless")
        elif x.kind == INTRODUCE:
            if len(kb) != 1 or kb[0] | {x.vertex} != bag or x.vertex in kb[0]:
                errs.append(f"node {i}: bad introduce")
        elif x.kind == FORGET:
            if len(kb) != 1 or bag | {x.vertex} != kb[0] or x.vertex in bag:
                errs.append(f"node {i}: bad forget")
        elif x.kind == JOIN:
            if len(kb) != 2 or kb[0] != bag or kb[1] != bag:
                errs.append(f"node {i}: bad join")
        elif x.kind == INTRODUCE_EDGE:
            if len(kb) != 1 or kb[0] != bag or not set(x.edge) <= bag:
                errs.append(f"node {i}: bad introduce-edge")
        for c in x.children:
            if c >= i:
                errs.append(f"node {i}: child {c} not before parent")
    if nice.nodes[nice.root].bag:
        errs.append("root bag is not empty")
    return errs
