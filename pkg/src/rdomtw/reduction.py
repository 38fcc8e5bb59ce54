"""SAT-to-domination instance generators (r-dominating set and connected r-DS).

Each generator returns a ``ReductionInstance`` holding the graph, the target
size ``k_star`` and a registry of named vertex groups so that a satisfying
assignment can be turned into a solution of exactly ``k_star`` vertices.
Every gadget is checked against its distance contract by BFS when built.
"""

import itertools
import math
from dataclasses import dataclass, field

from .graph import Graph, ParseError, bfs_distances, is_connected
from .oracle import is_r_dominating

DEFAULT_VERTEX_CAP = 200_000


class ContractError(AssertionError):
    """A gadget failed its own distance contract (construction bug)."""


class InstanceTooLarge(ValueError):
    def __init__(self, size, cap):
        self.size = size
        self.cap = cap
        super().__init__(f"instance would have {size} vertices, above the cap of {cap}")


@dataclass
class CnfFormula:
    n0: int
    clauses: list

    @property
    def m(self):
        return len(self.clauses)

    def satisfied_by(self, assignment):
        """``assignment`` maps variable id (1-based) to bool (sequence or dict)."""
        val = assignment.__getitem__ if isinstance(assignment, dict) else (
            lambda v: assignment[v - 1])
        return all(any(val(abs(l)) == (l > 0) for l in c) for c in self.clauses)


def parse_cnf(text):
    """DIMACS CNF.  Comment lines start with 'c'; clauses end with 0."""
    n0 = m = None
    clauses, cur = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if n0 is not None:
                raise ParseError("duplicate header", lineno)
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"bad header {line!r}", lineno)
            try:
                n0, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(f"bad header {line!r}", lineno) from None
            if n0 < 0 or m < 0:
                raise ParseError("negative counts in header", lineno)
            continue
        if n0 is None:
            raise ParseError("clause before header", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", lineno) from None
            if lit == 0:
                if not cur:
                    raise ParseError("empty clause", lineno)
                clauses.append(cur)
                cur = []
            elif abs(lit) > n0:
                raise ParseError(f"literal {lit} exceeds {n0} variables", lineno)
            else:
                cur.append(lit)
    if n0 is None:
        raise ParseError("missing 'p cnf' header")
    if cur:
        clauses.append(cur)
    if len(clauses) != m:
        raise ParseError(f"header declares {m} clauses, found {len(clauses)}")
    return CnfFormula(n0, clauses)


def write_cnf(f):
    lines = [f"p cnf {f.n0} {f.m}"]
    lines += [" ".join(map(str, c)) + " 0" for c in f.clauses]
    return "\n".join(lines) + "\n"


class _Builder:
    """Growing vertex/edge lists with named registries."""

    def __init__(self):
        self.n = 0
        self.edges = []
        self.registry = {}

    def new(self, tag=None):
        self.n += 1
        if tag is not None:
            self.registry.setdefault(tag, []).append(self.n)
        return self.n

    def edge(self, u, v):
        if u != v:
            self.edges.append((u, v))

    def path(self, start, length, tag=None):
        """Hang a path of ``length`` edges on ``start``; returns the new vertices."""
        out, prev = [], start
        for _ in range(length):
            w = self.new(tag)
            self.edge(prev, w)
            out.append(w)
            prev = w
        return out

    def link(self, a, b, length, tag=None):
        """Join a and b by a path of ``length`` edges; returns the interior."""
        if length < 1:
            raise ValueError("link length must be positive")
        inner = [self.new(tag) for _ in range(length - 1)]
        seq = [a] + inner + [b]
        for x, y in zip(seq, seq[1:]):
            self.edge(x, y)
        return inner

    def graph(self):
        return Graph(self.n, self.edges)


def _frame_onto(b, bottom, r, avoid=None, top=None, tag=None):
    """Layered triangle over ``bottom`` (2r+2 vertices): height-1 vertex j sees
    bottom j..j+3, height-h vertex j sees height-(h-1) j..j+2, consecutive
    vertices of a layer are adjacent, and height r is the single top.
    ``avoid`` is a bottom index whose upward edges are left out."""
    if len(bottom) != 2 * r + 2:
        raise ValueError("frame bottom path must have 2r+2 vertices")
    layers = [list(bottom)]
    for h in range(1, r + 1):
        size = 2 * r - 2 * h + 1
        row = []
        for j in range(size):
            if h == r and top is not None:
                v = top
            else:
                v = b.new(tag)
            row.append(v)
            span = range(j, j + 4) if h == 1 else range(j, j + 3)
            for i in span:
                if h == 1 and avoid is not None and i == avoid:
                    continue
                b.edge(v, layers[-1][i])
            if j:
                b.edge(row[j - 1], v)
        layers.append(row)
    return layers[-1][0], layers[1:]


@dataclass
class RFrame:
    graph: Graph
    top: int
    bottom: list
    body: list
    avoided: int = None


def build_r_frame(r, avoided=None):
    """Stand-alone r-frame with its bottom path; ``avoided`` is a bottom index or None."""
    if r < 2:
        raise ValueError("r-frames need r >= 2")
    if avoided is not None and not 0 <= avoided <= 2 * r + 1:
        raise ValueError("avoided index must lie on the bottom path")
    b = _Builder()
    bottom = [b.new("bottom") for _ in range(2 * r + 2)]
    for x, y in zip(bottom, bottom[1:]):
        b.edge(x, y)
    top, layers = _frame_onto(b, bottom, r, avoided)
    g = b.graph()
    frame = RFrame(g, top, bottom, [v for row in layers for v in row], avoided)
    _check_frame(frame, r)
    return frame


def _check_frame(frame, r):
    d = bfs_distances(frame.graph, frame.top).dist
    for i, v in enumerate(frame.bottom):
        far = d[v] is None or d[v] > r
        if far != (i == frame.avoided):
            raise ContractError(f"frame bottom {i} at distance {d[v]} from the top (r={r})")
    if len(frame.bottom) - 1 != 2 * r + 1:
        raise ContractError("bottom path length")


@dataclass
class Pattern:
    graph: Graph
    root: int
    leaves: list
    body: list


def _pattern_onto(b, leaves, r, root=None, tag=None):
    """Pattern with the given leaf vertices; returns (root, body vertices)."""
    if r < 2:
        raise ValueError("patterns need r >= 2")
    if r % 2:
        up, down = (r - 1) // 2, (r + 1) // 2
    else:
        up, down = r // 2 - 1, r // 2 + 1
    if root is None:
        root = b.new(tag)
    body = [root]
    h = root
    for _ in range(up):
        w = b.new(tag)
        b.edge(h, w)
        body.append(w)
        h = w
    firsts = []
    for leaf in leaves:
        inner = b.link(h, leaf, down, tag)
        body.extend(inner)
        firsts.append(inner[0])
    if r % 2 == 0:
        for x, y in itertools.combinations(firsts, 2):
            b.edge(x, y)
    return root, body


def build_pattern(r, m):
    if r < 2 or m < 1:
        raise ValueError("patterns need r >= 2 and m >= 1")
    b = _Builder()
    leaves = [b.new("leaf") for _ in range(m)]
    root, body = _pattern_onto(b, leaves, r)
    pat = Pattern(b.graph(), root, leaves, body)
    _check_pattern(pat, r)
    return pat


def _check_pattern(pat, r):
    g = pat.graph
    d = bfs_distances(g, pat.root).dist
    for leaf in pat.leaves:
        if d[leaf] != r:
            raise ContractError(f"leaf {leaf} at distance {d[leaf]} from the root (r={r})")
        dl = bfs_distances(g, leaf).dist
        for v in pat.body:
            if dl[v] is None or dl[v] > r:
                raise ContractError(f"leaf {leaf} misses body vertex {v}")
        for other in pat.leaves:
            if other != leaf and dl[other] <= r:
                raise ContractError(f"leaf {leaf} reaches leaf {other}")


@dataclass
class ReductionInstance:
    graph: Graph
    kind: str
    k_star: int
    cnf: CnfFormula
    r: int
    p: int
    group_size: int
    t: int
    copies: int
    padding: int
    sets: list  # S tuples (path positions or segment indices), kept ones only
    root: int = None
    registry: dict = field(default_factory=dict)
    expected_vertices: int = 0

    def set_assignment(self, s_index):
        """Truth values (within a group) encoded by the s_index-th kept set."""
        return tuple(bool((s_index >> (self.group_size - 1 - j)) & 1)
                     for j in range(self.group_size))

    def set_index_for(self, assignment, group):
        """Index of the set encoding the given group's part of ``assignment``."""
        idx = 0
        for j in range(self.group_size):
            var = group * self.group_size + j + 1
            bit = assignment[var - 1] if var <= self.cnf.n0 else False
            idx = (idx << 1) | int(bool(bit))
        return idx


def _group_size(p, base):
    gs = int(math.floor(p * math.log2(base) + 1e-12))
    if gs < 1:
        raise ValueError("group size floor(p log(base)) must be at least 1")
    return gs


def _clause_sat_sets(cnf, clause, group, gs, n_sets, inst_assign):
    out = []
    for si in range(n_sets):
        vals = inst_assign(si)
        for lit in clause:
            j = abs(lit) - 1 - group * gs
            if 0 <= j < gs and vals[j] == (lit > 0):
                out.append(si)
                break
    return out


def rds_vertex_count(r, p, t, m, n_sets):
    copies = m * (2 * r * p * t + 1)
    per_copy = (p * (2 * r + 2)           # paths
                + p * 2 * r * r            # two guard frames per path
                + n_sets * (1 + p * (r * r - 1) + (r - 2) + 1)  # x_S, frames, link, xbar
                + 2 * r)                   # x, x' and their tails
    return t * copies * per_copy + 2 * (1 + 2 * r) + copies * r


def _rds_sizes(cnf, r, p):
    gs = _group_size(p, 2 * r + 1)
    padding = (-cnf.n0) % gs
    t = (cnf.n0 + padding) // gs
    n_sets = 2 ** gs
    return gs, padding, t, n_sets


def build_instance_rds(cnf, r, p=1, vertex_cap=DEFAULT_VERTEX_CAP):
    if r < 2 or p < 1:
        raise ValueError("need r >= 2 and p >= 1")
    gs, padding, t, n_sets = _rds_sizes(cnf, r, p)
    m = cnf.m
    copies = m * (2 * r * p * t + 1)
    expected = rds_vertex_count(r, p, t, m, n_sets)
    if expected > vertex_cap:
        raise InstanceTooLarge(expected, vertex_cap)
    all_sets = list(itertools.product(range(2 * r + 2), repeat=p))
    if len(all_sets) < n_sets:
        raise ValueError("fewer sets than assignments")
    sets = all_sets[:n_sets]
    # frames are checked once in isolation; the identified copies reuse the construction
    build_r_frame(r)
    build_r_frame(r, 0)

    b = _Builder()
    reg = b.registry
    for i in range(t):
        prev_paths = None
        for j in range(copies):
            paths = []
            for l in range(p):
                path = [b.new(("path", i, j, l)) for _ in range(2 * r + 2)]
                for x, y in zip(path, path[1:]):
                    b.edge(x, y)
                for gi in range(2):
                    top = b.new(("guard", i, j, l, gi))
                    _frame_onto(b, path, r, top=top, tag=("guardframe", i, j, l, gi))
                paths.append(path)
            if prev_paths is not None:
                for l in range(p):
                    b.edge(prev_paths[l][-1], paths[l][0])
            prev_paths = paths
            hub = b.new(("x", i, j))
            hub2 = b.new(("x'", i, j))
            b.path(hub, r - 1, ("tail", i, j))
            b.path(hub2, r - 1, ("tail", i, j))
            for si, S in enumerate(sets):
                xs = b.new(("xS", i, j, si))
                for l in range(p):
                    _frame_onto(b, paths[l], r, avoid=S[l], top=xs, tag=("setframe", i, j, si))
                xb = b.new(("xbar", i, j, si))
                b.link(xs, xb, r - 1, ("setlink", i, j, si))
                b.edge(xb, hub)
                b.edge(xb, hub2)
    h1, h2 = b.new("h1"), b.new("h2")
    for i in range(t):
        for l in range(p):
            b.edge(h1, reg[("path", i, 0, l)][0])
            b.edge(h2, reg[("path", i, copies - 1, l)][-1])
    for h in (h1, h2):
        b.path(h, r, ("htail", h))
        b.path(h, r, ("htail", h))
    inst = ReductionInstance(None, "rds", (p + 1) * t * m * (2 * r * p * t + 1) + 2, cnf, r, p,
                             gs, t, copies, padding, sets, None, reg, expected)
    for jc, clause in enumerate(cnf.clauses):
        for ell in range(2 * r * p * t + 1):
            c = b.new(("clause", jc, ell))
            b.path(c, r - 1, ("clausetail", jc, ell))
            for i in range(t):
                for si in _clause_sat_sets(cnf, clause, i, gs, n_sets, inst.set_assignment):
                    b.edge(c, reg[("xbar", i, m * ell + jc, si)][0])
    inst.graph = b.graph()
    if inst.graph.n != expected:
        raise ContractError(f"built {inst.graph.n} vertices, closed form says {expected}")
    return inst


def _check_assignment(inst, assignment):
    assignment = list(assignment)
    if len(assignment) != inst.cnf.n0:
        raise ValueError(f"assignment has {len(assignment)} values, formula has {inst.cnf.n0}")
    if not inst.cnf.satisfied_by(assignment):
        raise ValueError("assignment does not satisfy the formula")
    return assignment


def witness_rds(inst, assignment, check=True):
    """Solution of size k_star built from a satisfying assignment."""
    assignment = _check_assignment(inst, assignment)
    reg = inst.registry
    D = {reg["h1"][0], reg["h2"][0]}
    for i in range(inst.t):
        si = inst.set_index_for(assignment, i)
        S = inst.sets[si]
        for j in range(inst.copies):
            for l in range(inst.p):
                D.add(reg[("path", i, j, l)][S[l]])
            D.add(reg[("xbar", i, j, si)][0])
    if len(D) != inst.k_star:
        raise ContractError(f"witness has {len(D)} vertices, expected {inst.k_star}")
    if check and not is_r_dominating(inst.graph, D, inst.r):
        raise ContractError("witness does not r-dominate the instance")
    return D


def _segment_leaves(core, seg, r):
    """Core vertices a_1..a_{2r+2} that a set pattern touches, given the chosen segment
    (1-based s_j joins a_j and a_{j+1})."""
    if seg == 2 * r + 2:
        return core[1:2 * r + 1]
    return [a for idx, a in enumerate(core[:2 * r + 2], 1) if idx not in (seg, seg + 1)]


def rcds_vertex_count(r, p, t, m, n_sets):
    X = m * ((2 * r + 1) * p * t + 1)
    if r % 2:
        pat = lambda k: (r + 1) // 2 + k * (r - 1) // 2
    else:
        pat = lambda k: r // 2 + k * r // 2
    core = (2 * r + 3) + (2 * r + 1) + r * (r + 1) + (r + 2) * pat(r + 1)
    sets = n_sets * (pat(2 * r * p) + (r - 2) + 1 + r) + r * pat(n_sets) + 1 + (r - 1)
    per_group = X * (p * core + sets) - p * (X - 1) - 2 * p
    return 1 + r + t * per_group + m * ((2 * r + 1) * p * t + 1) * r


def _rcds_sizes(cnf, r, p):
    gs = _group_size(p, 2 * r + 2)
    padding = (-cnf.n0) % gs
    t = (cnf.n0 + padding) // gs
    return gs, padding, t, 2 ** gs


def build_instance_rcds(cnf, r, p=1, vertex_cap=DEFAULT_VERTEX_CAP):
    if r < 2 or p < 1:
        raise ValueError("need r >= 2 and p >= 1")
    gs, padding, t, n_sets = _rcds_sizes(cnf, r, p)
    m = cnf.m
    X = m * ((2 * r + 1) * p * t + 1)
    expected = rcds_vertex_count(r, p, t, m, n_sets)
    if expected > vertex_cap:
        raise InstanceTooLarge(expected, vertex_cap)
    all_sets = list(itertools.product(range(1, 2 * r + 3), repeat=p))
    sets = all_sets[:n_sets]
    build_pattern(r, r + 1)
    build_pattern(r, 2 * r * p)
    build_pattern(r, n_sets)

    b = _Builder()
    reg = b.registry
    root = b.new("root")
    b.path(root, r, "rootpath")
    for i in range(t):
        prev = None
        for j in range(X):
            cores = []
            for l in range(p):
                core = []
                for idx in range(1, 2 * r + 4):
                    if idx == 1 and prev is not None:
                        core.append(prev[l][-1])
                    elif (idx == 1 and j == 0) or (idx == 2 * r + 3 and j == X - 1):
                        core.append(root)
                    else:
                        core.append(b.new(("core", i, j, l)))
                reg[("a", i, j, l)] = core
                for x, y in zip(core, core[1:]):
                    b.edge(x, y)
                for q in range(0, 2 * r + 1):  # a_{q+1} .. a_{q+3}, same parity
                    if q + 2 < len(core):
                        b.link(core[q], core[q + 2], 2, ("chord", i, j, l))
                levels = []
                for e in range(1, 2 * r + 3, 2):  # a_2, a_4, ..., a_{2r+2}
                    inner = b.link(root, core[e], r + 1, ("evenlink", i, j, l))
                    reg[("evenpath", i, j, l, e + 1)] = inner
                    levels.append(inner)
                _pattern_onto(b, core[0:2 * r + 1:2], r, tag=("oddpat", i, j, l))
                _pattern_onto(b, core[1:2 * r + 2:2], r, tag=("evenpat", i, j, l))
                for h in range(r):
                    _pattern_onto(b, [lv[h] for lv in levels], r, tag=("forcepat", i, j, l))
                cores.append(core)
            prev = cores
            hub = b.new(("x", i, j))
            b.path(hub, r - 1, ("tail", i, j))
            levels = []
            for si, S in enumerate(sets):
                leaves = []
                for l in range(p):
                    leaves += _segment_leaves(cores[l], S[l], r)
                xs, _ = _pattern_onto(b, leaves, r, tag=("setpat", i, j, si))
                reg[("xS", i, j, si)] = [xs]
                xb = b.new(("xbar", i, j, si))
                b.link(xs, xb, r - 1, ("setlink", i, j, si))
                inner = b.link(root, xb, r + 1, ("xbarlink", i, j, si))
                reg[("xbarpath", i, j, si)] = inner
                levels.append(inner)
                b.edge(xb, hub)
            for h in range(r):
                _pattern_onto(b, [lv[h] for lv in levels], r, tag=("forcepat", i, j))
    k_star = ((r + 2) * p + r + 1) * t * X + 1
    inst = ReductionInstance(None, "rcds", k_star, cnf, r, p, gs, t, X, padding, sets, root,
                             reg, expected)
    for jc, clause in enumerate(cnf.clauses):
        for ell in range((2 * r + 1) * p * t + 1):
            c = b.new(("clause", jc, ell))
            b.path(c, r - 1, ("clausetail", jc, ell))
            for i in range(t):
                for si in _clause_sat_sets(cnf, clause, i, gs, n_sets, inst.set_assignment):
                    b.edge(c, reg[("xbar", i, m * ell + jc, si)][0])
    inst.graph = b.graph()
    if inst.graph.n != expected:
        raise ContractError(f"built {inst.graph.n} vertices, closed form says {expected}")
    return inst


def witness_rcds(inst, assignment, check=True):
    """Connected solution of size k_star: the root, one root-to-segment path per core
    and one root-to-xbar path per group copy."""
    assignment = _check_assignment(inst, assignment)
    reg, r = inst.registry, inst.r
    T = {inst.root}
    pad = 0
    for i in range(inst.t):
        si = inst.set_index_for(assignment, i)
        S = inst.sets[si]
        for j in range(inst.copies):
            for l in range(inst.p):
                seg = S[l]
                core = reg[("a", i, j, l)]
                even = seg if seg % 2 == 0 else seg + 1  # 1-based index of the even endpoint
                other = seg + 1 if seg % 2 == 0 else seg
                T.update(reg[("evenpath", i, j, l, even)])
                T.add(core[even - 1])
                if core[other - 1] == inst.root:
                    pad += 1  # boundary endpoint is the root itself
                T.add(core[other - 1])
            T.update(reg[("xbarpath", i, j, si)])
            T.add(reg[("xbar", i, j, si)][0])
    # a boundary segment ending at the root saves a vertex; keep the size at k_star
    T.update(reg["rootpath"][:pad])
    if len(T) != inst.k_star:
        raise ContractError(f"witness has {len(T)} vertices, expected {inst.k_star}")
    if check:
        if not is_connected(inst.graph, T):
            raise ContractError("witness is not connected")
        if not is_r_dominating(inst.graph, T, r):
            raise ContractError("witness does not r-dominate the instance")
    return T


def undominated(g, D, r):
    """Vertices farther than r from D (diagnostics)."""
    d = bfs_distances(g, D).dist
    return [v for v in g.vertices() if d[v] is None or d[v] > r]
