"""Cut&Count parity dynamic program for connected r-domination.

Tables carry a leading batch axis (independent runs that differ only in
weights and root), then one axis of size 2r+2 per bag vertex (sorted by
id), then ``t`` in 0..k and ``W`` in 0..2nk.  Digits per bag axis:
``0..r-1`` are labels -r..-1, ``r`` is 0_1, ``r+1`` is 0_2 and
``r+2..2r+1`` are labels 1..r.

A label's magnitude is the vertex's final distance to the solution; a
positive sign means that distance is already realised inside G_i and a
negative sign means it is not yet.  With that reading every subcut induces
exactly one labeling, so the tables count exactly; by default they count
modulo 2.
"""

import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .graph import UNREACHABLE, components, is_connected
from .oracle import is_r_dominating
from .treedecomp import (FORGET, INTRODUCE, INTRODUCE_EDGE, JOIN, LEAF, make_edge_nice,
                         min_fill_decompose)

DEFAULT_SEED = 20240601


def digit_labels(r):
    """Signed label per digit, both zeros as 0."""
    return np.array(list(range(-r, 0)) + [0, 0] + list(range(1, r + 1)))


def digit_of(label, r):
    """Digit for a label; zeros are given as the strings '0_1' / '0_2'."""
    if label == "0_1":
        return r
    if label == "0_2":
        return r + 1
    if label < 0:
        return r + label
    if label > 0:
        return r + 1 + label
    raise ValueError("label 0 must be given as '0_1' or '0_2'")


@dataclass
class CutCountRun:
    weights: tuple  # weights[v] for v in 1..n, index 0 unused
    root: int
    seed: int
    rep: int = 0

    @property
    def n(self):
        return len(self.weights) - 1


def sample_weights(n, k=None, seed=DEFAULT_SEED, rep=0, root=1):
    """Independent uniform weights in 1..2n, deterministic in (seed, rep, root)."""
    if n < 1:
        raise ValueError("need at least one vertex")
    rng = np.random.default_rng([seed, rep, root])
    w = rng.integers(1, 2 * n + 1, size=n)
    return CutCountRun((0,) + tuple(int(x) for x in w), root, seed, rep)


def table_shape(r, m, k, n, batch=1):
    return (batch,) + (2 * r + 2,) * m + (k + 1, 2 * n * k + 1)


def _lab(r, m, axis):
    """Signed labels along bag axis ``axis``, broadcastable over the bag axes."""
    shape = [1] * m
    shape[axis] = 2 * r + 2
    return digit_labels(r).reshape(shape)


def _full(mask):
    """Bag-shaped mask to full table shape (batch and (t, W) broadcast)."""
    return mask[None, ..., None, None]


def _ax(i):
    return i + 1  # bag axis i lives after the batch axis


def _add(a, b, mod2):
    return a ^ b if mod2 else a + b


def _shift(A, dt, dws, mod2):
    """Shift every batch row down the (t, W) grid by (dt, dws[b])."""
    out = np.zeros_like(A)
    T, W = A.shape[-2:]
    dws = np.asarray(dws)
    for w in np.unique(dws):
        sel = dws == w
        if dt < T and w < W:
            out[sel, ..., dt:, w:] = A[sel, ..., : T - dt, : W - w]
    return out


def _unshift(A, dt, dws):
    """Inverse of ``_shift`` (drops the low cells)."""
    out = np.zeros_like(A)
    T, W = A.shape[-2:]
    dws = np.asarray(dws)
    for w in np.unique(dws):
        sel = dws == w
        if dt < T and w < W:
            out[sel, ..., : T - dt, : W - w] = A[sel, ..., dt:, w:]
    return out


def cc_leaf(r, k, n, batch=1, mod2=True):
    A = np.zeros(table_shape(r, 0, k, n, batch), dtype=np.uint8 if mod2 else np.int64)
    A[..., 0, 0] = 1
    return A


def cc_introduce_vertex(child, child_bag, u, r, weights, roots, mod2=True):
    """``weights`` is (batch, n+1), ``roots`` is (batch,)."""
    child_bag = sorted(child_bag)
    a = sorted(child_bag + [u]).index(u)
    B = 2 * r + 2
    ws = np.asarray(weights)[:, u]
    shifted = _shift(child, 1, ws, mod2)
    slices = []
    for dgt in range(B):
        if dgt < r:
            s = child
        elif dgt == r:
            s = shifted
        elif dgt == r + 1:
            s = shifted.copy()
            s[np.asarray(roots) == u] = 0
        else:
            s = np.zeros_like(child)
        slices.append(s)
    return np.stack(slices, axis=_ax(a))


def _sl(ndim, fixed):
    """Index tuple fixing bag axes (dict axis -> digit), keeping them as views."""
    idx = [slice(None)] * ndim
    for i, dgt in fixed.items():
        idx[_ax(i)] = slice(dgt, dgt + 1)
    return tuple(idx)


def _closure(A, bag, r, dist, witnesses, mod2):
    """Push counts to the labelings whose signs reflect distances realised inside G_i.

    A negative label -t at x becomes +t when some witness y with label >= 0
    has t = d_{G_i}(x, y) + |c(y)|.  Axes are processed one after another,
    always reading the current labels, which yields the exact push-forward.
    Moved entries become zero, so overlapping witnesses never move twice.
    """
    pos = {v: i for i, v in enumerate(bag)}
    for xi, x in enumerate(bag):
        for t in range(1, r + 1):
            for y in witnesses:
                yi = pos[y]
                dxy = dist[x][y]
                if yi == xi or dxy is UNREACHABLE or dxy > t:
                    continue
                s = t - dxy
                digits = (r, r + 1) if s == 0 else (r + 1 + s,)
                for dy in digits:
                    src = A[_sl(A.ndim, {xi: r - t, yi: dy})]
                    dst = A[_sl(A.ndim, {xi: r + 1 + t, yi: dy})]
                    if mod2:
                        np.bitwise_xor(dst, src, out=dst)
                    else:
                        dst += src
                    src[...] = 0
    return A


def cc_introduce_edge(child, bag, edge, r, dist, mod2=True, validity="magnitude"):
    """``dist[x][y]`` is d_{G_i}(x, y) with the new edge already present.

    ``validity="signed"`` compares signed labels instead of magnitudes; it drops
    real labelings such as (1, -1) and is kept only for comparison.
    """
    if validity not in ("magnitude", "signed"):
        raise ValueError(f"unknown validity rule {validity!r}")
    bag = sorted(bag)
    u, v = edge
    iu, iv = bag.index(u), bag.index(v)
    lab = digit_labels(r)
    A = child.copy()
    for du in range(2 * r + 2):
        for dv in range(2 * r + 2):
            if validity == "signed":
                bad = abs(lab[du] - lab[dv]) > 1
            else:
                bad = abs(abs(lab[du]) - abs(lab[dv])) > 1
            bad |= {du, dv} == {r, r + 1}
            if bad:
                A[_sl(A.ndim, {iu: du, iv: dv})] = 0
    return _closure(A, bag, r, dist, [u, v], mod2)


def cc_forget(child, child_bag, u, r, dist_u, mod2=True, witness="promise"):
    """``dist_u[v]`` is d_{G_i}(u, v)."""
    child_bag = sorted(child_bag)
    a = child_bag.index(u)
    bag = [v for v in child_bag if v != u]
    ax = _ax(a)
    nonneg = [slice(None)] * child.ndim
    nonneg[ax] = slice(r, 2 * r + 2)
    part = child[tuple(nonneg)]
    out = np.bitwise_xor.reduce(part, axis=ax) if mod2 else part.sum(axis=ax)
    for dgt in range(r):
        d = dgt - r
        rest = np.take(child, dgt, axis=ax).copy()
        for i, v in enumerate(bag):
            dv = dist_u[v]
            if dv is UNREACHABLE:
                continue
            want = d + dv
            if want < 0:
                digits = (r + want,)
            elif witness == "promise" or want == 0:
                continue  # promise: witnesses are negative; literal 0 is ambiguous
            else:
                digits = (r + 1 + want,) if want <= r else ()
            for dw in digits:
                src = rest[_sl(rest.ndim, {i: dw})]
                dst = out[_sl(out.ndim, {i: dw})]
                if mod2:
                    np.bitwise_xor(dst, src, out=dst)
                else:
                    dst += src
                src[...] = 0
    return out


def _bar(A, r, m, mod2, inverse=False):
    A = A.copy()
    order = reversed(range(m)) if inverse else range(m)
    for i in order:
        for t in range(1, r + 1):
            hi = [slice(None)] * A.ndim
            lo = [slice(None)] * A.ndim
            hi[_ax(i)], lo[_ax(i)] = r + 1 + t, r - t
            hi, lo = tuple(hi), tuple(lo)
            if mod2:
                A[hi] ^= A[lo]
            elif inverse:
                A[hi] -= A[lo]
            else:
                A[hi] += A[lo]
    return A


def _conv2(a, b, mod2):
    shape = a.shape
    T, W = shape[-2:]
    rows = int(np.prod(shape[:-2], dtype=np.int64))
    a2, b2 = a.reshape(rows, T, W), b.reshape(rows, T, W)
    if mod2:
        out = kernels.conv2_mod2(a2, b2)
    else:
        out = np.zeros_like(a2)
        for t1 in range(T):
            for w1 in range(W):
                col = a2[:, t1, w1]
                if col.any():
                    out[:, t1:, w1:] += col[:, None, None] * b2[:, : T - t1, : W - w1]
    return out.reshape(shape)


def _drop_zero_counts(A, bag, r, weights):
    """Remove the size and weight of zero-labelled bag vertices (counted on both sides)."""
    ws = np.asarray(weights)
    for i, v in enumerate(bag):
        for dgt in (r, r + 1):
            sl = [slice(None)] * A.ndim
            sl[_ax(i)] = slice(dgt, dgt + 1)
            sl = tuple(sl)
            A[sl] = _unshift(A[sl], 1, ws[:, v])
    return A


def cc_join(left, right, bag, r, weights, mod2=True):
    """Sum over consistent child labelings, via bar labels and a (t, W) convolution."""
    if left.shape != right.shape:
        raise ValueError("join children must have tables over the same bag")
    bag = sorted(bag)
    m = len(bag)
    Lb = _bar(left, r, m, mod2)
    Rb = _drop_zero_counts(_bar(right, r, m, mod2), bag, r, weights)
    return _bar(_conv2(Lb, Rb, mod2), r, m, mod2, inverse=True)


def naive_cc_join(left, right, bag, r, weights, mod2=True):
    """Direct consistent-pair summation (small bags only)."""
    import itertools

    bag = sorted(bag)
    m = len(bag)
    B = 2 * r + 2
    out = np.zeros_like(left)
    ws = np.asarray(weights)
    T, W = left.shape[-2:]
    for c in itertools.product(range(B), repeat=m):
        opts = []
        for dgt in c:
            if dgt > r + 1:
                neg = 2 * r + 1 - dgt
                opts.append([(dgt, neg), (neg, dgt), (dgt, dgt)])
            else:
                opts.append([(dgt, dgt)])
        zs = [bag[i] for i, dgt in enumerate(c) if dgt in (r, r + 1)]
        for b in range(left.shape[0]):
            zt, zw = len(zs), int(sum(ws[b, v] for v in zs))
            acc = np.zeros((T, W), dtype=np.int64)
            for pairs in itertools.product(*opts):
                lj = left[(b,) + tuple(p[0] for p in pairs)].astype(np.int64)
                rk = right[(b,) + tuple(p[1] for p in pairs)].astype(np.int64)
                for t1 in range(T):
                    for w1 in range(W):
                        if lj[t1, w1] == 0:
                            continue
                        for t2 in range(T):
                            for w2 in range(W):
                                t, w = t1 + t2 - zt, w1 + w2 - zw
                                if 0 <= t < T and 0 <= w < W:
                                    acc[t, w] += lj[t1, w1] * rk[t2, w2]
            out[(b,) + c] = acc % 2 if mod2 else acc
    return out


def cc_join_closure(A, bag, r, dist, mod2=True):
    """Signs after a join: routes that alternate between the two sides through bag vertices."""
    bag = sorted(bag)
    return _closure(A.copy(), bag, r, dist, bag, mod2)


class _Plan:
    """Per-graph data shared by all runs: edge-nice decomposition and d_{G_i} distances."""

    def __init__(self, g, etd):
        self.g = g
        self.etd = etd
        edges = etd.subtree_edges()
        verts = etd.subtree_vertices()
        self.dist = []
        for i, x in enumerate(etd.nodes):
            if x.kind in (INTRODUCE_EDGE, JOIN, FORGET):
                src = x.bag if x.kind != FORGET else etd.nodes[x.children[0]].bag
                self.dist.append(_bfs_many(src, verts[i], edges[i]))
            else:
                self.dist.append(None)


def _bfs_many(sources, vertices, edges):
    adj = {v: [] for v in vertices}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    out = {}
    for s in sources:
        d = {v: UNREACHABLE for v in vertices}
        d[s] = 0
        frontier = [s]
        while frontier:
            nxt = []
            for a in frontier:
                for b in adj[a]:
                    if d[b] is UNREACHABLE:
                        d[b] = d[a] + 1
                        nxt.append(b)
            frontier = nxt
        out[s] = d
    return out


def run_tables(plan, r, k, weights, roots, mod2=True, witness="promise", check_shapes=False,
               stats=None, validity="magnitude"):
    """Run the counting DP for a batch of (weights, root) pairs; returns the root table
    of shape (batch, k+1, 2nk+1).

    ``stats``, if given, collects per node kind [count, seconds, entries per run].
    """
    g = plan.g
    weights = np.asarray(weights)
    roots = np.asarray(roots)
    batch = len(roots)
    live = {}
    for i, x in enumerate(plan.etd.nodes):
        t0 = time.perf_counter()
        if x.kind == LEAF:
            A = cc_leaf(r, k, g.n, batch, mod2)
        elif x.kind == INTRODUCE:
            (c,) = x.children
            A = cc_introduce_vertex(live.pop(c), list(plan.etd.nodes[c].bag), x.vertex, r,
                                    weights, roots, mod2)
        elif x.kind == INTRODUCE_EDGE:
            (c,) = x.children
            A = cc_introduce_edge(live.pop(c), x.bag, x.edge, r, plan.dist[i], mod2, validity)
        elif x.kind == FORGET:
            (c,) = x.children
            A = cc_forget(live.pop(c), plan.etd.nodes[c].bag, x.vertex, r,
                          plan.dist[i][x.vertex], mod2, witness)
        elif x.kind == JOIN:
            j, kk = x.children
            A = cc_join(live.pop(j), live.pop(kk), x.bag, r, weights, mod2)
            A = cc_join_closure(A, x.bag, r, plan.dist[i], mod2)
        else:
            raise ValueError(f"unexpected node kind {x.kind!r}")
        if stats is not None:
            rec = stats.setdefault(x.kind, [0, 0.0, 0])
            rec[0] += 1
            rec[1] += time.perf_counter() - t0
            rec[2] += A.size // batch
        if check_shapes and A.shape != table_shape(r, len(x.bag), k, g.n, batch):
            raise AssertionError(f"node {i}: table shape {A.shape}")
        live[i] = A
    return live.pop(plan.etd.root).reshape(batch, k + 1, 2 * g.n * k + 1)


def make_plan(g, td=None):
    if td is None:
        td = min_fill_decompose(g)
    return _Plan(g, make_edge_nice(td, g))


def decide_rcds_rooted(g, etd_or_plan, r, k, run):
    plan = etd_or_plan if isinstance(etd_or_plan, _Plan) else _Plan(g, etd_or_plan)
    root = run_tables(plan, r, k, [run.weights], [run.root])
    return bool(root[0, k].any())


def _max_batch(r, m, k, n, budget=1 << 25):
    per = (2 * r + 2) ** (m + 1) * (k + 1) * (2 * n * k + 1)
    return max(1, budget // max(per, 1))


def _runs(n, seed, reps, roots):
    return [sample_weights(n, None, seed, rep, root) for rep in range(reps) for root in roots]


def root_parities(g, r, k, seed=DEFAULT_SEED, reps=1, td=None, roots=None, plan=None):
    """Root tables for every (rep, root) run, as a list of (run, table) pairs."""
    plan = plan or make_plan(g, td)
    roots = list(g.vertices()) if roots is None else list(roots)
    runs = _runs(g.n, seed, reps, roots)
    width = plan.etd.width + 1
    step = _max_batch(r, width, k, g.n)
    out = []
    for s in range(0, len(runs), step):
        chunk = runs[s:s + step]
        tabs = run_tables(plan, r, k, [x.weights for x in chunk], [x.root for x in chunk])
        out.extend(zip(chunk, tabs))
    return out


def decide_rcds(g, td, r, k, seed=DEFAULT_SEED, reps=10, roots=None, plan=None):
    """True-biased: True means a connected r-dominating set of size k exists."""
    if reps < 1:
        raise ValueError("reps must be at least 1")
    if r < 1:
        raise ValueError("r must be at least 1")
    if k < 1 or k > g.n:
        return False
    return any(tab[k].any() for _, tab in root_parities(g, r, k, seed, reps, td, roots, plan))


def _upper_bound(g, r):
    """A connected r-dominating set from stripping BFS-tree leaves, or None."""
    from .graph import bfs_distances

    if g.n == 0 or len(components(g)) > 1:
        return None
    best = None
    for s in g.vertices():
        d = bfs_distances(g, s)
        keep = set(g.vertices())
        for _ in range(r):
            leaves = [v for v in keep if v != s
                      and not any(d.parent[w] == v for w in keep if w != v)]
            keep -= set(leaves)
        if is_connected(g, keep) and is_r_dominating(g, keep, r):
            if best is None or len(keep) < len(best):
                best = keep
    return best


def min_rcds(g, td=None, r=1, seed=DEFAULT_SEED, reps=10, plan=None):
    """Smallest k for which decide_rcds says yes, or None if no connected r-DS exists."""
    if g.n == 0 or len(components(g)) > 1:
        return None
    plan = plan or make_plan(g, td)
    ub = _upper_bound(g, r)
    K = len(ub) if ub else g.n
    found = None
    for _, tab in root_parities(g, r, K, seed, reps, plan=plan):
        hits = [k for k in range(1, K + 1) if tab[k].any()]
        if hits and (found is None or hits[0] < found):
            found = hits[0]
    if found is not None:
        return found
    for k in range(K + 1, g.n + 1):
        if decide_rcds(g, None, r, k, seed, reps, plan=plan):
            return k
    return None
