"""Minimum r-dominating set by dynamic programming over a nice tree decomposition.

Tables are numpy arrays of shape ``(2r+1,) * |bag|``.  Axis ``i`` belongs to
the ``i``-th smallest bag vertex and index ``l`` stands for label ``l - r``,
so the C-order flattening is the mixed-radix labeling index with the
smallest vertex most significant.  Label 0 marks a solution vertex, ``+t``
a vertex dominated at distance ``t`` inside the processed subgraph and
``-t`` a vertex that is promised domination at distance ``t`` from outside.
"""

import itertools
import time
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .graph import UNREACHABLE, all_pairs_distances, bfs_distances
from .treedecomp import FORGET, INTRODUCE, JOIN, LEAF, make_nice

INF = 1 << 40
MAX_COUNT_BAG = 25


class InvariantViolation(RuntimeError):
    """A table property that must hold by construction was found broken."""


@dataclass
class RdsConfig:
    validity: str = "magnitude"  # or "signed"
    forget_witness: str = "promise"  # or "literal"
    join_mode: str = "dense"  # or "fii-sparse"
    normalize: bool = True
    self_check: bool = False
    witness: bool = True

    def __post_init__(self):
        if self.validity not in ("magnitude", "signed"):
            raise ValueError(f"unknown validity rule {self.validity!r}")
        if self.forget_witness not in ("literal", "promise"):
            raise ValueError(f"unknown forget witness rule {self.forget_witness!r}")
        if self.join_mode not in ("dense", "fii-sparse"):
            raise ValueError(f"unknown join mode {self.join_mode!r}")


@dataclass
class RdsResult:
    size: int
    witness: set
    stats: dict = field(default_factory=dict)


def _lab(r, m, axis):
    """Label values along ``axis`` broadcastable against a ``(2r+1,)*m`` table."""
    shape = [1] * m
    shape[axis] = 2 * r + 1
    return np.arange(-r, r + 1).reshape(shape)


def _pair_ok(a, b, rule):
    if rule == "signed":
        return np.abs(a - b) <= 1
    return np.abs(np.abs(a) - np.abs(b)) <= 1


def is_locally_valid(c, bag, g, rule="magnitude"):
    """``c`` maps each bag vertex to its label (dict or sequence aligned with sorted bag)."""
    if not isinstance(c, dict):
        c = dict(zip(sorted(bag), c))
    for u, v in g.induced(bag):
        a, b = c[u], c[v]
        if rule == "signed":
            if abs(a - b) > 1:
                return False
        elif abs(abs(a) - abs(b)) > 1:
            return False
    return True


def _validity_mask(bag, g, r, rule):
    m = len(bag)
    pos = {v: i for i, v in enumerate(bag)}
    ok = np.ones((2 * r + 1,) * m, dtype=bool)
    for u, v in g.induced(bag):
        ok &= _pair_ok(_lab(r, m, pos[u]), _lab(r, m, pos[v]), rule)
    return ok


def zero_count(r, m):
    z = np.zeros((2 * r + 1,) * m, dtype=np.int64)
    for i in range(m):
        z = z + (_lab(r, m, i) == 0)
    return z


def leaf_table(bag, g, r, rule="magnitude"):
    bag = sorted(bag)
    m = len(bag)
    if m == 0:
        return np.zeros((), dtype=np.int64)
    pos = {v: i for i, v in enumerate(bag)}
    ok = _validity_mask(bag, g, r, rule)
    for v in bag:
        lv = _lab(r, m, pos[v])
        res = lv <= 0
        for w in g.adj[v]:
            if w in pos:
                res = res | (_lab(r, m, pos[w]) == lv - 1)
        ok = ok & res
    return np.where(ok, zero_count(r, m), INF)


def forget_table(child, child_bag, u, r, dist_u, witness="promise"):
    """``dist_u[v]`` is d_G(u, v) (or ``UNREACHABLE``)."""
    child_bag = sorted(child_bag)
    a = child_bag.index(u)
    bag = [v for v in child_bag if v != u]
    m = len(bag)
    sl = [slice(None)] * child.ndim
    sl[a] = slice(r, 2 * r + 1)
    out = child[tuple(sl)].min(axis=a)
    for di in range(r):
        d = di - r
        mask = np.zeros((2 * r + 1,) * m, dtype=bool)
        for i, v in enumerate(bag):
            dv = dist_u[v]
            if dv is UNREACHABLE:
                continue
            lv = _lab(r, m, i)
            hit = lv == d + dv
            if witness == "promise":
                hit = hit & (lv <= 0)
            mask = mask | hit
        if mask.any():
            out = np.minimum(out, np.where(mask, np.take(child, di, axis=a), INF))
    return out


def _phi_maps(bag, r, d, dist_g, dist_vi):
    """Per-axis index maps flipping +t to -t where u sits on an inside shortest path."""
    maps = []
    for v in bag:
        idx = np.arange(2 * r + 1)
        dg, dv = dist_g[v], dist_vi[v]
        if dg is not UNREACHABLE and dv is not UNREACHABLE and dg == dv:
            t = dg + d
            if 0 < t <= r:
                idx[r + t] = r - t
        maps.append(idx)
    return maps


def _remap(table, maps):
    for axis, idx in enumerate(maps):
        if not np.array_equal(idx, np.arange(len(idx))):
            table = np.take(table, idx, axis=axis)
    return table


def introduce_table(child, child_bag, u, r, g, dist_g, dist_vi, rule="magnitude"):
    """``dist_g[v]`` = d_G(u, v), ``dist_vi[v]`` = d_{G[V_i]}(u, v) for bag vertices v."""
    child_bag = sorted(child_bag)
    bag = sorted(child_bag + [u])
    a = bag.index(u)
    m = len(child_bag)
    nbrs = [i for i, v in enumerate(child_bag) if g.has_edge(u, v)]
    slices = []
    for di in range(2 * r + 1):
        d = di - r
        ok = np.ones((2 * r + 1,) * m, dtype=bool)
        for i in nbrs:
            ok &= _pair_ok(_lab(r, m, i), np.int64(d), rule)
        if d < 0:
            s = child
        else:
            s = _remap(child, _phi_maps(child_bag, r, d, dist_g, dist_vi))
            if d == 0:
                s = np.where(s >= INF, INF, s + 1)
            else:
                res = np.zeros_like(ok)
                for i in nbrs:
                    res |= _lab(r, m, i) == d - 1
                ok &= res
        slices.append(np.where(ok, s, INF))
    return np.stack(slices, axis=a)


# --- join -------------------------------------------------------------------


def _count_bound_check(m, length):
    if m > MAX_COUNT_BAG or length * (1 << (2 * m)) >= (1 << 62):
        raise OverflowError(
            f"join counts may exceed 64 bits (bag {m}, length {length}); refusing")


def indication(A, length):
    """0/1 table N[c][x] = [A[c] == x] for x < length."""
    N = np.zeros(A.shape + (length,), dtype=np.int64)
    fin = A < INF
    idx = np.nonzero(fin)
    N[idx + (A[fin],)] = 1
    return N


def _pm(ndim, axis, r, t):
    hi = [slice(None)] * ndim
    lo = [slice(None)] * ndim
    hi[axis], lo[axis] = slice(r + t, r + t + 1), slice(r - t, r - t + 1)
    return tuple(hi), tuple(lo)


def forward_transform(N, r, inplace=False):
    """Plain to bar labels, position by position; the last axis is x.

    Callers bound the entries beforehand (see ``_count_bound_check``), so the
    running sums cannot wrap.
    """
    if not inplace:
        N = N.copy()
    for axis in range(N.ndim - 1):
        for t in range(1, r + 1):
            hi, lo = _pm(N.ndim, axis, r, t)
            N[hi] += N[lo]
    return N


def inverse_transform(Nb, r, check=True, inplace=False):
    N = Nb if inplace else Nb.copy()
    for axis in reversed(range(N.ndim - 1)):
        for t in range(1, r + 1):
            hi, lo = _pm(N.ndim, axis, r, t)
            N[hi] -= N[lo]
    if check and (N < 0).any():
        raise InvariantViolation("negative entry after inverse transform")
    return N


def _convolve_raw(Nj, Nk):
    """Per-labeling convolution indexed by x_j + x_k (no zero shift)."""
    shape = Nj.shape[:-1]
    rows = int(np.prod(shape, dtype=np.int64))
    out = kernels.conv_rows(Nj.reshape(rows, -1), Nk.reshape(rows, -1))
    return out.reshape(shape + (out.shape[-1],))


def convolve_join(Nbj, Nbk, r):
    """Bar tables of a join: x = x_j + x_k - #0, output length 2L - 1."""
    if Nbj.shape != Nbk.shape:
        raise ValueError("join children have different table shapes")
    m = Nbj.ndim - 1
    raw = _convolve_raw(Nbj, Nbk)
    z = zero_count(r, m)
    out = np.zeros_like(raw)
    for zz in range(m + 1):
        sel = z == zz
        if not sel.any():
            continue
        if raw[sel][:, :zz].any():
            raise ValueError("child tables have values below their zero count")
        out[sel, : raw.shape[-1] - zz] = raw[sel][:, zz:]
    return out


def _extract_min(N, offset):
    """min over x with N[..., x] > 0, plus ``offset``; INF where none."""
    pos = N > 0
    has = pos.any(axis=-1)
    first = pos.argmax(axis=-1)
    return np.where(has, first + offset, INF)


def _join_dense(Aj, Ak, r):
    m = Aj.ndim
    finite = np.concatenate([Aj[Aj < INF], Ak[Ak < INF]])
    if finite.size == 0:
        return np.full(Aj.shape, INF, dtype=np.int64), 0
    L = int(finite.max()) + 1
    _count_bound_check(m, 2 * L)
    Nj = forward_transform(indication(Aj, L), r, inplace=True)
    Nk = forward_transform(indication(Ak, L), r, inplace=True)
    N = inverse_transform(_convolve_raw(Nj, Nk), r, inplace=True)
    out = _extract_min(N, -zero_count(r, m))
    return out, N.size


def _class_floor(A, r):
    """Minimum over each class of labelings sharing every label magnitude, broadcast back."""
    m = A.ndim
    lo = A
    for axis in range(m):
        neg = np.take(lo, np.arange(r, -1, -1), axis=axis)  # labels 0, -1, ..., -r
        pos = np.take(lo, np.arange(r, 2 * r + 1), axis=axis)  # labels 0, 1, ..., r
        lo = np.minimum(neg, pos)
    back = np.abs(np.arange(-r, r + 1))
    for axis in range(m):
        lo = np.take(lo, back, axis=axis)
    return lo


def _join_fii(Aj, Ak, r):
    m = Aj.ndim
    lo_j, lo_k = _class_floor(Aj, r), _class_floor(Ak, r)
    fin_j, fin_k = Aj < INF, Ak < INF
    if not fin_j.any() or not fin_k.any():
        return np.full(Aj.shape, INF, dtype=np.int64), 0
    Wj = int((Aj - lo_j)[fin_j].max()) + 1
    Wk = int((Ak - lo_k)[fin_k].max()) + 1
    W = max(Wj, Wk)
    _count_bound_check(m, 2 * W)
    Nj = forward_transform(indication(np.where(fin_j, Aj - lo_j, INF), W), r, inplace=True)
    Nk = forward_transform(indication(np.where(fin_k, Ak - lo_k, INF), W), r, inplace=True)
    N = inverse_transform(_convolve_raw(Nj, Nk), r, inplace=True)
    both = (lo_j < INF) & (lo_k < INF)
    off = np.where(both, lo_j + lo_k - zero_count(r, m), 0)
    out = _extract_min(N, off)
    out[~both] = INF
    return out, N.size


def join_table(Aj, Ak, bag, r, mode="dense"):
    """Combine the tables of two children with identical bags."""
    if Aj.shape != Ak.shape or Aj.ndim != len(bag):
        raise ValueError("join children must have tables over the same bag")
    if Aj.ndim == 0:
        v = Aj + Ak if Aj < INF and Ak < INF else INF
        return np.asarray(v, dtype=np.int64)
    if mode == "dense":
        out, _ = _join_dense(Aj, Ak, r)
    elif mode == "fii-sparse":
        out, _ = _join_fii(Aj, Ak, r)
    else:
        raise ValueError(f"unknown join mode {mode!r}")
    return out


def consistent_child_labels(label):
    """Child label pairs a join combines into ``label``."""
    if label <= 0:
        return [(label, label)]
    return [(label, -label), (-label, label), (label, label)]


def naive_join(Aj, Ak, r):
    """Direct minimisation over consistent child labelings (small bags only)."""
    m = Aj.ndim
    out = np.full(Aj.shape, INF, dtype=np.int64)
    for c in itertools.product(range(-r, r + 1), repeat=m):
        z = sum(1 for x in c if x == 0)
        best = INF
        for pairs in itertools.product(*(consistent_child_labels(x) for x in c)):
            cj = tuple(p[0] + r for p in pairs)
            ck = tuple(p[1] + r for p in pairs)
            if Aj[cj] < INF and Ak[ck] < INF:
                best = min(best, int(Aj[cj] + Ak[ck] - z))
        out[tuple(x + r for x in c)] = best
    return out


def promise_normalize(A, r, axes=None, inplace=False):
    """Let every promise -t also take partial solutions that already certify +t.

    Turning a certified vertex into a promised one only adds obligations, so
    this is sound, and afterwards A[c'] <= A[c] whenever c' comes from c by
    flipping positive labels.  Forget and join nodes keep this property, so
    the solver only has to repair the axes an introduce node can break.
    """
    if not inplace:
        A = A.copy()
    for axis in range(A.ndim) if axes is None else axes:
        for t in range(1, r + 1):
            hi = [slice(None)] * A.ndim
            lo = [slice(None)] * A.ndim
            hi[axis], lo[axis] = slice(r + t, r + t + 1), slice(r - t, r - t + 1)
            lo, hi = tuple(lo), tuple(hi)
            np.minimum(A[lo], A[hi], out=A[lo])
    return A


def ordering_violations(A, r):
    """Count single-position flips +t -> -t that increase the value."""
    bad = 0
    for axis in range(A.ndim):
        for t in range(1, r + 1):
            plus = np.take(A, r + t, axis=axis)
            minus = np.take(A, r - t, axis=axis)
            bad += int((minus > plus).sum())
    return bad


# --- driver -----------------------------------------------------------------


class _Stored:
    """A compressed-then-restored table; indexing converts the cap back to INF."""

    __slots__ = ("arr", "cap")

    def __init__(self, arr, cap):
        self.arr = arr
        self.cap = cap

    def __getitem__(self, key):
        v = np.asarray(self.arr[key])
        return np.where(v == self.cap, INF, v.astype(np.int64))


class _Store:
    """Compressed copies of the raw node tables, for witness reconstruction."""

    def __init__(self, n):
        self.dtype = np.uint8 if n < 255 else np.uint16 if n < 65535 else np.uint32
        self.cap = np.iinfo(self.dtype).max
        self.data = {}

    def put(self, key, A):
        arr = np.minimum(A, self.cap).astype(self.dtype)
        self.data[key] = (A.shape, zlib.compress(arr.tobytes(), 1))

    def get(self, key):
        shape, blob = self.data[key]
        arr = np.frombuffer(zlib.decompress(blob), dtype=self.dtype).reshape(shape)
        return _Stored(arr, self.cap)


class _Context:
    def __init__(self, g, nice):
        self.g = g
        self.nice = nice
        self.vi = nice.subtree_vertices()
        self.dg = all_pairs_distances(g)

    def dist_vi_from(self, i, u):
        return bfs_distances(self.g, u, self.vi[i]).dist



def solve_rds(g, td, r, config=None, nice=None):
    """Minimum r-dominating set size and an optimal witness set."""
    if r < 1:
        raise ValueError("r must be at least 1")
    config = config or RdsConfig()
    if nice is None:
        nice = make_nice(td, g)
    ctx = _Context(g, nice)
    g = ctx.g
    store = _Store(g.n) if config.witness else None
    stats = {"nodes": len(nice.nodes), "ordering_violations": 0, "table_sizes": [],
             "join_touched": [], "by_kind": {}}
    live = {}
    for i, x in enumerate(nice.nodes):
        t0 = time.perf_counter()
        A = _node_table(i, x, live, nice, ctx, r, config, stats)
        kind = stats["by_kind"].setdefault(x.kind, [0, 0.0, 0])
        kind[0] += 1
        kind[1] += time.perf_counter() - t0
        kind[2] += A.size
        expected = (2 * r + 1) ** len(x.bag)
        if A.size != expected:
            raise InvariantViolation(f"node {i}: table has {A.size} entries, expected {expected}")
        stats["table_sizes"].append((len(x.bag), A.size))
        if store is not None:
            store.put(i, A)
        if config.normalize and x.kind in (LEAF, INTRODUCE):
            A = promise_normalize(A, r, _repair_axes(x, g), inplace=True)
        if config.self_check:
            bad = ordering_violations(A, r)
            stats["ordering_violations"] += bad
            if bad:
                raise InvariantViolation(f"node {i} ({x.kind}): {bad} ordering violations")
        live[i] = A
    root = live.pop(nice.root)
    size = int(root[()])
    if size >= INF:
        raise InvariantViolation("root table has no finite entry")
    witness = set()
    if store is not None:
        witness = reconstruct_witness(store, nice, g, r, config, ctx)
        from .oracle import is_r_dominating

        if len(witness) != size or not is_r_dominating(g, witness, r):
            raise InvariantViolation(
                f"reconstructed witness {sorted(witness)} does not certify size {size}")
    return RdsResult(size, witness, stats)


def _repair_axes(x, g):
    if x.kind == LEAF:
        return None
    return [i for i, v in enumerate(x.bag) if v == x.vertex or g.has_edge(v, x.vertex)]


def _node_table(i, x, live, nice, ctx, r, config, stats):
    g = ctx.g
    if x.kind == LEAF:
        return leaf_table(x.bag, g, r, config.validity)
    if x.kind == FORGET:
        (c,) = x.children
        return forget_table(live.pop(c), nice.nodes[c].bag, x.vertex, r,
                            ctx.dg[x.vertex], config.forget_witness)
    if x.kind == INTRODUCE:
        (c,) = x.children
        return introduce_table(live.pop(c), list(nice.nodes[c].bag), x.vertex, r, g,
                               ctx.dg[x.vertex], ctx.dist_vi_from(i, x.vertex),
                               config.validity)
    if x.kind == JOIN:
        j, k = x.children
        Aj, Ak = live.pop(j), live.pop(k)
        if Aj.ndim == 0:
            return join_table(Aj, Ak, x.bag, r)
        if config.join_mode == "dense":
            A, touched = _join_dense(Aj, Ak, r)
        else:
            A, touched = _join_fii(Aj, Ak, r)
        stats["join_touched"].append((len(x.bag), A.size, touched))
        return A
    raise ValueError(f"unexpected node kind {x.kind!r}")


def _norm_box(raw, c, r):
    """Normalized values on the box spanned by flipping each nonzero label of ``c``.

    Axis ``a`` of the box has entries ``[-t, +t]`` when ``|c[a]| = t > 0`` and the
    single entry ``c[a]`` when it is 0.
    """
    opts = [[l] if l == r else [min(l, 2 * r - l), max(l, 2 * r - l)] for l in c]
    box = np.array(raw[np.ix_(*opts)] if opts else raw[()], dtype=np.int64)
    for a, o in enumerate(opts):
        if len(o) == 2:
            neg = [slice(None)] * len(opts)
            pos = [slice(None)] * len(opts)
            neg[a], pos[a] = slice(0, 1), slice(1, 2)
            np.minimum(box[tuple(neg)], box[tuple(pos)], out=box[tuple(neg)])
    return box, opts


def _norm_value(raw, c, r):
    box, opts = _norm_box(raw, c, r)
    return int(box[tuple(o.index(l) for o, l in zip(opts, c))])


def reconstruct_witness(store, nice, g, r, config, ctx):
    """Walk the stored tables top-down, taking the first optimal choice everywhere.

    Ties go to the smallest child labeling index; at joins the left child's
    labeling is minimised first.  Stored tables are the raw rule outputs; a
    value the parent saw after normalization is first traced back to the raw
    entry that produced it.
    """
    witness = set()
    stack = [(nice.root, ())]
    while stack:
        i, c = stack.pop()
        x = nice.nodes[i]
        raw = store.get(i)
        if config.normalize:
            c = _lift(raw, c, r)
        val = int(raw[c])
        if x.kind == LEAF:
            witness.update(v for v, l in zip(x.bag, c) if l == r)
        elif x.kind == FORGET:
            (ch,) = x.children
            a = nice.nodes[ch].bag.index(x.vertex)
            Ac = store.get(ch)
            dist_u = ctx.dg[x.vertex]
            for di in range(2 * r + 1):
                d = di - r
                cc = c[:a] + (di,) + c[a:]
                got = _norm_value(Ac, cc, r) if config.normalize else int(Ac[cc])
                if got != val:
                    continue
                if d < 0 and not any(
                        dist_u[v] is not UNREACHABLE and l - r == d + dist_u[v]
                        and (config.forget_witness == "literal" or l <= r)
                        for v, l in zip(x.bag, c)):
                    continue
                stack.append((ch, cc))
                break
            else:
                raise InvariantViolation(f"forget node {i}: no child entry explains {val}")
        elif x.kind == INTRODUCE:
            (ch,) = x.children
            a = x.bag.index(x.vertex)
            d = c[a] - r
            cj = c[:a] + c[a + 1:]
            if d >= 0:
                maps = _phi_maps(list(nice.nodes[ch].bag), r, d, ctx.dg[x.vertex],
                                 ctx.dist_vi_from(i, x.vertex))
                cj = tuple(int(mp[l]) for mp, l in zip(maps, cj))
            if d == 0:
                witness.add(x.vertex)
            stack.append((ch, cj))
        elif x.kind == JOIN:
            j, k = x.children
            pair = _join_choice(store.get(j), store.get(k), c, r, val, config.normalize)
            if pair is None:
                raise InvariantViolation(f"join node {i}: no child pair explains {val}")
            stack.append((k, pair[1]))
            stack.append((j, pair[0]))
    return witness


def _join_choice(Aj, Ak, c, r, val, normalize):
    if normalize:
        Bj, opts = _norm_box(Aj, c, r)
        Bk, _ = _norm_box(Ak, c, r)
    else:
        opts = [[l] if l == r else [min(l, 2 * r - l), max(l, 2 * r - l)] for l in c]
        Bj, Bk = Aj[np.ix_(*opts)], Ak[np.ix_(*opts)]
    z = sum(1 for l in c if l == r)
    # positions: 0 -> only the zero; negative -> both children negative;
    # positive -> left takes -t or +t, right must be +t whenever left is -t
    left_opts = [[0] if l <= r else [0, 1] for l in c]
    for lj in itertools.product(*left_opts):
        right_opts = [[0] if l <= r else ([1] if b == 0 else [0, 1])
                      for l, b in zip(c, lj)]
        vj = Bj[lj]
        if vj >= INF:
            continue
        for lk in itertools.product(*right_opts):
            vk = Bk[lk]
            if vk < INF and int(vj + vk) - z == val:
                cj = tuple(o[b] for o, b in zip(opts, lj))
                ck = tuple(o[b] for o, b in zip(opts, lk))
                return cj, ck
    return None


def _lift(raw, c, r):
    """Raise promises back to certificates until the raw table explains the value.

    Picks the smallest labeling index among the optimal raw entries above ``c``.
    """
    box, opts = _norm_box(raw, c, r)
    val = int(box[tuple(o.index(l) for o, l in zip(opts, c))])
    sub = raw[np.ix_(*[o if l < r else [l] for o, l in zip(opts, c)])] if c else raw[()]
    flat = int(np.argmax(sub.ravel() == val))
    if sub.ravel()[flat] != val:
        raise InvariantViolation("normalized value cannot be traced to a raw entry")
    idx = np.unravel_index(flat, sub.shape)
    return tuple(o[j] if l < r else l for o, l, j in zip(opts, c, idx))
