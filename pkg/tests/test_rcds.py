import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import complete, cycle, path
from rdomtw.generators import random_connected_graph, random_graph
from rdomtw.graph import Graph, components
from rdomtw.oracle import (brute_count_cuts_kW, brute_min_rcds, count_consistent_cuts,
                           is_connected, is_r_dominating, subsets_by_size)
from rdomtw.rcds import (cc_forget, cc_introduce_edge, cc_introduce_vertex, cc_join,
                         cc_leaf, decide_rcds, decide_rcds_rooted, digit_labels, digit_of,
                         make_plan, min_rcds, naive_cc_join, run_tables, sample_weights,
                         table_shape)
from rdomtw.treedecomp import make_edge_nice, min_fill_decompose


def test_digits():
    assert digit_labels(2).tolist() == [-2, -1, 0, 0, 1, 2]
    assert [digit_of(x, 2) for x in (-2, -1, "0_1", "0_2", 1, 2)] == list(range(6))
    with pytest.raises(ValueError):
        digit_of(0, 2)


def test_weights_range_and_determinism():
    run = sample_weights(4, seed=7)
    assert all(1 <= w <= 8 for w in run.weights[1:]) and run.n == 4
    assert sample_weights(4, seed=7).weights == run.weights
    with pytest.raises(ValueError):
        sample_weights(0)


def test_isolation_failure_rate():
    n = 6
    family = list(itertools.combinations(range(1, n + 1), 3))
    fails = 0
    for seed in range(1000):
        w = sample_weights(n, seed=seed).weights
        totals = sorted(sum(w[v] for v in s) for s in family)
        fails += totals[0] == totals[1]
    assert fails / 1000 <= 0.5 + 0.05


def test_leaf():
    A = cc_leaf(1, 2, 3)
    assert A.shape == table_shape(1, 0, 2, 3)
    assert A[0, 0, 0] == 1 and A[0, 1, 0] == 0 and A[0, 0, 5] == 0 and A.sum() == 1


def _single(r=1, k=1, n=1, root=1, w=1):
    weights = np.array([[0, w] + [1] * (n - 1)])
    return cc_introduce_vertex(cc_leaf(r, k, n), [], 1, r, weights, [root])


def test_introduce_root_never_zero2():
    A = _single(root=1)
    assert not A[0, 2].any()          # 0_2 digit for r=1
    assert A[0, 1, 1, 1] == 1         # 0_1 at t=1, W=1


def test_introduce_positive_is_zero():
    A = _single(root=2, n=2)
    assert not A[0, 3].any()
    assert A[0, 2, 1, 1] == 1 and A[0, 0, 0, 0] == 1


def test_single_vertex_parity():
    g = Graph(1)
    run = sample_weights(1, seed=3)
    tab = run_tables(make_plan(g), 1, 1, [run.weights], [1])[0]
    assert tab[1, run.weights[1]] == 1 and tab.sum() == 1


EDGE_DIST = {1: {1: 0, 2: 1}, 2: {1: 1, 2: 0}}


def _edge_table(r, entries, k=2, n=2):
    A = np.zeros(table_shape(r, 2, k, n), dtype=np.uint8)
    for (du, dv) in entries:
        A[0, du, dv, 0, 0] = 1
    return A


def test_edge_inconsistent_cut():
    r = 2
    A = _edge_table(r, [(r, r + 1), (r + 1, r)])
    assert not cc_introduce_edge(A, [1, 2], (1, 2), r, EDGE_DIST).any()


def test_edge_sign_conflict():
    r = 1
    du, dv = digit_of(1, r), digit_of(-1, r)
    A = _edge_table(r, [(du, dv)])
    assert not cc_introduce_edge(A, [1, 2], (1, 2), r, EDGE_DIST, validity="signed").any()
    # with the magnitude rule the pair survives as a genuine labeling
    B = cc_introduce_edge(A, [1, 2], (1, 2), r, EDGE_DIST)
    assert B[0, du, dv, 0, 0] == 1


def test_edge_resolution_moves_count():
    r = 2
    A = _edge_table(r, [(digit_of(-1, r), digit_of("0_1", r))])
    B = cc_introduce_edge(A, [1, 2], (1, 2), r, EDGE_DIST)
    assert B[0, digit_of(1, r), r, 0, 0] == 1
    assert B[0, digit_of(-1, r), r, 0, 0] == 0
    # magnitude two next to a zero is not a valid labeling
    C = cc_introduce_edge(_edge_table(r, [(digit_of(2, r), r)]), [1, 2], (1, 2), r, EDGE_DIST)
    assert not C.any()


def test_forget_zero_copies():
    r, k = 1, 2
    A = np.zeros(table_shape(r, 1, k, 1), dtype=np.uint8)
    A[0, r, 1, 1] = 1
    out = cc_forget(A, [1], 1, r, {1: 0})
    assert out.shape == (1, k + 1, 2 * k + 1)
    assert out[0, 1, 1] == 1 and out.sum() == 1


def test_forget_negative_without_witness():
    r = 1
    A = np.zeros(table_shape(r, 1, 1, 1), dtype=np.uint8)
    A[0, 0] = 1
    assert not cc_forget(A, [1], 1, r, {1: 0}).any()


def test_path3_parity():
    g = path(3)
    for root in (1, 2, 3):
        run = sample_weights(3, seed=root)
        tab = run_tables(make_plan(g), 1, 3, [run.weights], [root])[0]
        for k in range(4):
            for W in range(tab.shape[1]):
                assert tab[k, W] == brute_count_cuts_kW(g, 1, k, W, run.weights, root) % 2


def _rand_tables(rng, r, m, k, n, weights, exact):
    """Random tables with no count below the size and weight of their zero-labelled vertices."""
    shape = table_shape(r, m, k, n, 2)
    A = rng.integers(0, 3 if exact else 2, size=shape)
    for b in range(2):
        for c in itertools.product(range(2 * r + 2), repeat=m):
            zs = [i + 1 for i, d in enumerate(c) if d in (r, r + 1)]
            A[(b,) + c][: len(zs)] = 0
            A[(b,) + c][:, : sum(weights[b][v] for v in zs)] = 0
    return A if exact else A.astype(np.uint8)


@pytest.mark.parametrize("m", [0, 1, 2])
@pytest.mark.parametrize("exact", [False, True])
def test_join_matches_direct(m, exact):
    rng = np.random.default_rng(m + 10 * exact)
    r, k, n = 1, 2, 3
    weights = np.array([[0, 1, 2, 3], [0, 2, 1, 1]])
    bag = list(range(1, m + 1))
    a = _rand_tables(rng, r, m, k, n, weights, exact)
    b = _rand_tables(rng, r, m, k, n, weights, exact)
    got = cc_join(a, b, bag, r, weights, mod2=not exact)
    assert np.array_equal(got, naive_cc_join(a, b, bag, r, weights, mod2=not exact))
    assert not cc_join(np.zeros_like(a), b, bag, r, weights, not exact).any()


def test_join_zero_vertex_shift():
    r, k, n = 1, 2, 1
    A = np.zeros(table_shape(r, 1, k, n), dtype=np.uint8)
    A[0, r, 1, 3] = 1
    out = cc_join(A, A.copy(), [1], r, np.array([[0, 3]]))
    assert out[0, r, 1, 3] == 1 and out.sum() == 1


def test_join_bag_mismatch():
    with pytest.raises(ValueError):
        cc_join(np.zeros((1, 4, 2, 3)), np.zeros((1, 4, 4, 2, 3)), [1], 1, np.zeros((1, 2)))


def _brute_subcuts(g, r, k, w, root):
    tab = np.zeros((k + 1, 2 * g.n * k + 1), dtype=np.int64)
    for s in subsets_by_size(g.n, range(1, k + 1)):
        if not is_r_dominating(g, s, r):
            continue
        cnt = count_consistent_cuts(g, s, root) if root in s else 2 ** len(components(g, s))
        tab[len(s), sum(w[v] for v in s)] += cnt
    return tab


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.sampled_from([0.3, 0.5, 0.7]), st.integers(1, 2),
       st.integers(0, 10**6))
def test_exact_counts_match_enumeration(n, p, r, seed):
    rng = random.Random(seed)
    g = random_graph(n, p, rng)
    root = rng.randint(1, n)
    run = sample_weights(n, seed=seed, root=root)
    plan = make_plan(g)
    exact = run_tables(plan, r, n, [run.weights], [root], mod2=False, check_shapes=True)[0]
    assert np.array_equal(exact, _brute_subcuts(g, r, n, run.weights, root))
    par = run_tables(plan, r, n, [run.weights], [root])[0]
    assert np.array_equal(par, exact % 2)
    for k in range(n + 1):
        for W in np.flatnonzero(par[k]):
            assert brute_count_cuts_kW(g, r, k, W, run.weights, root) % 2 == 1


def test_rooted_examples():
    g = Graph(1)
    etd = make_edge_nice(min_fill_decompose(g), g)
    assert decide_rcds_rooted(g, etd, 1, 1, sample_weights(1))
    p5 = path(5)
    etd = make_edge_nice(min_fill_decompose(p5), p5)
    assert not any(decide_rcds_rooted(p5, etd, 1, 1, sample_weights(5, seed=s, root=v))
                   for s in range(5) for v in range(1, 6))
    hits = sum(decide_rcds_rooted(p5, etd, 1, 3, sample_weights(5, seed=s, root=3))
               for s in range(40))
    assert hits >= 20 * 0.6


def test_decide_examples():
    c6 = cycle(6)
    td = min_fill_decompose(c6)
    assert decide_rcds(c6, td, 1, 4, reps=10)
    assert not decide_rcds(c6, td, 1, 1, reps=10)
    two = Graph(4, [(1, 2), (3, 4)])
    assert not any(decide_rcds(two, None, 1, k) for k in range(1, 5))
    with pytest.raises(ValueError):
        decide_rcds(c6, td, 1, 2, reps=0)


@pytest.mark.parametrize("g,r,want", [
    (path(5), 1, 3), (complete(4), 1, 1), (Graph(4, [(1, 2), (3, 4)]), 1, None),
    (cycle(6), 1, 4), (path(7), 2, 3),
])
def test_min_examples(g, r, want):
    assert min_rcds(g, r=r) == want


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.sampled_from([0.25, 0.4, 0.6]), st.integers(1, 2),
       st.integers(0, 10**6))
def test_no_false_positives_and_monotone(n, p, r, seed):
    g = random_graph(n, p, random.Random(seed))
    plan = make_plan(g)
    bf = brute_min_rcds(g, r)
    truth = [decide_rcds(g, None, r, k, seed=seed, reps=3, plan=plan) for k in range(1, n + 1)]
    for k, yes in enumerate(truth, 1):
        if yes:
            assert bf is not None and bf[0] <= k
    if bf is not None:
        first = truth.index(True) if True in truth else None
        if first is not None:
            assert all(truth[first:])


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 8), st.integers(1, 2), st.integers(0, 10**6))
def test_min_matches_brute_connected(n, r, seed):
    g = random_connected_graph(n, 0.35, random.Random(seed))
    size, wit = brute_min_rcds(g, r)
    assert is_connected(g, wit)
    assert min_rcds(g, r=r, seed=seed) == size
