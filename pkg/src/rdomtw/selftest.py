"""Reduced differential checks behind ``rdomtw self-test``."""

import random

import numpy as np

from .generators import random_connected_graph, random_graph
from .oracle import brute_min_rcds, brute_min_rds, is_r_dominating
from .rcds import min_rcds
from .rds import (RdsConfig, forward_transform, inverse_transform, join_table, naive_join,
                  solve_rds)
from .treedecomp import min_fill_decompose


def check_rds(trials=30, seed=1):
    rng = random.Random(seed)
    bad = 0
    for _ in range(trials):
        g = random_graph(rng.randint(1, 8), rng.choice([0.2, 0.4, 0.6]), rng)
        r = rng.randint(1, 3)
        res = solve_rds(g, min_fill_decompose(g), r, RdsConfig(self_check=True))
        opt = brute_min_rds(g, r)[0]
        if res.size != opt or not is_r_dominating(g, res.witness, r):
            bad += 1
    return bad == 0, f"{trials} graphs, {bad} mismatches"


def check_join(trials=50, seed=2):
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(trials):
        r = int(rng.integers(1, 3))
        m = int(rng.integers(0, 3))
        shape = (2 * r + 1,) * m
        a = rng.integers(0, 6, size=shape)
        b = rng.integers(0, 6, size=shape)
        want = naive_join(a, b, r)
        for mode in ("dense", "fii-sparse"):
            if not np.array_equal(join_table(a, b, tuple(range(1, m + 1)), r, mode), want):
                bad += 1
    return bad == 0, f"{trials} table pairs, {bad} mismatches"


def check_transform(trials=100, seed=3):
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(trials):
        r = int(rng.integers(1, 3))
        m = int(rng.integers(0, 4))
        N = rng.integers(0, 50, size=(2 * r + 1,) * m + (3,))
        back = inverse_transform(forward_transform(N, r), r)
        bad += not np.array_equal(back, N) or bool((back < 0).any())
    return bad == 0, f"{trials} tables, {bad} failures"


def check_rcds(trials=10, seed=4):
    rng = random.Random(seed)
    bad = 0
    for _ in range(trials):
        g = random_connected_graph(rng.randint(1, 7), rng.choice([0.3, 0.5]), rng)
        r = rng.randint(1, 2)
        bad += min_rcds(g, r=r, reps=10) != brute_min_rcds(g, r)[0]
    return bad == 0, f"{trials} graphs, {bad} mismatches"


CHECKS = [("rds-exactness", check_rds), ("join-equivalence", check_join),
          ("transform-identity", check_transform), ("rcds-decision", check_rcds)]


def run_all():
    return [(name, *fn()) for name, fn in CHECKS]
