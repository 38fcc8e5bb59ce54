"""Compiled kernels against the numpy fallback, plus one end-to-end solve with each.

    python3 benchmarks/bench_kernels.py [--repeat N]

Prints a TSV row per (kernel, shape): numpy seconds, compiled seconds, speedup.
The end-to-end rows run the solvers in a subprocess with RDOMTW_PURE=1 so the
fallback is selected at import.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from rdomtw import kernels

END_TO_END = r"""
import random, time
from rdomtw.generators import random_partial_ktree
from rdomtw.rcds import make_plan, run_tables, sample_weights
from rdomtw.rds import RdsConfig, solve_rds
g, td = random_partial_ktree(120, 6, 0.6, random.Random(1))
t = time.perf_counter(); solve_rds(g, td, 2, RdsConfig(witness=False)); a = time.perf_counter() - t
h, htd = random_partial_ktree(30, 3, 0.6, random.Random(2))
run = sample_weights(h.n, seed=1)
t = time.perf_counter(); run_tables(make_plan(h, htd), 1, 8, [run.weights], [1]); b = time.perf_counter() - t
print(a, b)
"""


def _time(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_rows(repeat):
    rng = np.random.default_rng(0)
    if kernels.BACKEND != "cython":
        sys.exit("compiled kernels are not available; build with pip install -e .")
    import rdomtw._kernels as ck

    for rows, la in ((625, 200), (15625, 60), (3125, 800)):
        a = rng.integers(0, 50, size=(rows, la))
        b = rng.integers(0, 50, size=(rows, la))
        assert np.array_equal(kernels.conv_rows_numpy(a, b), ck.conv_rows(a, b))
        tn = _time(lambda: kernels.conv_rows_numpy(a, b), repeat)
        tc = _time(lambda: ck.conv_rows(a, b), repeat)
        yield "conv_rows", f"{rows}x{la}", tn, tc
    for rows, T, W in ((256, 8, 129), (1296, 6, 97), (64, 12, 385)):
        a = (rng.random((rows, T, W)) < 0.3).astype(np.uint8)
        b = (rng.random((rows, T, W)) < 0.3).astype(np.uint8)
        assert np.array_equal(kernels.conv2_mod2_numpy(a, b), ck.conv2_mod2(a, b))
        tn = _time(lambda: kernels.conv2_mod2_numpy(a, b), repeat)
        tc = _time(lambda: ck.conv2_mod2(a, b), repeat)
        yield "conv2_mod2", f"{rows}x{T}x{W}", tn, tc


def end_to_end():
    times = {}
    for label, pure in (("numpy", "1"), ("cython", "")):
        env = dict(os.environ, RDOMTW_PURE=pure)
        if not pure:
            env.pop("RDOMTW_PURE")
        out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, check=True,
                             capture_output=True, text=True).stdout.split()
        times[label] = [float(x) for x in out]
    yield "solve_rds", "n=120 w=6 r=2", times["numpy"][0], times["cython"][0]
    yield "run_tables", "n=30 w=3 r=1 k=8", times["numpy"][1], times["cython"][1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print("kernel\tshape\tnumpy_s\tcython_s\tspeedup")
    for name, shape, tn, tc in list(kernel_rows(args.repeat)) + list(end_to_end()):
        print(f"{name}\t{shape}\t{tn:.4f}\t{tc:.4f}\t{tn / tc:.1f}x", flush=True)


if __name__ == "__main__":
    main()
