"""Command-line front end: ``rdomtw <subcommand> ...``.

Exit codes: 0 success, 1 infeasible (or NO under --expect-yes), 2 usage or
input error, 3 internal invariant failure.
"""

import argparse
import random
import sys

from . import __version__, kernels
from .generators import random_connected_graph, random_graph, random_partial_ktree
from .graph import ParseError, is_connected, parse_gr, write_gr
from .oracle import CapExceeded, brute_min_rcds, brute_min_rds
from .rcds import DEFAULT_SEED, decide_rcds, make_plan, min_rcds, run_tables, sample_weights
from .rds import InvariantViolation, RdsConfig, solve_rds
from .reduction import (ContractError, InstanceTooLarge, build_instance_rcds,
                        build_instance_rds, parse_cnf)
from .treedecomp import TDValidationError, min_fill_decompose, parse_td, validate, write_td

EXIT_OK, EXIT_NO, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _read(path):
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _load(args):
    g = parse_gr(_read(args.graph))
    td = parse_td(_read(args.td), g) if getattr(args, "td", None) else min_fill_decompose(g)
    return g, td


def _header(out, args):
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out_stream")}
    out.write(f"# rdomtw {__version__} {args.command} "
              + " ".join(f"{k}={v}" for k, v in flags.items() if k != "command") + "\n")


def _emit(out, fmt, key, value):
    out.write(f"{key}\t{value}\n" if fmt == "tsv" else f"{key.upper()} {value}\n")


def cmd_solve_rds(args, out):
    g, td = _load(args)
    cfg = RdsConfig(validity=args.validity, join_mode=args.join, self_check=args.self_check)
    res = solve_rds(g, td, args.r, cfg)
    _emit(out, args.format, "size", res.size)
    for v in sorted(res.witness):
        _emit(out, args.format, "s", v)
    return EXIT_OK


def cmd_solve_rcds(args, out):
    g, td = _load(args)
    if args.k is None:
        k = min_rcds(g, td, args.r, args.seed, args.reps)
        _emit(out, args.format, "minsize", "none" if k is None else k)
        return EXIT_NO if k is None else EXIT_OK
    yes = decide_rcds(g, td, args.r, args.k, args.seed, args.reps)
    out.write(("YES" if yes else "NO") + "\n")
    return EXIT_NO if (args.expect_yes and not yes) else EXIT_OK


def cmd_oracle(args, out):
    g = parse_gr(_read(args.graph))
    if args.problem == "rds":
        size, D = brute_min_rds(g, args.r, cap=args.cap)
    else:
        res = brute_min_rcds(g, args.r, cap=args.cap)
        if res is None:
            out.write("INFEASIBLE\n")
            return EXIT_NO
        size, D = res
    _emit(out, args.format, "size", size)
    for v in sorted(D):
        _emit(out, args.format, "s", v)
    return EXIT_OK


def cmd_gen(args, out):
    if args.kind in ("rds", "rcds"):
        if not args.cnf:
            raise UsageError("--cnf is required for reduction instances")
        cnf = parse_cnf(_read(args.cnf))
        build = build_instance_rds if args.kind == "rds" else build_instance_rcds
        inst = build(cnf, args.r, args.p, vertex_cap=args.cap)
        g = inst.graph
        meta = {"kind": inst.kind, "k_star": inst.k_star, "r": inst.r, "p": inst.p,
                "n0": cnf.n0, "m": cnf.m, "group_size": inst.group_size, "t": inst.t,
                "copies": inst.copies, "padding": inst.padding, "sets": len(inst.sets),
                "n": g.n, "edges": g.m}
        if inst.root is not None:
            meta["root"] = inst.root
    else:
        rng = random.Random(args.seed)
        if args.kind == "random":
            g = random_graph(args.n, args.density, rng)
        elif args.kind == "connected":
            g = random_connected_graph(args.n, args.density, rng)
        else:
            g, td = random_partial_ktree(args.n, args.width, args.density, rng)
            if args.td_out:
                with open(args.td_out, "w") as fh:
                    fh.write(write_td(td, g))
        meta = {"kind": args.kind, "n": g.n, "edges": g.m, "seed": args.seed}
    text = write_gr(g)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        with open(args.meta or args.out + ".meta", "w") as fh:
            fh.write("".join(f"{k}={v}\n" for k, v in meta.items()))
    else:
        out.write(text)
    for k, v in meta.items():
        out.write(f"# {k}={v}\n") if not args.out else out.write(f"{k}={v}\n")
    return EXIT_OK


def cmd_check_td(args, out):
    g = parse_gr(_read(args.graph))
    text = _read(args.td)
    try:
        td = parse_td(text, g)
    except TDValidationError as e:
        for v in e.violations:
            out.write(f"VIOLATION {v}\n")
        return EXIT_NO
    problems = validate(td, g)
    if problems:
        for v in problems:
            out.write(f"VIOLATION {v}\n")
        return EXIT_NO
    out.write(f"VALID width {td.width}\n")
    return EXIT_OK


def cmd_bench(args, out):
    g, td = _load(args)
    out.write(f"backend\t{kernels.BACKEND}\n")
    out.write("solver\tkind\tnodes\tseconds\tentries\n")
    if args.solver in ("rds", "both"):
        res = solve_rds(g, td, args.r, RdsConfig(join_mode=args.join, witness=False))
        for kind, (cnt, sec, ent) in sorted(res.stats["by_kind"].items()):
            out.write(f"rds\t{kind}\t{cnt}\t{sec:.4f}\t{ent}\n")
    if args.solver in ("rcds", "both"):
        if not is_connected(g, g.vertices()):
            raise UsageError("rcds bench needs a connected graph")
        stats = {}
        run = sample_weights(g.n, args.k, args.seed)
        run_tables(make_plan(g, td), args.r, args.k, [run.weights], [run.root], stats=stats)
        for kind, (cnt, sec, ent) in sorted(stats.items()):
            out.write(f"rcds\t{kind}\t{cnt}\t{sec:.4f}\t{ent}\n")
    return EXIT_OK


def cmd_self_test(args, out):
    from .selftest import run_all

    ok = True
    for name, passed, detail in run_all():
        out.write(f"{'PASS' if passed else 'FAIL'} {name}: {detail}\n")
        ok &= passed
    return EXIT_OK if ok else EXIT_INTERNAL


def _parser():
    ap = argparse.ArgumentParser(prog="rdomtw", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, graph=True, td=True):
        if graph:
            p.add_argument("--graph", required=True, help=".gr file")
        if td:
            p.add_argument("--td", help=".td file (default: min-fill heuristic)")
        p.add_argument("--format", choices=("human", "tsv"), default="human")
        p.add_argument("--threads", type=int, default=1, help="accepted; results do not depend on it")

    p = sub.add_parser("solve-rds", help="minimum r-dominating set via tree decomposition")
    common(p)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--validity", choices=("magnitude", "signed"), default="magnitude")
    p.add_argument("--join", choices=("dense", "fii-sparse"), default="dense")
    p.add_argument("--self-check", action="store_true")
    p.set_defaults(func=cmd_solve_rds)

    p = sub.add_parser("solve-rcds", help="connected r-domination by Cut&Count parity")
    common(p)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--k", type=int, help="decide size k (omit for the minimum)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--expect-yes", action="store_true")
    p.set_defaults(func=cmd_solve_rcds)

    p = sub.add_parser("oracle", help="brute-force optimum (small graphs)")
    p.add_argument("problem", choices=("rds", "rcds"))
    common(p, td=False)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--cap", type=int, default=20)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gen", help="generate reduction or random instances")
    p.add_argument("--kind", choices=("rds", "rcds", "random", "connected", "ktree"), required=True)
    p.add_argument("--cnf")
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--density", type=float, default=0.4)
    p.add_argument("--width", type=int, default=3)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--cap", type=int, default=200_000)
    p.add_argument("--out")
    p.add_argument("--meta", help="sidecar path (default: OUT.meta)")
    p.add_argument("--td-out", help="write the generator's decomposition (ktree only)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("check-td", help="validate a tree decomposition")
    p.add_argument("--graph", required=True)
    p.add_argument("--td", required=True)
    p.set_defaults(func=cmd_check_td)

    p = sub.add_parser("bench", help="per-node-type timing and table entries (TSV)")
    common(p)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--solver", choices=("rds", "rcds", "both"), default="rds")
    p.add_argument("--join", choices=("dense", "fii-sparse"), default="dense")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("self-test", help="reduced differential suite")
    p.set_defaults(func=cmd_self_test)
    return ap


def main(argv=None, out=None):
    out = out or sys.stdout
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    for name in ("r", "reps"):
        if getattr(args, name, 1) is not None and getattr(args, name, 1) < 1:
            sys.stderr.write(f"rdomtw: --{name} must be at least 1\n")
            return EXIT_USAGE
    try:
        if args.command not in ("self-test", "bench", "gen"):
            _header(out, args)
        return args.func(args, out)
    except (UsageError, ParseError, TDValidationError, InstanceTooLarge, CapExceeded,
            ValueError) as e:
        sys.stderr.write(f"rdomtw: {e}\n")
        return EXIT_USAGE
    except (InvariantViolation, ContractError, AssertionError) as e:
        sys.stderr.write(f"rdomtw: internal error: {e}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
