import io
import subprocess
import sys

import pytest

from conftest import cycle, path
from rdomtw.cli import main
from rdomtw.graph import Graph, write_gr
from rdomtw.treedecomp import make_nice, min_fill_decompose


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), buf)
    return code, buf.getvalue()


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return {
        "p5": write("p5.gr", write_gr(path(5))),
        "c6": write("c6.gr", write_gr(cycle(6))),
        "two": write("two.gr", write_gr(Graph(4, [(1, 2), (3, 4)]))),
        "cnf": write("f.cnf", "p cnf 2 1\n1 -2 0\n"),
        "bad": write("bad.gr", "p tw 3\n1 2\n"),
        "dir": tmp_path,
    }


def _body(text):
    return [l for l in text.splitlines() if not l.startswith("#")]


def test_solve_rds_p5(files):
    code, out = run("solve-rds", "--graph", files["p5"], "--r", "2")
    assert code == 0
    assert _body(out) == ["SIZE 1", "S 3"]
    assert out.startswith("# rdomtw ")


def test_solve_rds_tsv(files):
    code, out = run("solve-rds", "--graph", files["p5"], "--r", "2", "--format", "tsv")
    assert _body(out)[0] == "size\t1"


def test_oracle_rcds_c6(files):
    code, out = run("oracle", "rcds", "--graph", files["c6"], "--r", "1")
    assert code == 0 and _body(out)[0] == "SIZE 4"


def test_oracle_rcds_infeasible(files):
    code, out = run("oracle", "rcds", "--graph", files["two"], "--r", "1")
    assert code == 1 and "INFEASIBLE" in out


def test_solve_rcds(files):
    code, out = run("solve-rcds", "--graph", files["c6"], "--r", "1", "--k", "4")
    assert code == 0 and _body(out) == ["YES"]
    code, out = run("solve-rcds", "--graph", files["c6"], "--r", "1", "--k", "2",
                    "--expect-yes")
    assert code == 1 and _body(out) == ["NO"]
    code, out = run("solve-rcds", "--graph", files["c6"], "--r", "1")
    assert code == 0 and _body(out) == ["MINSIZE 4"]
    code, out = run("solve-rcds", "--graph", files["two"], "--r", "1")
    assert code == 1 and _body(out) == ["MINSIZE none"]


def test_gen_sidecar(files):
    out_gr = str(files["dir"] / "g.gr")
    code, _ = run("gen", "--kind", "rds", "--cnf", files["cnf"], "--r", "2", "--p", "1",
                  "--out", out_gr)
    assert code == 0
    meta = dict(l.split("=", 1) for l in open(out_gr + ".meta").read().splitlines())
    assert meta["k_star"] == "12" and meta["kind"] == "rds"
    code, _ = run("gen", "--kind", "rcds", "--cnf", files["cnf"], "--r", "2", "--out", out_gr)
    meta = dict(l.split("=", 1) for l in open(out_gr + ".meta").read().splitlines())
    assert meta["k_star"] == "43" and "root" in meta


def test_gen_random_deterministic():
    a = run("gen", "--kind", "connected", "--n", "9", "--seed", "4")
    b = run("gen", "--kind", "connected", "--n", "9", "--seed", "4")
    assert a == b and a[0] == 0


def test_byte_identical_reports(files):
    argv = ("solve-rcds", "--graph", files["c6"], "--r", "1", "--seed", "11")
    assert run(*argv) == run(*argv)


def test_check_td(files):
    g = cycle(6)
    from rdomtw.treedecomp import write_td, TreeDecomposition

    good = files["dir"] / "good.td"
    good.write_text(write_td(min_fill_decompose(g), g))
    code, out = run("check-td", "--graph", files["c6"], "--td", str(good))
    assert code == 0 and "VALID width 2" in out
    bad = files["dir"] / "bad.td"
    bad.write_text(write_td(TreeDecomposition([{1, 2, 3}, {4, 5, 6}], [(0, 1)]), g))
    code, out = run("check-td", "--graph", files["c6"], "--td", str(bad))
    assert code == 1 and "VIOLATION" in out


def test_bench_entries_match_structure(files):
    code, out = run("bench", "--graph", files["c6"], "--r", "1")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("backend\t")
    g = cycle(6)
    nice = make_nice(min_fill_decompose(g))
    want = {}
    for x in nice.nodes:
        want[x.kind] = want.get(x.kind, 0) + 3 ** len(x.bag)
    got = {l.split("\t")[1]: int(l.split("\t")[4]) for l in lines[2:]}
    assert got == want


def test_usage_errors(files):
    assert run("solve-rds", "--graph", files["p5"])[0] == 2
    assert run("solve-rds", "--graph", files["p5"], "--r", "0")[0] == 2
    assert run("solve-rds", "--graph", files["bad"], "--r", "1")[0] == 2
    assert run("solve-rds", "--graph", "/nonexistent.gr", "--r", "1")[0] == 2
    assert run("gen", "--kind", "rds")[0] == 2
    assert run("frobnicate")[0] == 2


def test_self_test():
    code, out = run("self-test")
    assert code == 0 and out.count("PASS") >= 4 and "FAIL" not in out


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "rdomtw", "solve-rds", "--graph", files["p5"],
                           "--r", "2"], capture_output=True, text=True)
    assert proc.returncode == 0 and "SIZE 1" in proc.stdout
