"""Exact r-domination solvers over tree decompositions."""

__version__ = "0.1.0"

from .graph import Graph, ParseError, bfs_distances, is_connected, parse_gr, write_gr
from .rcds import decide_rcds, min_rcds
from .rds import RdsConfig, solve_rds
from .treedecomp import (TreeDecomposition, make_edge_nice, make_nice, min_fill_decompose,
                         parse_td, validate, write_td)

__all__ = [
    "Graph", "ParseError", "RdsConfig", "TreeDecomposition", "bfs_distances", "decide_rcds",
    "is_connected", "make_edge_nice", "make_nice", "min_fill_decompose", "min_rcds",
    "parse_gr", "parse_td", "solve_rds", "validate", "write_gr", "write_td",
]
