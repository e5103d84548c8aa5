"""Small hand-built graphs used by tests, scripts and the bundled data files."""

from __future__ import annotations

import math
from fractions import Fraction

from .factor_graph import FactorGraph, assignments, build

# Variable names of the 12-variable demo graph, in index order.
NAMES = ("i", "j", "k", "e", "m", "o", "r", "s", "t", "u", "v", "w")

# Factor name -> scope (by variable name).
SCOPES = {
    "I": "ijk",
    "J": "im",
    "K": "kvw",
    "L": "iw",
    "O": "mo",
    "T": "rs",
    "U": "tu",
    "V": "jt",
    "W": "jer",
    "X": "ms",
    "Y": "et",
    "Z": "ov",
}


def count_nonzero_graph() -> FactorGraph:
    """12 binary variables; each factor counts the non-zero variables in its scope."""
    idx = {n: k for k, n in enumerate(NAMES)}
    factors = []
    for scope in SCOPES.values():
        vs = [idx[c] for c in scope]
        table = [Fraction(sum(st)) for st in assignments([2] * len(vs))]
        factors.append((vs, table))
    return build([2] * len(NAMES), factors)


def factor_names() -> list[str]:
    """Factor names in the order the factors appear in ``count_nonzero_graph``."""
    return list(SCOPES)


def region_tree(seed_table=(1, 2, 3, 4)) -> tuple[FactorGraph, dict[str, int]]:
    """Tree with a three-variable factor I = {i, j, k} at its centre and a
    seven-factor branch hanging off j through W = {j, e, r}.

    Returns the graph and a name -> variable index map.
    """
    names = ["i", "j", "k", "w", "a", "b", "e", "r", "c", "d", "g", "h", "l", "n", "p"]
    idx = {n: k for k, n in enumerate(names)}
    scopes = [
        "ijk", "iw", "ka", "jb", "jer", "ec", "ed", "rg", "rh", "gl", "hn", "ap",
    ]
    factors = []
    for k, sc in enumerate(scopes):
        vs = [idx[c] for c in sc]
        size = 2 ** len(vs)
        table = [Fraction(seed_table[(k + t) % len(seed_table)] + (t % 3)) for t in range(size)]
        factors.append((vs, table))
    return build([2] * len(names), factors), idx
