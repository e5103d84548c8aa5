"""Text formats: the line-oriented factor-graph file and DIMACS CNF."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

from .algebra import format_value, parse_value, registry_lookup
from .errors import GraphError, HeaderMismatchWarning, ParseError, ValueParseError
from .factor_graph import FactorGraph, build
from .oracle import Lit

# FG 1
# SEMIRING <name>
# VARS <N>
# DOM <d_0> ... <d_{N-1}>
# FACTORS <K>
# then per factor:
# SCOPE <k> <i_1> ... <i_k>
# TABLE <v_1> ... <v_m>


@dataclass
class FactorGraphFile:
    graph: FactorGraph
    semiring: str | None


class _Lines:
    def __init__(self, text: str):
        self.rows = []
        for n, line in enumerate(text.splitlines(), start=1):
            stripped = line.split("#", 1)[0]
            if stripped.strip():
                self.rows.append((n, line, stripped.split()))
        self.pos = 0

    def next(self, keyword: str):
        if self.pos >= len(self.rows):
            last = self.rows[-1][0] if self.rows else 0
            raise ParseError(last + 1, 1, f"unexpected end of file, expected {keyword}")
        n, raw, toks = self.rows[self.pos]
        self.pos += 1
        if toks[0] != keyword:
            raise ParseError(n, raw.index(toks[0]) + 1, f"expected {keyword}, found {toks[0]!r}")
        return n, raw, toks[1:]


def _col(raw: str, k: int) -> int:
    """1-based column of the k-th whitespace token of ``raw``."""
    offset = 0
    for idx, tok in enumerate(raw.split()):
        offset = raw.index(tok, offset)
        if idx == k:
            return offset + 1
        offset += len(tok)
    return len(raw) + 1


def _ints(n, raw, toks, first_tok, what):
    out = []
    for k, t in enumerate(toks):
        try:
            out.append(int(t))
        except ValueError:
            raise ParseError(n, _col(raw, first_tok + k), f"{what}: {t!r} is not an integer") from None
    return out


def loads_factor_graph(text: str, backend: str = "rational") -> FactorGraphFile:
    lines = _Lines(text)
    n, raw, rest = lines.next("FG")
    if rest != ["1"]:
        raise ParseError(n, _col(raw, 1) if rest else len(raw) + 1, "unsupported format version (expected 1)")
    semiring = None
    if lines.pos < len(lines.rows) and lines.rows[lines.pos][2][0] == "SEMIRING":
        n, raw, rest = lines.next("SEMIRING")
        if len(rest) != 1:
            raise ParseError(n, len(raw) + 1, "SEMIRING takes one name")
        try:
            semiring = registry_lookup(rest[0]).name
        except LookupError as exc:
            raise ParseError(n, _col(raw, 1), str(exc)) from None
    n, raw, rest = lines.next("VARS")
    nums = _ints(n, raw, rest, 1, "VARS")
    if len(nums) != 1 or nums[0] < 0:
        raise ParseError(n, len(raw) + 1, "VARS takes one non-negative integer")
    n_vars = nums[0]
    n, raw, rest = lines.next("DOM")
    domains = _ints(n, raw, rest, 1, "DOM")
    if len(domains) != n_vars:
        raise ParseError(n, len(raw) + 1, f"DOM lists {len(domains)} sizes for {n_vars} variables")
    n, raw, rest = lines.next("FACTORS")
    counts = _ints(n, raw, rest, 1, "FACTORS")
    if len(counts) != 1 or counts[0] < 0:
        raise ParseError(n, len(raw) + 1, "FACTORS takes one non-negative integer")
    factors = []
    for _ in range(counts[0]):
        n, raw, rest = lines.next("SCOPE")
        nums = _ints(n, raw, rest, 1, "SCOPE")
        if not nums or nums[0] != len(nums) - 1:
            raise ParseError(n, len(raw) + 1, "SCOPE must give its arity followed by that many indices")
        scope = nums[1:]
        tn, traw, trest = lines.next("TABLE")
        table = []
        for k, t in enumerate(trest):
            try:
                table.append(parse_value(t, backend))
            except ValueParseError:
                raise ParseError(tn, _col(traw, k + 1), f"bad table value {t!r}") from None
        factors.append((scope, table, n))
    if lines.pos < len(lines.rows):
        n, raw, toks = lines.rows[lines.pos]
        raise ParseError(n, 1, f"trailing content after {counts[0]} factors")
    for scope, table, line in factors:
        try:
            build(domains, [(scope, table)])
        except GraphError as exc:
            raise ParseError(line, 1, str(exc).replace("factor 0", "factor")) from None
    try:
        graph = build(domains, [(s, t) for s, t, _ in factors], backend=backend)
    except GraphError as exc:
        raise ParseError(1, 1, str(exc)) from None
    return FactorGraphFile(graph, semiring)


def load_factor_graph(path: str | Path, backend: str = "rational") -> FactorGraphFile:
    return loads_factor_graph(Path(path).read_text(), backend)


def dumps_factor_graph(fg: FactorGraph, semiring: str | None = None) -> str:
    """Canonical form: single spaces, newline-terminated, lowest-terms values."""
    out = ["FG 1"]
    if semiring:
        out.append(f"SEMIRING {semiring}")
    out.append(f"VARS {fg.n_vars}")
    out.append(" ".join(["DOM"] + [str(d) for d in fg.domains]))
    out.append(f"FACTORS {fg.n_factors}")
    for f in fg.factors:
        out.append(" ".join(["SCOPE", str(len(f.scope))] + [str(v) for v in f.scope]))
        out.append(" ".join(["TABLE"] + [format_value(x) for x in f.table]))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# DIMACS


@dataclass
class CNF:
    n_vars: int
    clauses: list[tuple[Lit, ...]]


def loads_dimacs(text: str) -> CNF:
    """Parse DIMACS CNF.  Literal 0 ends a clause wherever it appears; a
    clause count that disagrees with the header only warns."""
    n_vars = n_clauses = None
    clauses: list[tuple[Lit, ...]] = []
    current: list[Lit] = []
    for n, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("c"):
            continue
        if s.startswith("%"):
            break
        if s.startswith("p"):
            parts = s.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(n, 1, "expected 'p cnf <vars> <clauses>'")
            try:
                n_vars, n_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(n, 1, "header counts must be integers") from None
            continue
        if n_vars is None:
            raise ParseError(n, 1, "clause before the 'p cnf' header")
        offset = 0
        for tok in s.split():
            col = line.index(tok, offset) + 1
            offset = col - 1 + len(tok)
            try:
                x = int(tok)
            except ValueError:
                raise ParseError(n, col, f"{tok!r} is not a literal") from None
            if x == 0:
                clauses.append(tuple(current))
                current = []
            elif abs(x) > n_vars:
                raise ParseError(n, col, f"literal {x} exceeds the declared {n_vars} variables")
            else:
                current.append(Lit(abs(x) - 1, x > 0))
    if n_vars is None:
        raise ParseError(1, 1, "missing 'p cnf' header")
    if current:
        warnings.warn("last clause is not terminated by 0", HeaderMismatchWarning, stacklevel=2)
        clauses.append(tuple(current))
    if n_clauses is not None and n_clauses != len(clauses):
        warnings.warn(
            f"header declares {n_clauses} clauses, found {len(clauses)}", HeaderMismatchWarning, stacklevel=2
        )
    return CNF(n_vars, clauses)


def load_dimacs(path: str | Path) -> CNF:
    return loads_dimacs(Path(path).read_text())


def dumps_dimacs(cnf: CNF) -> str:
    out = [f"p cnf {cnf.n_vars} {len(cnf.clauses)}"]
    for c in cnf.clauses:
        out.append(" ".join(str(l.var + 1 if l.positive else -(l.var + 1)) for l in c) + " 0")
    return "\n".join(out) + "\n"
