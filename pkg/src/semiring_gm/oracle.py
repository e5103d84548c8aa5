"""Multi-operation marginalization queries and exhaustive evaluators.

A query marginalizes disjoint blocks of variables with (possibly different)
semigroup operations after expanding the factor graph with a single
operation.  Blocks are written outermost first, e.g. ``max@{0};sum@{1,2}::prod``
is marginal MAP: sum out x1,x2, then maximize over x0.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .algebra import OPS, SemiringSpec, Value, get_op, registry_lookup
from .errors import (
    CapExceeded,
    ConsecutiveOpError,
    EmptyClause,
    EmptyLevelError,
    LiteralOutOfRange,
    NotInHierarchyError,
    PartitionError,
    ProductMarginalizationCapExceeded,
    ProductMarginalizationError,
    QuerySyntaxError,
    UnsupportedPattern,
)
from .factor_graph import Factor, FactorGraph, Table, assignments, build

GRAMMAR = """\
query  := level (';' level)* '::' EXPAND
level  := OP '!'? '@' varset  |  'free@' varset
varset := '{' int (',' int)* '}'  |  'all'
OP     := sum | prod | min | max | or | and | xor
EXPAND := sum | prod | min | max | or | and | xor
('!' marks a level of polynomial size; 'all' means every variable not named elsewhere)"""

DEFAULT_FREE_CAP = 1 << 16
DEFAULT_TOTAL_CAP = 1 << 26


@dataclass(frozen=True)
class Level:
    op: str
    vars: frozenset[int]
    poly: bool = False


@dataclass(frozen=True)
class Query:
    """Marginalization levels listed outermost first, plus the expansion op."""

    levels: tuple[Level, ...]
    expand: str
    n_vars: int

    def __post_init__(self):
        get_op(self.expand)
        seen: set[int] = set()
        for lv in self.levels:
            get_op(lv.op)
            if not lv.vars:
                raise EmptyLevelError(f"level {lv.op} has no variables")
            bad = [v for v in lv.vars if not 0 <= v < self.n_vars]
            if bad:
                raise PartitionError(f"variables {sorted(bad)} outside 0..{self.n_vars - 1}")
            if seen & lv.vars:
                raise PartitionError(f"variables {sorted(seen & lv.vars)} appear in two levels")
            seen |= lv.vars
        for outer, inner in zip(self.levels, self.levels[1:]):
            if outer.op == inner.op:
                raise ConsecutiveOpError(
                    f"adjacent levels both use {outer.op}; merge them into one level"
                )

    @property
    def M(self) -> int:
        return len(self.levels)

    @property
    def free(self) -> frozenset[int]:
        used = set().union(*(lv.vars for lv in self.levels)) if self.levels else set()
        return frozenset(range(self.n_vars)) - used

    def level_index(self, k: int) -> int:
        """Hierarchy index of the k-th listed level (innermost is 1)."""
        return self.M - k

    def text(self) -> str:
        parts = []
        for lv in self.levels:
            bang = "!" if lv.poly else ""
            parts.append(f"{lv.op}{bang}@{{{','.join(map(str, sorted(lv.vars)))}}}")
        return ";".join(parts) + "::" + self.expand


_LEVEL_RE = re.compile(r"^(sum|prod|min|max|or|and|xor|free)(!?)@(\{[^{}]*\}|all)$")
_INT_RE = re.compile(r"^\d+$")


def _parse_varset(text: str, where: str) -> set[int] | None:
    if text == "all":
        return None
    body = text[1:-1].strip()
    if not body:
        raise EmptyLevelError(f"{where}: empty variable set")
    out = []
    for tok in body.split(","):
        tok = tok.strip()
        if not _INT_RE.match(tok):
            raise QuerySyntaxError(f"{where}: {tok!r} is not a variable index\n{GRAMMAR}")
        out.append(int(tok))
    if len(set(out)) != len(out):
        raise PartitionError(f"{where}: repeated variable")
    return set(out)


def parse_query(text: str, n_vars: int) -> Query:
    """Parse the textual query syntax described by ``GRAMMAR``."""
    compact = re.sub(r"\s+", "", text)
    if compact.count("::") != 1:
        raise QuerySyntaxError(f"expected exactly one '::' before the expansion op\n{GRAMMAR}")
    left, expand = compact.split("::")
    if expand not in OPS:
        raise QuerySyntaxError(f"unknown expansion op {expand!r}\n{GRAMMAR}")
    if not left:
        raise QuerySyntaxError(f"at least one marginalization level is required\n{GRAMMAR}")

    raw = []
    free_decl = None
    for pos, chunk in enumerate(left.split(";")):
        m = _LEVEL_RE.match(chunk)
        if not m:
            raise QuerySyntaxError(f"cannot parse level {pos + 1}: {chunk!r}\n{GRAMMAR}")
        op, bang, varset = m.groups()
        where = f"level {pos + 1}"
        if op == "free":
            if bang or varset == "all" or free_decl is not None:
                raise QuerySyntaxError(f"{where}: malformed free clause\n{GRAMMAR}")
            free_decl = _parse_varset(varset, where)
            continue
        raw.append((op, bool(bang), _parse_varset(varset, where)))

    if not raw:
        raise QuerySyntaxError(f"at least one marginalization level is required\n{GRAMMAR}")
    if sum(1 for _, _, vs in raw if vs is None) > 1:
        raise PartitionError("'all' may be used by one level only")
    named = set()
    for _, _, vs in raw:
        if vs is not None:
            if named & vs:
                raise PartitionError(f"variables {sorted(named & vs)} appear in two levels")
            named |= vs
    reserved = named | (free_decl or set())
    levels = []
    for op, poly, vs in raw:
        if vs is None:
            vs = set(range(n_vars)) - reserved
            if not vs:
                raise EmptyLevelError(f"'all' in level {op} resolves to no variables")
        levels.append(Level(op, frozenset(vs), poly))
    q = Query(tuple(levels), expand, n_vars)
    if free_decl is not None and frozenset(free_decl) != q.free:
        raise PartitionError(
            f"free clause {sorted(free_decl)} differs from the unmarginalized set {sorted(q.free)}"
        )
    return q


# ---------------------------------------------------------------------------
# hierarchy classification

_WRAPPER = {"min": "coNP", "max": "NP", "sum": "PP"}
_CANONICAL = {"or": "max", "and": "min"}
_FAMILY = {"sum": "Sigma", "prod": "Pi", "min": "Phi", "max": "Psi"}


@dataclass(frozen=True)
class ComplexityClass:
    """Oracle tower listed outermost first, e.g. ('NP', 'PP') for NP^PP."""

    tower: tuple[str, ...]

    def __str__(self) -> str:
        return "^".join(self.tower)


@dataclass(frozen=True)
class InferenceClass:
    family: str
    M: int
    sum_set: frozenset[int]
    poly_set: frozenset[int]
    complexity: ComplexityClass


def _canonical_op(op: str) -> str:
    if op == "prod":
        raise ProductMarginalizationError("product marginalization has no place in the hierarchy")
    if op == "xor":
        raise NotInHierarchyError("xor marginalization is outside the hierarchy")
    return _CANONICAL.get(op, op)


def classify(q: Query) -> InferenceClass:
    """Place a query in the inference hierarchy and derive its oracle tower.

    Levels are processed innermost first starting from the base class P;
    exponential min/max/sum levels wrap the current class as coNP/NP/PP
    oracles and polynomial levels wrap it as P.  An innermost level that uses
    the expansion op itself (sum-sum, min-min, max-max) is a base member.
    """
    ops = [_canonical_op(lv.op) for lv in q.levels]
    expand = _CANONICAL.get(q.expand, q.expand)
    inner_first = list(zip(reversed(ops), reversed(q.levels)))
    sum_set, poly_set = set(), set()
    wrappers: list[str] = []  # innermost first
    start = 0
    if ops[-1] == expand and expand in _WRAPPER and not q.levels[-1].poly:
        poly_set.add(1)
        start = 1
    for idx in range(start, len(inner_first)):
        op, lv = inner_first[idx]
        if lv.poly:
            poly_set.add(idx + 1)
            if not wrappers or wrappers[-1] != "P":
                wrappers.append("P")
            continue
        if op == "sum":
            sum_set.add(idx + 1)
        wrappers.append(_WRAPPER[op])
    tower = tuple(reversed(wrappers)) or ("P",)
    outer_idx = len(ops)
    if outer_idx in poly_set:
        family = "Delta"
    else:
        family = _FAMILY[ops[0]]
    return InferenceClass(family, len(ops), frozenset(sum_set), frozenset(poly_set), ComplexityClass(tower))


# ---------------------------------------------------------------------------
# evaluation


def _nested_reduce(fg: FactorGraph, expand_tag: str, levels: Sequence[tuple[str, frozenset[int]]]) -> Table:
    """Depth-first nested evaluation; memory grows with N, not with |X|.

    Variables are visited free-first, then outermost level to innermost.
    Each factor is folded into the running product as soon as its last
    variable is fixed.
    """
    expand = get_op(expand_tag).fn
    unit = get_op(expand_tag).identity
    used = set().union(*(vs for _, vs in levels)) if levels else set()
    free = sorted(set(range(fg.n_vars)) - used)
    order = list(free)
    ops = [None] * len(free)
    for op, vs in levels:
        fn = get_op(op).fn
        for v in sorted(vs):
            order.append(v)
            ops.append(fn)
    n = len(order)
    pos = {v: k for k, v in enumerate(order)}
    attach: list[list[tuple[tuple, tuple[int, ...], tuple[int, ...]]]] = [[] for _ in range(n + 1)]
    constant = unit
    for a, f in enumerate(fg.factors):
        last = max(pos[v] for v in f.scope)
        attach[last].append((f.table, f.scope, fg.strides[a]))
    doms = [fg.domains[v] for v in order]
    x = [0] * fg.n_vars

    def fold(k: int, acc):
        for table, scope, strides in attach[k]:
            idx = 0
            for v, st in zip(scope, strides):
                idx += x[v] * st
            acc = expand(acc, table[idx])
        return acc

    def rec(k: int, acc):
        if k == n:
            return acc
        v = order[k]
        op = ops[k]
        result = None
        for val in range(doms[k]):
            x[v] = val
            r = rec(k + 1, fold(k, acc))
            result = r if result is None else op(result, r)
        return result

    values = []
    nf = len(free)
    for state in assignments([fg.domains[v] for v in free]):
        acc = constant
        for k, val in enumerate(state):
            x[free[k]] = val
        for k in range(nf):
            acc = fold(k, acc)
        values.append(rec(nf, acc))
    return Table(tuple(free), tuple(fg.domains[v] for v in free), tuple(values))


def evaluate_query(
    fg: FactorGraph,
    q: Query,
    *,
    free_cap: int = DEFAULT_FREE_CAP,
    total_cap: int = DEFAULT_TOTAL_CAP,
) -> Table:
    """Exact value of ``q`` on ``fg`` as a table over the free variables."""
    if q.n_vars != fg.n_vars:
        raise PartitionError(f"query is over {q.n_vars} variables, graph has {fg.n_vars}")
    free_size = math.prod(fg.domains[v] for v in q.free)
    total = fg.joint_size()
    if free_size > free_cap or total > total_cap:
        exc = CapExceeded
        if any(lv.op == "prod" for lv in q.levels):
            exc = ProductMarginalizationCapExceeded
        raise exc(f"|X_free|={free_size} (cap {free_cap}), |X|={total} (cap {total_cap})")
    return _nested_reduce(fg, q.expand, [(lv.op, lv.vars) for lv in q.levels])


def brute_marginal(fg: FactorGraph, s: SemiringSpec | str, J: Sequence[int] = ()) -> Table:
    """Marginal over ``J`` by enumeration, normalized when ``s`` allows it."""
    s = registry_lookup(s)
    J = frozenset(J)
    rest = frozenset(range(fg.n_vars)) - J
    levels = [(s.marg.tag, rest)] if rest else []
    t = _nested_reduce(fg, s.expand.tag, levels)
    if s.expand_invertible and t.scope:
        return Table(t.scope, t.domains, tuple(s.normalize(t.values)))
    return t


def brute_integral(fg: FactorGraph, s: SemiringSpec | str) -> Value:
    return brute_marginal(fg, s, ()).scalar


def fast_integral(fg: FactorGraph, pattern: str) -> Value:
    """Closed forms for integration queries whose two operations coincide.

    ``sum-sum`` adds each factor's table total times the number of joint
    states of the variables outside its scope; ``min-min`` and ``max-max``
    take the extreme entry over all tables.
    """
    if pattern == "sum-sum":
        total = get_op("sum").identity
        n_all = fg.joint_size()
        for a, f in enumerate(fg.factors):
            outside = n_all // math.prod(fg.factor_domains(a))
            total += outside * sum(f.table)
        return total
    if pattern in ("min-min", "max-max"):
        op = get_op(pattern.split("-")[0])
        return op.reduce(x for f in fg.factors for x in f.table)
    raise UnsupportedPattern(f"no closed form for {pattern!r}; use sum-sum, min-min or max-max")


# ---------------------------------------------------------------------------
# CNF


class Lit(NamedTuple):
    var: int
    positive: bool


def lits_from_ints(clauses: Sequence[Sequence[int]]) -> list[tuple[Lit, ...]]:
    """Convert 1-based signed DIMACS literals to 0-based ``Lit`` tuples."""
    out = []
    for c in clauses:
        if any(x == 0 for x in c):
            raise LiteralOutOfRange("literal 0 is not a variable")
        out.append(tuple(Lit(abs(x) - 1, x > 0) for x in c))
    return out


def encode_cnf(
    clauses: Sequence[Sequence[Lit]],
    s: SemiringSpec | str = "or-and",
    n_vars: int | None = None,
    max_width: int = 20,
) -> FactorGraph:
    """One constraint factor per clause: expansion identity where satisfied, annihilator elsewhere."""
    s = registry_lookup(s)
    clauses = [tuple(Lit(int(v), bool(p)) for v, p in c) for c in clauses]
    top = max((l.var for c in clauses for l in c), default=-1) + 1
    if n_vars is None:
        n_vars = top
    factors = []
    for k, c in enumerate(clauses):
        if not c:
            raise EmptyClause(f"clause {k} is empty")
        for lit in c:
            if not 0 <= lit.var < n_vars:
                raise LiteralOutOfRange(f"clause {k} mentions variable {lit.var}, only {n_vars} exist")
        scope = sorted({l.var for l in c})
        if len(scope) > max_width:
            raise LiteralOutOfRange(f"clause {k} has {len(scope)} variables (limit {max_width})")
        table = []
        for state in assignments([2] * len(scope)):
            val = dict(zip(scope, state))
            table.append(s.indicator(any(val[l.var] == int(l.positive) for l in c)))
        factors.append((scope, table))
    return build([2] * n_vars, factors)


# ---------------------------------------------------------------------------
# order of marginalization


def min_of_max(table: Sequence[Sequence[Value]]) -> Value:
    """min over rows of the max over columns."""
    return min(max(row) for row in table)


def max_of_min(table: Sequence[Sequence[Value]]) -> Value:
    """max over rows of the min over columns."""
    return max(min(row) for row in table)
