"""Discrete factor graphs with tabular factors.

Tables are stored row-major over the (sorted) scope, last variable fastest.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .algebra import SEMIRINGS, SemigroupOp, SemiringSpec, Value, get_op
from .errors import (
    DuplicateInScope,
    EmptyScope,
    FactorTooLarge,
    IndexOutOfRange,
    ScopeOutOfRange,
    TableSizeMismatch,
    ValueOutOfDomain,
)

MAX_TABLE_ENTRIES = 1 << 20


def assignments(domains: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """All joint states in row-major order (last coordinate fastest)."""
    return itertools.product(*(range(d) for d in domains))


def strides_for(domains: Sequence[int]) -> tuple[int, ...]:
    out = [1] * len(domains)
    for k in range(len(domains) - 2, -1, -1):
        out[k] = out[k + 1] * domains[k + 1]
    return tuple(out)


@dataclass(frozen=True)
class Factor:
    scope: tuple[int, ...]
    table: tuple[Value, ...]


@dataclass(frozen=True)
class Table:
    """A function over the joint states of ``scope``; a scalar when the scope is empty."""

    scope: tuple[int, ...]
    domains: tuple[int, ...]
    values: tuple[Value, ...]
    exact: bool = True

    def __getitem__(self, state: Sequence[int]) -> Value:
        idx = 0
        for x, st in zip(state, strides_for(self.domains)):
            idx += x * st
        return self.values[idx]

    @property
    def scalar(self) -> Value:
        if self.scope:
            raise ValueError("table has a non-empty scope")
        return self.values[0]

    def items(self) -> Iterator[tuple[tuple[int, ...], Value]]:
        return zip(assignments(self.domains), self.values)


def _expand_op(op) -> SemigroupOp:
    if isinstance(op, SemiringSpec):
        return op.expand
    if isinstance(op, str) and op in SEMIRINGS:
        return SEMIRINGS[op].expand
    return get_op(op)


@dataclass(frozen=True)
class FactorGraph:
    """Variables ``0..N-1`` with finite domains and a list of factors.

    ``labels`` maps local variable indices to the indices of the graph a
    reduced graph was derived from (identity for freshly built graphs).
    """

    domains: tuple[int, ...]
    factors: tuple[Factor, ...]
    labels: tuple[int, ...] = ()
    backend: str = "rational"
    var_factors: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    strides: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(len(self.domains))))
        adj: list[list[int]] = [[] for _ in self.domains]
        for a, f in enumerate(self.factors):
            for v in f.scope:
                adj[v].append(a)
        object.__setattr__(self, "var_factors", tuple(tuple(x) for x in adj))
        object.__setattr__(
            self,
            "strides",
            tuple(strides_for([self.domains[v] for v in f.scope]) for f in self.factors),
        )

    @property
    def n_vars(self) -> int:
        return len(self.domains)

    @property
    def n_factors(self) -> int:
        return len(self.factors)

    def factor_domains(self, a: int) -> tuple[int, ...]:
        return tuple(self.domains[v] for v in self.factors[a].scope)

    def factor_value(self, a: int, assignment: Sequence[int]) -> Value:
        """Value of factor ``a`` under a full assignment indexed by variable."""
        f = self.factors[a]
        idx = 0
        for v, st in zip(f.scope, self.strides[a]):
            idx += assignment[v] * st
        return f.table[idx]

    def edges(self) -> Iterator[tuple[int, int]]:
        """(variable, factor) pairs."""
        for a, f in enumerate(self.factors):
            for v in f.scope:
                yield v, a

    def joint_size(self) -> int:
        return math.prod(self.domains)

    def to_float(self) -> "FactorGraph":
        def conv(x):
            return x if isinstance(x, bool) else float(x)

        factors = tuple(Factor(f.scope, tuple(conv(x) for x in f.table)) for f in self.factors)
        return FactorGraph(self.domains, factors, self.labels, "float64")


def _permute_to_sorted(scope: Sequence[int], table: Sequence[Value], domains: Sequence[int]):
    order = sorted(range(len(scope)), key=lambda k: scope[k])
    new_scope = tuple(scope[k] for k in order)
    old_strides = strides_for([domains[v] for v in scope])
    new_doms = [domains[v] for v in new_scope]
    new_table = []
    for state in assignments(new_doms):
        idx = sum(state[pos] * old_strides[order[pos]] for pos in range(len(order)))
        new_table.append(table[idx])
    return new_scope, tuple(new_table)


def build(
    domains: Sequence[int],
    factors: Iterable[Factor | tuple[Sequence[int], Sequence[Value]]],
    backend: str = "rational",
) -> FactorGraph:
    """Validate and assemble a factor graph.

    Factors may be given with an unsorted scope; the table is then permuted so
    that the stored scope is sorted.
    """
    domains = tuple(int(d) for d in domains)
    for i, d in enumerate(domains):
        if d < 1:
            raise ValueOutOfDomain(f"variable {i} has empty domain")
    n = len(domains)
    out = []
    for a, f in enumerate(factors):
        scope, table = (f.scope, f.table) if isinstance(f, Factor) else f
        scope = tuple(int(v) for v in scope)
        table = tuple(table)
        if not scope:
            raise EmptyScope(f"factor {a} has an empty scope")
        if len(set(scope)) != len(scope):
            raise DuplicateInScope(f"factor {a} repeats a variable in scope {scope}")
        for v in scope:
            if not 0 <= v < n:
                raise ScopeOutOfRange(f"factor {a} references variable {v}, graph has {n}")
        size = math.prod(domains[v] for v in scope)
        if size > MAX_TABLE_ENTRIES:
            raise FactorTooLarge(f"factor {a} has {size} entries (limit {MAX_TABLE_ENTRIES})")
        if len(table) != size:
            raise TableSizeMismatch(f"factor {a}: table has {len(table)} entries, expected {size}")
        if list(scope) != sorted(scope):
            scope, table = _permute_to_sorted(scope, table, domains)
        out.append(Factor(scope, table))
    return FactorGraph(domains, tuple(out), backend=backend)


def _check_assignment(fg: FactorGraph, z: Sequence[int]) -> None:
    if len(z) != fg.n_vars:
        raise IndexOutOfRange(f"assignment has {len(z)} entries, graph has {fg.n_vars} variables")
    for i, (x, d) in enumerate(zip(z, fg.domains)):
        if not 0 <= x < d:
            raise ValueOutOfDomain(f"x{i}={x} outside domain of size {d}")


def evaluate(fg: FactorGraph, op: SemiringSpec | SemigroupOp | str, z: Sequence[int]) -> Value:
    """Expanded form at a full assignment: the ``op``-combination of all factor values."""
    expand = _expand_op(op)
    _check_assignment(fg, z)
    acc = expand.identity
    for a in range(fg.n_factors):
        acc = expand.combine(acc, fg.factor_value(a, z))
    return acc


def markov_blanket(fg: FactorGraph, i: int) -> frozenset[int]:
    if not 0 <= i < fg.n_vars:
        raise IndexOutOfRange(f"no variable {i}")
    out = set()
    for a in fg.var_factors[i]:
        out.update(fg.factors[a].scope)
    out.discard(i)
    return frozenset(out)


def components(fg: FactorGraph) -> list[tuple[list[int], list[int]]]:
    """Connected components as (variables, factors), each list in BFS order."""
    seen_v = [False] * fg.n_vars
    seen_f = [False] * fg.n_factors
    out = []
    for root in range(fg.n_vars):
        if seen_v[root]:
            continue
        vs, fs = [], []
        seen_v[root] = True
        queue = deque([("v", root)])
        while queue:
            kind, u = queue.popleft()
            if kind == "v":
                vs.append(u)
                for a in fg.var_factors[u]:
                    if not seen_f[a]:
                        seen_f[a] = True
                        queue.append(("f", a))
            else:
                fs.append(u)
                for v in fg.factors[u].scope:
                    if not seen_v[v]:
                        seen_v[v] = True
                        queue.append(("v", v))
        out.append((vs, fs))
    return out


def is_tree(fg: FactorGraph) -> bool:
    """True iff the bipartite variable/factor graph is acyclic (a forest)."""
    n_edges = sum(len(f.scope) for f in fg.factors)
    n_nodes = fg.n_vars + fg.n_factors
    return n_edges == n_nodes - len(components(fg))


def reduce(
    fg: FactorGraph,
    evidence: Mapping[int, int],
    op: SemiringSpec | SemigroupOp | str | None = None,
) -> FactorGraph | Value:
    """Clamp variables to observed values.

    Remaining variables are renumbered densely, and ``labels`` records their
    indices in ``fg``.  Factors left with no free variable are folded with the
    expansion ``op`` into one constant factor on the first remaining variable.
    When every variable is clamped the folded scalar itself is returned.
    """
    for v, x in evidence.items():
        if not 0 <= v < fg.n_vars:
            raise IndexOutOfRange(f"evidence on missing variable {v}")
        if not 0 <= x < fg.domains[v]:
            raise ValueOutOfDomain(f"evidence x{v}={x} outside domain of size {fg.domains[v]}")
    remaining = [v for v in range(fg.n_vars) if v not in evidence]
    new_index = {v: k for k, v in enumerate(remaining)}
    constants = []
    factors = []
    for a, f in enumerate(fg.factors):
        free = [v for v in f.scope if v not in evidence]
        strides = fg.strides[a]
        base = sum(evidence[v] * st for v, st in zip(f.scope, strides) if v in evidence)
        if not free:
            constants.append(f.table[base])
            continue
        free_strides = [st for v, st in zip(f.scope, strides) if v not in evidence]
        table = []
        for state in assignments([fg.domains[v] for v in free]):
            table.append(f.table[base + sum(x * st for x, st in zip(state, free_strides))])
        factors.append(Factor(tuple(new_index[v] for v in free), tuple(table)))

    if (constants or not remaining) and op is None:
        raise ValueError("an expansion operation is needed to fold fully clamped factors")
    if not remaining:
        return _expand_op(op).reduce(constants)
    if constants:
        c = _expand_op(op).reduce(constants)
        factors.append(Factor((0,), tuple(c for _ in range(fg.domains[remaining[0]]))))
    return FactorGraph(
        tuple(fg.domains[v] for v in remaining),
        tuple(factors),
        tuple(fg.labels[v] for v in remaining),
        fg.backend,
    )
