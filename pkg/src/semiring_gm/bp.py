"""Belief propagation over an arbitrary commutative semiring."""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .algebra import SemiringSpec, Value, registry_lookup
from .errors import DivisionByAnnihilator, NotAChoiceSemiring, NotATree, NotInvertible
from .factor_graph import FactorGraph, Table, assignments, components, is_tree

Vector = tuple[Value, ...]
Edge = tuple[int, int]


@dataclass
class MessageState:
    """Messages keyed ``v2f[(i, I)]`` (variable to factor) and ``f2v[(I, i)]``."""

    fg: FactorGraph
    semiring: SemiringSpec
    v2f: dict[Edge, Vector] = field(default_factory=dict)
    f2v: dict[Edge, Vector] = field(default_factory=dict)
    normalized: bool = True

    @property
    def normalizes(self) -> bool:
        return self.normalized and self.semiring.expand_invertible

    def copy(self) -> "MessageState":
        return MessageState(self.fg, self.semiring, dict(self.v2f), dict(self.f2v), self.normalized)


@dataclass
class BPReport:
    converged: bool
    iterations: int
    max_residual: float
    wall_time: float


# ---------------------------------------------------------------------------
# raw updates: these take explicit incoming messages so that the survey
# propagation layer can evaluate them on arbitrary candidate tuples


def v2f_raw(fg: FactorGraph, s: SemiringSpec, i: int, incoming: Iterable[Vector]) -> list[Value]:
    """Unnormalized variable-to-factor message: product of the given incoming messages."""
    times = s.expand.fn
    out = [s.one_times] * fg.domains[i]
    for msg in incoming:
        out = [times(a, b) for a, b in zip(out, msg)]
    return out


def f2v_raw(
    fg: FactorGraph, s: SemiringSpec, a: int, i: int, incoming: Mapping[int, Vector]
) -> list[Value]:
    """Unnormalized factor-to-variable message.

    ``incoming`` maps each other variable in the scope to its message.
    """
    plus, times = s.marg.fn, s.expand.fn
    f = fg.factors[a]
    doms = fg.factor_domains(a)
    pos = f.scope.index(i)
    out = [s.one_plus] * fg.domains[i]
    others = [(k, incoming[v]) for k, v in enumerate(f.scope) if v != i]
    for state, val in zip(assignments(doms), f.table):
        for k, msg in others:
            val = times(val, msg[state[k]])
        xi = state[pos]
        out[xi] = plus(out[xi], val)
    return out


def finish(s: SemiringSpec, raw: Sequence[Value], normalize: bool) -> tuple[Vector, Value]:
    """Normalize (when requested and possible) and return the local integral too."""
    integral = s.sum_all(raw)
    if normalize and s.expand_invertible:
        return tuple(s.normalize(raw)), integral
    return tuple(raw), integral


def update_v2f(state: MessageState, i: int, a: int) -> Vector:
    fg, s = state.fg, state.semiring
    incoming = (state.f2v[(b, i)] for b in fg.var_factors[i] if b != a)
    return finish(s, v2f_raw(fg, s, i, incoming), state.normalizes)[0]


def update_f2v(state: MessageState, a: int, i: int) -> Vector:
    fg, s = state.fg, state.semiring
    incoming = {j: state.v2f[(j, a)] for j in fg.factors[a].scope if j != i}
    return finish(s, f2v_raw(fg, s, a, i, incoming), state.normalizes)[0]


# ---------------------------------------------------------------------------
# initialization


def _random_entry(s: SemiringSpec, fg: FactorGraph, rng: random.Random) -> Value:
    if s.carrier == "bool":
        return rng.random() < 0.5
    if s.name == "min-max":
        pool = sorted({x for f in fg.factors for x in f.table} | {s.one_plus, s.one_times})
        return rng.choice(pool)
    if s.name == "min-sum":
        v = Fraction(rng.randint(0, 8), 2)
    else:
        v = Fraction(rng.randint(1, 8), 4)
    return float(v) if fg.backend == "float64" else v


def init_state(
    fg: FactorGraph,
    s: SemiringSpec | str,
    *,
    normalized: bool = True,
    init: str = "uniform",
    seed: int = 0,
) -> MessageState:
    """Messages set to (normalized) expansion identities, or seeded random values."""
    s = registry_lookup(s)
    state = MessageState(fg, s, normalized=normalized)
    rng = random.Random(seed)
    unit = s.convert(s.one_times, fg.backend)

    def vec(d):
        if init == "uniform":
            raw = [unit] * d
        elif init == "random":
            raw = [_random_entry(s, fg, rng) for _ in range(d)]
        else:
            raise ValueError(f"unknown init {init!r}")
        return finish(s, raw, state.normalizes)[0]

    for i, a in fg.edges():
        state.v2f[(i, a)] = vec(fg.domains[i])
        state.f2v[(a, i)] = vec(fg.domains[i])
    return state


# ---------------------------------------------------------------------------
# schedules


def _rooted_order(fg: FactorGraph):
    """Per component BFS order with parents over the bipartite graph."""
    order, parent = [], {}
    for vs, _ in components(fg):
        root = ("v", vs[0])
        parent[root] = None
        queue = [root]
        head = 0
        while head < len(queue):
            node = queue[head]
            head += 1
            order.append(node)
            kind, u = node
            nbrs = [("f", b) for b in fg.var_factors[u]] if kind == "v" else [("v", v) for v in fg.factors[u].scope]
            for nb in nbrs:
                if nb != parent[node] and nb not in parent:
                    parent[nb] = node
                    queue.append(nb)
    return order, parent


def _send(state: MessageState, src, dst) -> None:
    if src[0] == "v":
        state.v2f[(src[1], dst[1])] = update_v2f(state, src[1], dst[1])
    else:
        state.f2v[(src[1], dst[1])] = update_f2v(state, src[1], dst[1])


def run_tree(
    fg: FactorGraph, s: SemiringSpec | str, *, normalized: bool = True
) -> tuple[MessageState, list[Vector]]:
    """Two-pass (leaves to root, root to leaves) BP; exact on forests."""
    s = registry_lookup(s)
    if not is_tree(fg):
        raise NotATree("factor graph contains a cycle; use run_loopy")
    state = init_state(fg, s, normalized=normalized)
    order, parent = _rooted_order(fg)
    for node in reversed(order):
        if parent[node] is not None:
            _send(state, node, parent[node])
    for node in order:
        kind, u = node
        nbrs = [("f", b) for b in fg.var_factors[u]] if kind == "v" else [("v", v) for v in fg.factors[u].scope]
        for nb in nbrs:
            if nb != parent[node]:
                _send(state, node, nb)
    return state, [marginal_variable(state, i) for i in range(fg.n_vars)]


def _entry_residual(a: Value, b: Value) -> float:
    if a == b:
        return 0.0
    if isinstance(a, bool) or isinstance(b, bool):
        return 1.0
    return float(abs(a - b))


def residual(u: Sequence[Value], v: Sequence[Value]) -> float:
    """Max-norm distance; booleans count flipped entries as 1, infinities as inf."""
    return max((_entry_residual(a, b) for a, b in zip(u, v)), default=0.0)


def _damp(s: SemiringSpec, new: Vector, old: Vector, damping: float, normalize: bool) -> Vector:
    # Only numeric sum/prod style semirings are damped; min-max and boolean messages are not.
    if damping <= 0 or s.carrier == "bool" or s.name == "min-max":
        return new
    d = Fraction(damping) if not any(isinstance(x, float) for x in new + old) else float(damping)
    mixed = []
    for a, b in zip(new, old):
        if a == b:
            mixed.append(a)
        else:
            mixed.append((1 - d) * a + d * b)
    return finish(s, mixed, normalize)[0]


def _all_updates(state: MessageState):
    fg = state.fg
    out = {}
    for i, a in fg.edges():
        out[("v", i, a)] = update_v2f(state, i, a)
        out[("f", a, i)] = update_f2v(state, a, i)
    return out


def _get(state: MessageState, key):
    kind, u, w = key
    return state.v2f[(u, w)] if kind == "v" else state.f2v[(u, w)]


def _set(state: MessageState, key, val) -> None:
    kind, u, w = key
    if kind == "v":
        state.v2f[(u, w)] = val
    else:
        state.f2v[(u, w)] = val


def run_loopy(
    fg: FactorGraph,
    s: SemiringSpec | str,
    *,
    max_iter: int = 200,
    tol: float = 1e-9,
    damping: float = 0.0,
    schedule: str = "synchronous",
    seed: int = 0,
    init: str = "uniform",
    normalized: bool = True,
    state: MessageState | None = None,
) -> tuple[MessageState, BPReport]:
    """Iterate BP until the largest undamped change is at most ``tol``.

    ``schedule`` is ``synchronous`` (all messages from the previous sweep) or
    ``sequential`` (in-place updates in a seeded random order per sweep).
    """
    s = registry_lookup(s)
    if not 0 <= damping < 1:
        raise ValueError("damping must lie in [0, 1)")
    if schedule not in ("synchronous", "sequential"):
        raise ValueError(f"unknown schedule {schedule!r}")
    start = time.perf_counter()
    if state is None:
        state = init_state(fg, s, normalized=normalized, init=init, seed=seed)
    rng = random.Random(seed)
    keys = [("v", i, a) for i, a in fg.edges()] + [("f", a, i) for i, a in fg.edges()]
    res = math.inf if keys else 0.0
    it = 0
    norm = state.normalizes
    while it < max_iter and keys:
        it += 1
        res = 0.0
        if schedule == "synchronous":
            new = _all_updates(state)
            for key, val in new.items():
                old = _get(state, key)
                res = max(res, residual(val, old))
                _set(state, key, _damp(s, val, old, damping, norm))
        else:
            rng.shuffle(keys)
            for key in keys:
                kind, u, w = key
                val = update_v2f(state, u, w) if kind == "v" else update_f2v(state, u, w)
                old = _get(state, key)
                res = max(res, residual(val, old))
                _set(state, key, _damp(s, val, old, damping, norm))
        if res <= tol:
            break
    return state, BPReport(res <= tol, it, res, time.perf_counter() - start)


def check_fixed_point(state: MessageState, tol: float = 0.0) -> tuple[bool, float]:
    """Recompute every message once from ``state``; exact comparison when ``tol`` is 0."""
    res = 0.0
    for key, val in _all_updates(state).items():
        res = max(res, residual(val, _get(state, key)))
    return res <= tol, res


# ---------------------------------------------------------------------------
# marginals


def _maybe_normalize(s: SemiringSpec, values: Sequence[Value], normalize: bool) -> tuple[Value, ...]:
    if normalize and s.expand_invertible:
        return tuple(s.normalize(values))
    return tuple(values)


def marginal_variable(state: MessageState, i: int) -> Vector:
    fg, s = state.fg, state.semiring
    raw = v2f_raw(fg, s, i, (state.f2v[(a, i)] for a in fg.var_factors[i]))
    if not fg.var_factors[i]:
        raw = [s.convert(x, fg.backend) for x in raw]
    return _maybe_normalize(s, raw, state.normalizes)


def _factor_raw(state: MessageState, a: int) -> list[Value]:
    fg, s = state.fg, state.semiring
    times = s.expand.fn
    f = fg.factors[a]
    msgs = [state.v2f[(v, a)] for v in f.scope]
    out = []
    for st, val in zip(assignments(fg.factor_domains(a)), f.table):
        for k, m in enumerate(msgs):
            val = times(val, m[st[k]])
        out.append(val)
    return out


def marginal_factor(state: MessageState, a: int) -> Table:
    fg = state.fg
    values = _maybe_normalize(state.semiring, _factor_raw(state, a), state.normalizes)
    return Table(fg.factors[a].scope, fg.factor_domains(a), values)


def region_is_exact(fg: FactorGraph, A: Iterable[int]) -> bool:
    """Whether the region formula is exact: ``fg`` is a forest and ``A`` with its
    inner factors forms one connected piece."""
    A = set(A)
    if not A or not is_tree(fg):
        return False
    inner = [a for a, f in enumerate(fg.factors) if set(f.scope) <= A]
    seen = {min(A)}
    stack = [min(A)]
    while stack:
        u = stack.pop()
        for a in inner:
            if u in fg.factors[a].scope:
                for v in fg.factors[a].scope:
                    if v not in seen:
                        seen.add(v)
                        stack.append(v)
    return seen == A


def marginal_region(state: MessageState, A: Iterable[int]) -> Table:
    """Joint marginal over ``A`` from inner factors and messages entering ``A``.

    ``Table.exact`` is False when the result is only an approximation.
    """
    fg, s = state.fg, state.semiring
    times = s.expand.fn
    A = tuple(sorted(set(A)))
    Aset = set(A)
    inner = [a for a, f in enumerate(fg.factors) if set(f.scope) <= Aset]
    entering = [(i, a) for i in A for a in fg.var_factors[i] if a not in inner]
    pos = {v: k for k, v in enumerate(A)}
    doms = tuple(fg.domains[v] for v in A)
    values = []
    for st in assignments(doms):
        val = s.convert(s.one_times, fg.backend)
        for a in inner:
            f = fg.factors[a]
            idx = sum(st[pos[v]] * stv for v, stv in zip(f.scope, fg.strides[a]))
            val = times(val, f.table[idx])
        for i, a in entering:
            val = times(val, state.f2v[(a, i)][st[pos[i]]])
        values.append(val)
    values = _maybe_normalize(s, values, state.normalizes)
    return Table(A, doms, values, exact=region_is_exact(fg, A))


# ---------------------------------------------------------------------------
# local integrals and the decomposition of the global integral


@dataclass
class LocalIntegrals:
    v2f: dict[Edge, Value]  # marginalization of the unnormalized update i -> I
    f2v: dict[Edge, Value]  # marginalization of the unnormalized update I -> i
    factor: dict[int, Value]
    variable: dict[int, Value]
    edge: dict[Edge, Value]  # (i, I): marginalization of mu_{i->I} * mu_{I->i}


def local_integrals(state: MessageState) -> LocalIntegrals:
    fg, s = state.fg, state.semiring
    times = s.expand.fn
    li = LocalIntegrals({}, {}, {}, {}, {})
    for i, a in fg.edges():
        inc_v = (state.f2v[(b, i)] for b in fg.var_factors[i] if b != a)
        li.v2f[(i, a)] = s.sum_all(v2f_raw(fg, s, i, inc_v))
        inc_f = {j: state.v2f[(j, a)] for j in fg.factors[a].scope if j != i}
        li.f2v[(a, i)] = s.sum_all(f2v_raw(fg, s, a, i, inc_f))
        li.edge[(i, a)] = s.sum_all(times(x, y) for x, y in zip(state.v2f[(i, a)], state.f2v[(a, i)]))
    for a in range(fg.n_factors):
        li.factor[a] = s.sum_all(_factor_raw(state, a))
    for i in range(fg.n_vars):
        raw = v2f_raw(fg, s, i, (state.f2v[(a, i)] for a in fg.var_factors[i]))
        li.variable[i] = s.convert(s.sum_all(raw), fg.backend)
    return li


def integral_decomposition(state: MessageState) -> Value:
    """Global integral assembled from local BP integrals.

    Product of factor and variable local integrals, times the inverse of the
    product of the per-edge integrals.  Exact at the BP fixed point of a forest.
    """
    s = state.semiring
    if not s.expand_invertible:
        raise NotInvertible(f"{s.name}: the decomposition needs an invertible expansion")
    li = local_integrals(state)
    num = s.prod_all(list(li.factor.values()) + list(li.variable.values()))
    den = s.prod_all(li.edge.values())
    if den == s.one_plus:
        raise DivisionByAnnihilator("an edge integral equals the annihilator")
    return s.times(num, s.invert(den))


# ---------------------------------------------------------------------------
# decoding for choice semirings


def _best_index(s: SemiringSpec, values: Sequence[Value]) -> int:
    best = s.sum_all(values)
    return next(k for k, v in enumerate(values) if v == best)


def decode(state: MessageState) -> tuple[int, ...]:
    """Jointly optimal assignment on a forest by back-tracking through the messages.

    Ties are broken toward the lowest state index.  Without ties this agrees
    with choosing each variable's best marginal state independently.
    """
    fg, s = state.fg, state.semiring
    if not s.marg.is_choice:
        raise NotAChoiceSemiring(f"{s.name}: marginalization {s.marg.tag} is not a choice")
    if not is_tree(fg):
        raise NotATree("decoding by back-tracking requires a forest")
    times = s.expand.fn
    x = [None] * fg.n_vars
    order, parent = _rooted_order(fg)
    for node in order:
        kind, u = node
        if kind == "v":
            if parent[node] is None:
                x[u] = _best_index(s, marginal_variable(state, u))
            continue
        f = fg.factors[u]
        p = parent[node][1]
        pk = f.scope.index(p)
        cands, vals = [], []
        for st, val in zip(assignments(fg.factor_domains(u)), f.table):
            if st[pk] != x[p]:
                continue
            for k, v in enumerate(f.scope):
                if v != p:
                    val = times(val, state.v2f[(v, u)][st[k]])
            cands.append(st)
            vals.append(val)
        chosen = cands[_best_index(s, vals)]
        for k, v in enumerate(f.scope):
            if v != p:
                x[v] = chosen[k]
    return tuple(x)
