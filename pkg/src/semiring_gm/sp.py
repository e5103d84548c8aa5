"""Survey propagation: message passing over the BP messages themselves.

Every BP message ranges over a finite candidate grid.  A survey ``eta[key]``
is a vector of weights over the candidates of message ``key``.  Keys follow
``("v", i, I)`` for variable-to-factor and ``("f", I, i)`` for
factor-to-variable messages.
"""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .algebra import SemiringSpec, Value, registry_lookup
from .bp import MessageState, f2v_raw, finish, integral_decomposition, residual, run_loopy, run_tree, v2f_raw
from .errors import (
    DivisionByAnnihilator,
    EnumerationCapExceeded,
    GridCapExceeded,
    GridClosureError,
    InfiniteMessageSpace,
    NotInvertible,
)
from .factor_graph import FactorGraph, assignments, build, is_tree

Key = tuple[str, int, int]
Vector = tuple[Value, ...]

DEFAULT_GRID_CAP = 4096
DEFAULT_ENUM_CAP = 10**6


def message_keys(fg: FactorGraph) -> list[Key]:
    return [("v", i, a) for i, a in fg.edges()] + [("f", a, i) for i, a in fg.edges()]


def dependencies(fg: FactorGraph, key: Key) -> list[Key]:
    """Messages read by the BP update that produces ``key``."""
    kind, u, w = key
    if kind == "v":
        return [("f", b, u) for b in fg.var_factors[u] if b != w]
    return [("v", j, u) for j in fg.factors[u].scope if j != w]


def bp_message(fg: FactorGraph, bp: SemiringSpec, key: Key, inputs: Sequence[Vector]) -> tuple[Vector, Value]:
    """BP update for ``key`` on explicit inputs (ordered as ``dependencies``).

    Returns the (normalized if possible) message and its local integral.
    """
    kind, u, w = key
    if kind == "v":
        raw = v2f_raw(fg, bp, u, inputs)
    else:
        others = [j for j in fg.factors[u].scope if j != w]
        raw = f2v_raw(fg, bp, u, w, dict(zip(others, inputs)))
    return finish(bp, raw, True)


# ---------------------------------------------------------------------------
# grids


@dataclass
class MessageGrid:
    candidates: dict[Key, list[Vector]]
    index: dict[Key, dict[Vector, int]] = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {k: {v: n for n, v in enumerate(c)} for k, c in self.candidates.items()}

    def size(self, key: Key) -> int:
        return len(self.candidates[key])

    def product_size(self) -> int:
        return math.prod(len(c) for c in self.candidates.values())


def value_set(fg: FactorGraph, bp: SemiringSpec) -> list[Value]:
    return sorted({x for f in fg.factors for x in f.table} | {bp.one_plus, bp.one_times})


def build_message_grid(
    fg: FactorGraph,
    bp: SemiringSpec | str,
    mode: str = "auto",
    vectors: Sequence[Sequence[Value]] | Mapping[int, Sequence[Sequence[Value]]] | None = None,
    cap: int = DEFAULT_GRID_CAP,
) -> MessageGrid:
    """Candidate messages per directed edge.

    ``auto`` enumerates every vector over the factor values plus both
    identities, which is closed under the update for semirings whose
    operations select or combine without creating new values.  ``explicit``
    takes user vectors, either one list for all variables or a mapping
    from variable index to list.
    """
    bp = registry_lookup(bp)
    per_var: dict[int, list[Vector]] = {}
    if mode == "auto":
        if bp.name in ("sum-product", "max-product", "min-sum"):
            raise InfiniteMessageSpace(f"{bp.name} messages are not finite; supply an explicit grid")
        vals = value_set(fg, bp)
        for i, d in enumerate(fg.domains):
            n = len(vals) ** d
            if n > cap:
                raise GridCapExceeded(f"variable {i}: {n} candidates exceed the cap {cap}")
            per_var[i] = list(itertools.product(vals, repeat=d))
    elif mode == "explicit":
        if vectors is None:
            raise ValueError("explicit grids need vectors")
        for i, d in enumerate(fg.domains):
            vs = vectors[i] if isinstance(vectors, Mapping) else vectors
            cands = list(dict.fromkeys(tuple(v) for v in vs if len(v) == d))
            if not cands and fg.var_factors[i]:
                raise ValueError(f"no explicit candidate of length {d} for variable {i}")
            if len(cands) > cap:
                raise GridCapExceeded(f"variable {i}: {len(cands)} candidates exceed the cap {cap}")
            per_var[i] = cands
    else:
        raise ValueError(f"unknown grid mode {mode!r}")
    cands = {}
    for i, a in fg.edges():
        cands[("v", i, a)] = per_var[i]
        cands[("f", a, i)] = per_var[i]
    return MessageGrid(cands)


# ---------------------------------------------------------------------------
# survey state and updates


@dataclass
class SurveyState:
    fg: FactorGraph
    bp: SemiringSpec
    sp: SemiringSpec
    mode: str
    grid: MessageGrid
    eta: dict[Key, list[Value]]
    clauses: dict[int, tuple[int, ...]] | None = None  # factor -> satisfying value per scope slot
    enum_cap: int = DEFAULT_ENUM_CAP
    exclude_contradictions: bool = False
    _cache: dict = field(default_factory=dict, repr=False)


@dataclass
class SPReport:
    converged: bool
    iterations: int
    max_residual: float
    wall_time: float
    compressed: bool


def _normalize(sp: SemiringSpec, out: Sequence[Value]) -> list[Value]:
    if sp.name == "sum-product":
        t = sum(out)
        return [x / t for x in out] if t else list(out)
    return sp.normalize(out)


def _message(state: SurveyState, key: Key, combo: tuple[int, ...], deps: list[Key]) -> tuple[int, Value]:
    """Grid index and local integral of the BP update on a tuple of candidate indices."""
    ck = (key, combo)
    hit = state._cache.get(ck)
    if hit is not None:
        return hit
    vecs = [state.grid.candidates[d][k] for d, k in zip(deps, combo)]
    vec, integral = bp_message(state.fg, state.bp, key, vecs)
    idx = state.grid.index[key].get(vec)
    if idx is None:
        raise GridClosureError(f"update of {key} produced {vec}, which is not a grid candidate")
    state._cache[ck] = (idx, integral)
    return idx, integral


def _generic_update(state: SurveyState, key: Key, weighted: bool) -> list[Value]:
    sp = state.sp
    deps = dependencies(state.fg, key)
    supports = [[(k, w) for k, w in enumerate(state.eta[d]) if w != sp.one_plus] for d in deps]
    if math.prod(len(s) for s in supports) > state.enum_cap:
        raise EnumerationCapExceeded(f"{key}: too many input tuples")
    out = [sp.one_plus] * state.grid.size(key)
    for combo in itertools.product(*supports):
        idx, integral = _message(state, key, tuple(k for k, _ in combo), deps)
        w = sp.prod_all(w for _, w in combo)
        if weighted:
            w = sp.times(w, integral)
        out[idx] = sp.plus(out[idx], w)
    return _normalize(sp, _drop_contradictions(state, key, out))


def _drop_contradictions(state: SurveyState, key: Key, out: list[Value]) -> list[Value]:
    """Zero the weight of candidates that allow no state at all (every entry 1+)."""
    if not state.exclude_contradictions:
        return out
    bp, zero = state.bp, state.sp.one_plus
    return [
        zero if all(x == bp.one_plus for x in cand) else w
        for cand, w in zip(state.grid.candidates[key], out)
    ]


def counting_sp_update(state: SurveyState, key: Key) -> list[Value]:
    """Survey over candidates: total weight of input tuples whose BP update equals each candidate."""
    if state.clauses is not None:
        return _clause_update(state, key)
    return _generic_update(state, key, weighted=False)


def weighted_sp_update(state: SurveyState, key: Key) -> list[Value]:
    """Counting update with every input tuple also weighted by its local integral."""
    return _generic_update(state, key, weighted=True)


# Boolean clause factors admit a closed form.  Candidate order for a binary
# variable is (F,F), (F,T), (T,F), (T,T): empty, forced to 1, forced to 0, free.
_EMPTY, _FORCE1, _FORCE0, _FREE = 0, 1, 2, 3


def _clause_plan(state: SurveyState, key: Key):
    """Inputs of ``key`` with the slot each one forbids, plus the output slot."""
    plan = state._cache.get(("plan", key))
    if plan is None:
        kind, u, w = key
        deps = dependencies(state.fg, key)
        if kind == "f":
            sat, scope = state.clauses[u], state.fg.factors[u].scope
            forbid = [_FORCE0 if sat[scope.index(d[1])] == 1 else _FORCE1 for d in deps]
            target = _FORCE1 if sat[scope.index(w)] == 1 else _FORCE0
        else:
            forbid, target = None, None
        one = state.sp.convert(state.sp.one_times, state.fg.backend)
        plan = state._cache[("plan", key)] = (deps, forbid, target, one)
    return plan


def _clause_update(state: SurveyState, key: Key) -> list[Value]:
    deps, forbid, target, one = _clause_plan(state, key)
    eta = state.eta
    if key[0] == "f":
        total, nonempty, violated = one, one, one
        for d, slot in zip(deps, forbid):
            vec = eta[d]
            tot = vec[0] + vec[1] + vec[2] + vec[3]
            total *= tot
            nonempty *= tot - vec[_EMPTY]
            violated *= vec[slot]
        out = [total - nonempty, one - one, one - one, nonempty - violated]
        out[target] = violated
    else:
        free, ones, zeros, total = one, one, one, one
        for vec in (eta[d] for d in deps):
            free *= vec[_FREE]
            ones *= vec[_FREE] + vec[_FORCE1]
            zeros *= vec[_FREE] + vec[_FORCE0]
            total *= sum(vec)
        out = [total - ones - zeros + free, ones - free, zeros - free, free]
    if state.exclude_contradictions:
        out[_EMPTY] = one - one
    return _normalize(state.sp, out)


def clause_signs(fg: FactorGraph, bp: SemiringSpec) -> dict[int, tuple[int, ...]] | None:
    """Satisfying value per scope slot when every factor is a boolean clause."""
    if bp.name != "or-and":
        return None
    out = {}
    for a, f in enumerate(fg.factors):
        if any(fg.domains[v] != 2 for v in f.scope):
            return None
        falses = [k for k, x in enumerate(f.table) if x is False]
        if len(falses) != 1 or any(x is not True for k, x in enumerate(f.table) if k != falses[0]):
            return None
        bad = next(st for k, st in enumerate(assignments([2] * len(f.scope))) if k == falses[0])
        out[a] = tuple(1 - b for b in bad)
    return out


def _default_grid_is_standard(grid: MessageGrid) -> bool:
    std = [(False, False), (False, True), (True, False), (True, True)]
    return all(c == std for c in grid.candidates.values())


def init_survey(
    fg: FactorGraph,
    bp: SemiringSpec | str,
    *,
    mode: str = "counting",
    sp: SemiringSpec | str | None = None,
    grid: MessageGrid | None = None,
    init: str = "uniform",
    seed: int = 0,
    backend: str | None = None,
    compress: bool | str = "auto",
    enum_cap: int = DEFAULT_ENUM_CAP,
    exclude_contradictions: bool = False,
) -> SurveyState:
    bp = registry_lookup(bp)
    if mode not in ("counting", "weighted"):
        raise ValueError(f"unknown survey mode {mode!r}")
    if sp is None:
        sp = "sum-product" if mode == "counting" else bp
    sp = registry_lookup(sp)
    if mode == "weighted":
        if not bp.expand_invertible:
            raise NotInvertible(f"weighted surveys need an invertible expansion; {bp.name} has none")
        if sp.expand.tag != bp.expand.tag:
            raise ValueError("weighted surveys share the expansion operation with the BP semiring")
    if not sp.expand_invertible:
        raise NotInvertible(f"survey semiring {sp.name} cannot normalize")
    backend = backend or fg.backend
    if grid is None:
        grid = build_message_grid(fg, bp)
    clauses = None
    if mode == "counting" and compress and sp.name == "sum-product":
        clauses = clause_signs(fg, bp)
        if clauses is not None and not _default_grid_is_standard(grid):
            clauses = None
        if compress is True and clauses is None:
            raise ValueError("closed-form clause updates need an or-and clause graph")
    rng = random.Random(seed)
    unit = sp.convert(sp.one_times, backend)
    eta = {}
    for key in message_keys(fg):
        n = grid.size(key)
        if init == "uniform":
            raw = [unit] * n
        elif init == "random":
            raw = [sp.convert(Fraction(rng.randint(1, 8)), backend) for _ in range(n)]
        else:
            raise ValueError(f"unknown init {init!r}")
        eta[key] = _normalize(sp, raw)
    return SurveyState(fg, bp, sp, mode, grid, eta, clauses, enum_cap, exclude_contradictions)


def run_sp(
    fg: FactorGraph,
    bp: SemiringSpec | str,
    *,
    mode: str = "counting",
    sp: SemiringSpec | str | None = None,
    grid: MessageGrid | None = None,
    max_iter: int = 200,
    tol: float = 1e-12,
    damping: float = 0.0,
    schedule: str = "synchronous",
    seed: int = 0,
    init: str = "uniform",
    backend: str | None = None,
    compress: bool | str = "auto",
    enum_cap: int = DEFAULT_ENUM_CAP,
    exclude_contradictions: bool = False,
    state: SurveyState | None = None,
) -> tuple[SurveyState, SPReport]:
    """Iterate survey updates until the largest change is at most ``tol``.

    With ``exclude_contradictions`` the surveys are conditioned on messages
    that leave at least one state open, which is the classic SAT variant.
    """
    start = time.perf_counter()
    if state is None:
        state = init_survey(
            fg, bp, mode=mode, sp=sp, grid=grid, init=init, seed=seed,
            backend=backend, compress=compress, enum_cap=enum_cap,
            exclude_contradictions=exclude_contradictions,
        )
    if not 0 <= damping < 1:
        raise ValueError("damping must lie in [0, 1)")
    update = weighted_sp_update if state.mode == "weighted" else counting_sp_update
    keys = message_keys(state.fg)
    rng = random.Random(seed)
    sps = state.sp
    res, it = (math.inf if keys else 0.0), 0

    def damp(new, old):
        if damping <= 0:
            return new
        d = damping if isinstance(new[0], float) else Fraction(damping)
        return _normalize(sps, [(1 - d) * a + d * b for a, b in zip(new, old)])

    while it < max_iter and keys:
        it += 1
        res = 0.0
        if schedule == "synchronous":
            new = {k: update(state, k) for k in keys}
            for k, v in new.items():
                res = max(res, residual(v, state.eta[k]))
                state.eta[k] = damp(v, state.eta[k])
        elif schedule == "sequential":
            rng.shuffle(keys)
            for k in keys:
                v = update(state, k)
                res = max(res, residual(v, state.eta[k]))
                state.eta[k] = damp(v, state.eta[k])
        else:
            raise ValueError(f"unknown schedule {schedule!r}")
        if res <= tol:
            break
    report = SPReport(res <= tol, it, res, time.perf_counter() - start, state.clauses is not None)
    return state, report


# ---------------------------------------------------------------------------
# read-outs


def _support(state: SurveyState, key: Key) -> list[tuple[int, Value]]:
    return [(k, w) for k, w in enumerate(state.eta[key]) if w != state.sp.one_plus]


def sp_marginal_over_marginals(state: SurveyState, i: int) -> dict[Vector, Value]:
    """Distribution over BP marginals of variable ``i`` induced by the surveys.

    Input tuples that produce the same marginal are grouped, and the group
    weights are normalized over all groups.
    """
    fg, bp, sp = state.fg, state.bp, state.sp
    deps = [("f", a, i) for a in fg.var_factors[i]]
    supports = [_support(state, d) for d in deps]
    groups: dict[Vector, Value] = {}
    for combo in itertools.product(*supports):
        vecs = [state.grid.candidates[d][k] for d, (k, _) in zip(deps, combo)]
        raw = [bp.convert(x, state.fg.backend) for x in v2f_raw(fg, bp, i, vecs)]
        marg, integral = finish(bp, raw, True)
        w = sp.prod_all(w for _, w in combo)
        if state.mode == "weighted":
            w = sp.times(w, integral)
        groups[marg] = sp.plus(groups.get(marg, sp.one_plus), w)
    keys = list(groups)
    if not keys:
        return {}
    return dict(zip(keys, sp.normalize([groups[k] for k in keys])))


def sat_bias(state: SurveyState, i: int) -> tuple[float, float, float]:
    """(w_plus, w_minus, w_zero) for a binary or-and variable.

    Weights of surveys forcing x_i = 1, forcing x_i = 0, or leaving it free,
    renormalized after discarding contradictory marginals.
    """
    if state.clauses is not None:
        free, ones, zeros = 1, 1, 1
        for a in state.fg.var_factors[i]:
            vec = state.eta[("f", a, i)]
            free *= vec[_FREE]
            ones *= vec[_FREE] + vec[_FORCE1]
            zeros *= vec[_FREE] + vec[_FORCE0]
        plus, minus, zero = ones - free, zeros - free, free
    else:
        groups = sp_marginal_over_marginals(state, i)
        plus = groups.get((False, True), 0)
        minus = groups.get((True, False), 0)
        zero = groups.get((True, True), 0)
    total = plus + minus + zero
    if total == 0:
        return 0.0, 0.0, 0.0
    return plus / total, minus / total, zero / total


# ---------------------------------------------------------------------------
# the integral of the survey factor graph


def _sp_factor_graph(state: SurveyState):
    """Factor graph whose variables are (v2f, f2v) candidate pairs per edge.

    Domains are restricted to candidates in the survey support.  Returns the
    graph and a list of constants (isolated variables) to fold in.
    """
    fg, bp, sp = state.fg, state.bp, state.sp
    weighted = state.mode == "weighted"
    edges = list(fg.edges())
    eid = {e: n for n, e in enumerate(edges)}
    pairs = []
    for i, a in edges:
        sv = [k for k, _ in _support(state, ("v", i, a))]
        sf = [k for k, _ in _support(state, ("f", a, i))]
        pairs.append([(x, y) for x in sv for y in sf])
    if any(not p for p in pairs):
        return None, []
    cand = state.grid.candidates
    factors = []
    constants = []

    def cap_check(scope):
        if math.prod(len(pairs[e]) for e in scope) > (1 << 20):
            raise EnumerationCapExceeded("survey factor table too large")

    for a, f in enumerate(fg.factors):
        scope = [eid[(j, a)] for j in f.scope]
        cap_check(scope)
        table = []
        for st in itertools.product(*(pairs[e] for e in scope)):
            ok = True
            for pos, j in enumerate(f.scope):
                deps = [("v", jj, a) for jj in f.scope if jj != j]
                combo = tuple(st[k][0] for k, jj in enumerate(f.scope) if jj != j)
                idx, _ = _message(state, ("f", a, j), combo, deps)
                if idx != st[pos][1]:
                    ok = False
                    break
            val = sp.indicator(ok)
            if ok and weighted:
                msgs = [cand[("v", j, a)][st[k][0]] for k, j in enumerate(f.scope)]
                val = sp.times(val, _factor_integral(fg, bp, a, msgs))
            table.append(val)
        factors.append((scope, table))
    for i in range(fg.n_vars):
        nb = fg.var_factors[i]
        if not nb:
            if weighted:
                constants.append(bp.sum_all([bp.one_times] * fg.domains[i]))
            continue
        scope = [eid[(i, a)] for a in nb]
        cap_check(scope)
        table = []
        for st in itertools.product(*(pairs[e] for e in scope)):
            ok = True
            for pos, a in enumerate(nb):
                deps = [("f", b, i) for b in nb if b != a]
                combo = tuple(st[k][1] for k, b in enumerate(nb) if b != a)
                idx, _ = _message(state, ("v", i, a), combo, deps)
                if idx != st[pos][0]:
                    ok = False
                    break
            val = sp.indicator(ok)
            if ok and weighted:
                msgs = [cand[("f", a, i)][st[k][1]] for k, a in enumerate(nb)]
                val = sp.times(val, bp.sum_all(v2f_raw(fg, bp, i, msgs)))
            table.append(val)
        factors.append((scope, table))
    if weighted:
        for n, (i, a) in enumerate(edges):
            table = []
            for x, y in pairs[n]:
                mv, mf = cand[("v", i, a)][x], cand[("f", a, i)][y]
                b = bp.sum_all(bp.times(p, q) for p, q in zip(mv, mf))
                table.append(sp.invert(b))
            factors.append(([n], table))
    return build([len(p) for p in pairs], factors, backend=state.fg.backend), constants


def _factor_integral(fg: FactorGraph, bp: SemiringSpec, a: int, msgs) -> Value:
    f = fg.factors[a]
    total = bp.one_plus
    for st, val in zip(assignments(fg.factor_domains(a)), f.table):
        for k, m in enumerate(msgs):
            val = bp.times(val, m[st[k]])
        total = bp.plus(total, val)
    return total


@dataclass
class SPIntegral:
    value: Value
    estimate: bool


def sp_integral(state: SurveyState, *, max_iter: int = 500, tol: float = 1e-12) -> SPIntegral:
    """Integral of the survey factor graph from its local BP integrals.

    In counting mode this is the number of BP fixed points (restricted to the
    survey support); in weighted mode it is the combined weight of those fixed
    points.  Exact when the original graph is a forest, flagged as an
    estimate otherwise.
    """
    sp = state.sp
    graph, constants = _sp_factor_graph(state)
    unit = sp.convert(sp.one_times, state.fg.backend)
    const = sp.prod_all([unit] + constants)
    if graph is None:
        return SPIntegral(sp.one_plus, not is_tree(state.fg))
    if graph.n_vars == 0:
        return SPIntegral(const, False)
    exact = is_tree(graph)
    if exact:
        ms, _ = run_tree(graph, sp)
    else:
        ms, rep = run_loopy(graph, sp, max_iter=max_iter, tol=tol)
    try:
        value = integral_decomposition(ms)
    except DivisionByAnnihilator:
        value = sp.one_plus
    return SPIntegral(sp.times(const, value), not exact)


# ---------------------------------------------------------------------------
# exhaustive fixed-point enumeration


def enumerate_bp_fixed_points(
    fg: FactorGraph,
    bp: SemiringSpec | str,
    grid: MessageGrid | None = None,
    cap: int = DEFAULT_ENUM_CAP,
) -> list[MessageState]:
    """Every grid-valued message assignment left unchanged by all BP updates.

    Depth-first search: a message whose inputs are all fixed is forced to its
    update (and checked against the grid); otherwise the search branches on
    one message's candidates.  ``cap`` bounds the number of branch points.
    """
    bp = registry_lookup(bp)
    if grid is None:
        grid = build_message_grid(fg, bp)
    keys = message_keys(fg)
    deps = {k: dependencies(fg, k) for k in keys}
    readers: dict[Key, list[Key]] = {k: [] for k in keys}
    for k in keys:
        for d in deps[k]:
            readers[d].append(k)
    cache: dict = {}
    branches = 0
    found: list[dict[Key, int]] = []

    def forced(key, assign):
        combo = tuple(assign[d] for d in deps[key])
        hit = cache.get((key, combo))
        if hit is None:
            vecs = [grid.candidates[d][k] for d, k in zip(deps[key], combo)]
            vec, _ = bp_message(fg, bp, key, vecs)
            hit = grid.index[key].get(vec)
            if hit is None:
                raise GridClosureError(f"update of {key} produced {vec}, which is not a grid candidate")
            cache[(key, combo)] = hit
        return hit

    def propagate(assign, todo):
        while todo:
            key = todo.pop()
            if not all(d in assign for d in deps[key]):
                continue
            val = forced(key, assign)
            if key in assign:
                if assign[key] != val:
                    return False
                continue
            assign[key] = val
            todo.extend(readers[key])
        return True

    def search(assign, todo):
        nonlocal branches
        if not propagate(assign, todo):
            return
        free = [k for k in keys if k not in assign]
        if not free:
            found.append(dict(assign))
            return
        key = max(free, key=lambda k: sum(1 for d in deps[k] if d in assign))
        branches += 1
        if branches > cap:
            raise EnumerationCapExceeded(f"more than {cap} branch points")
        for c in range(grid.size(key)):
            nxt = dict(assign)
            nxt[key] = c
            search(nxt, list(readers[key]) + [key])

    search({}, list(keys))
    states = []
    for assign in found:
        st = MessageState(fg, bp)
        for (kind, u, w), c in assign.items():
            vec = grid.candidates[(kind, u, w)][c]
            if kind == "v":
                st.v2f[(u, w)] = vec
            else:
                st.f2v[(u, w)] = vec
        states.append(st)
    return states


def fixed_point_frequencies(states: Sequence[MessageState], grid: MessageGrid) -> dict[Key, list[Fraction]]:
    """Per message, the fraction of fixed points taking each candidate value."""
    n = len(states)
    out = {k: [Fraction(0)] * len(c) for k, c in grid.candidates.items()}
    for st in states:
        for (i, a), vec in st.v2f.items():
            out[("v", i, a)][grid.index[("v", i, a)][vec]] += Fraction(1, n)
        for (a, i), vec in st.f2v.items():
            out[("f", a, i)][grid.index[("f", a, i)][vec]] += Fraction(1, n)
    return out
