"""Survey-guided decimation for CNF satisfiability."""

from __future__ import annotations

import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .oracle import Lit, encode_cnf
from .sp import run_sp, sat_bias

Clause = tuple[Lit, ...]


@dataclass
class DecimationResult:
    """``status`` is ``SAT`` (assignment verified) or ``UNKNOWN``."""

    status: str
    assignment: tuple[int, ...] | None = None
    reason: str | None = None
    certificate: Clause | None = None
    stats: dict = field(default_factory=dict)


def satisfies(clauses: Sequence[Sequence[Lit]], x: Sequence[int]) -> bool:
    return all(any(x[l.var] == int(l.positive) for l in c) for c in clauses)


def violated_clauses(clauses: Sequence[Sequence[Lit]], x: Sequence[int]) -> list[int]:
    return [k for k, c in enumerate(clauses) if not any(x[l.var] == int(l.positive) for l in c)]


def simplify(clauses: Sequence[Clause], fixed: dict[int, int]):
    """Drop satisfied clauses and falsified literals.

    Returns (remaining clauses, falsified clause or None).
    """
    out = []
    for c in clauses:
        if any(l.var in fixed and fixed[l.var] == int(l.positive) for l in c):
            continue
        rest = tuple(l for l in c if l.var not in fixed)
        if not rest:
            return out, c
        out.append(rest)
    return out, None


def unit_propagate(clauses: Sequence[Clause], fixed: dict[int, int]):
    """Apply unit clauses until none remain.  Mutates ``fixed``."""
    current, bad = simplify(clauses, fixed)
    while bad is None:
        units = [c[0] for c in current if len(c) == 1]
        if not units:
            break
        for l in units:
            want = int(l.positive)
            if fixed.get(l.var, want) != want:
                return current, (l,)
            fixed[l.var] = want
        current, bad = simplify(current, fixed)
    return current, bad


def _tidy(clauses: Sequence[Clause]) -> tuple[list[Clause], bool]:
    """Remove duplicate literals and tautologies; flag an empty clause."""
    out = []
    for c in clauses:
        seen = {}
        taut = False
        for l in c:
            if seen.get(l.var, l.positive) != l.positive:
                taut = True
            seen[l.var] = l.positive
        if taut:
            continue
        if not seen:
            return out, True
        out.append(tuple(Lit(v, p) for v, p in seen.items()))
    return out, False


def walksat(
    clauses: Sequence[Clause],
    n_vars: int,
    x: list[int],
    rng: random.Random,
    max_flips: int = 20000,
    noise: float = 0.5,
    frozen: frozenset[int] = frozenset(),
) -> list[int] | None:
    """Stochastic local search starting from ``x``; frozen variables never flip."""
    x = list(x)
    occurs: list[list[int]] = [[] for _ in range(n_vars)]
    for k, c in enumerate(clauses):
        for l in c:
            occurs[l.var].append(k)
    n_true = [sum(1 for l in c if x[l.var] == int(l.positive)) for c in clauses]
    unsat = {k for k, t in enumerate(n_true) if t == 0}

    def breaks(v):
        cnt = 0
        for k in occurs[v]:
            if n_true[k] == 1 and any(l.var == v and x[v] == int(l.positive) for l in clauses[k]):
                cnt += 1
        return cnt

    for _ in range(max_flips):
        if not unsat:
            return x
        k = rng.choice(sorted(unsat))
        cands = [l.var for l in clauses[k] if l.var not in frozen]
        if not cands:
            return None
        scores = [breaks(v) for v in cands]
        if min(scores) > 0 and rng.random() < noise:
            v = rng.choice(cands)
        else:
            v = cands[scores.index(min(scores))]
        x[v] = 1 - x[v]
        for kk in occurs[v]:
            sat_now = any(x[l.var] == int(l.positive) for l in clauses[kk])
            n_true[kk] = sum(1 for l in clauses[kk] if x[l.var] == int(l.positive))
            if sat_now:
                unsat.discard(kk)
            else:
                unsat.add(kk)
    return x if not unsat else None


def _attempt(clauses, n_vars, *, seed, tol, max_iter, bias_threshold, damping, max_flips, fix_fraction):
    rng = random.Random(seed)
    fixed: dict[int, int] = {}
    stats = {"decimated": 0, "sp_runs": 0, "walksat": False}
    while True:
        current, bad = unit_propagate(clauses, fixed)
        if bad is not None:
            return None, bad, stats
        if not current:
            break
        free = sorted({l.var for c in current for l in c})
        local = {v: k for k, v in enumerate(free)}
        sub = [tuple(Lit(local[l.var], l.positive) for l in c) for c in current]
        fg = encode_cnf(sub, "or-and", n_vars=len(free))
        state, report = run_sp(
            fg.to_float(), "or-and", max_iter=max_iter, tol=tol, damping=damping,
            seed=rng.randrange(1 << 30), init="random", compress=True,
            exclude_contradictions=True,
        )
        stats["sp_runs"] += 1
        ranked = []
        if report.converged:
            for k, v in enumerate(free):
                wp, wm, _ = sat_bias(state, k)
                ranked.append((-abs(wp - wm), v, int(wp > wm)))
            ranked.sort()
        if not ranked or -ranked[0][0] < bias_threshold:
            stats["walksat"] = True
            start = [fixed.get(v, rng.randrange(2)) for v in range(n_vars)]
            x = walksat(current, n_vars, start, rng, max_flips=max_flips, frozen=frozenset(fixed))
            if x is None:
                return None, None, stats
            for v, val in fixed.items():
                x[v] = val
            return x, None, stats
        quota = max(1, math.ceil(fix_fraction * len(free)))
        for neg_gap, v, val in ranked[:quota]:
            if -neg_gap < bias_threshold:
                break
            fixed[v] = val
            stats["decimated"] += 1
    return [fixed.get(v, 0) for v in range(n_vars)], None, stats


def decimate(
    clauses: Sequence[Sequence[Lit]],
    n_vars: int | None = None,
    *,
    tol: float = 1e-3,
    max_iter: int = 200,
    bias_threshold: float = 0.05,
    restarts: int = 3,
    seed: int = 0,
    damping: float = 0.0,
    max_flips: int = 20000,
    fix_fraction: float = 0.04,
    threads: int = 1,
) -> DecimationResult:
    """Fix the most biased variables, propagate units, repeat; hand over to
    local search once the surveys carry no bias.

    Each survey run fixes up to ``fix_fraction`` of the remaining free
    variables (at least one), most biased first.

    An assignment is returned only after it has been checked against every
    clause.  Otherwise the result is ``UNKNOWN``; when propagation alone
    falsifies a clause that clause is attached as the certificate.
    """
    clauses = [tuple(Lit(int(v), bool(p)) for v, p in c) for c in clauses]
    if n_vars is None:
        n_vars = max((l.var for c in clauses for l in c), default=-1) + 1
    tidy, empty = _tidy(clauses)
    if empty:
        return DecimationResult("UNKNOWN", reason="ContradictionDetected", certificate=())
    _, bad = unit_propagate(tidy, {})
    if bad is not None:
        return DecimationResult("UNKNOWN", reason="ContradictionDetected", certificate=tuple(bad))

    kwargs = dict(
        tol=tol, max_iter=max_iter, bias_threshold=bias_threshold, damping=damping,
        max_flips=max_flips, fix_fraction=fix_fraction,
    )
    seeds = [seed * 1000003 + r for r in range(restarts + 1)]

    def run(s):
        return _attempt(tidy, n_vars, seed=s, **kwargs)

    last_bad = None
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(run, seeds))
    else:
        outcomes = (run(s) for s in seeds)
    for attempt, (x, bad, stats) in enumerate(outcomes):
        if x is not None and satisfies(clauses, x):
            stats["restarts"] = attempt
            return DecimationResult("SAT", tuple(x), stats=stats)
        if bad is not None:
            last_bad = tuple(bad)
    reason = "ContradictionDetected" if last_bad is not None else "Exhausted"
    return DecimationResult("UNKNOWN", reason=reason, certificate=last_bad)
