"""Seeded random instances for tests and experiment scripts."""

from __future__ import annotations

import math
import random
from fractions import Fraction
from typing import Callable

from .algebra import INF, NEG_INF, SemiringSpec, Value, registry_lookup
from .factor_graph import FactorGraph, build
from .oracle import Lit


def value_sampler(s: SemiringSpec | str, rng: random.Random, zeros: bool = True) -> Callable[[], Value]:
    """Draw factor entries from the carrier of ``s`` (small rationals, a few infinities)."""
    s = registry_lookup(s)
    if s.carrier == "bool":
        return lambda: rng.random() < 0.7
    if s.name in ("sum-product", "max-product"):
        lo = 0 if zeros else 1
        return lambda: Fraction(rng.randint(lo, 6), rng.randint(1, 3))
    if s.name == "min-sum":
        return lambda: INF if zeros and rng.random() < 0.05 else Fraction(rng.randint(-4, 6), rng.randint(1, 2))
    if s.name == "min-max":
        return lambda: rng.choice([NEG_INF, INF]) if rng.random() < 0.05 else Fraction(rng.randint(-3, 4))
    raise ValueError(s.name)


def _table(rng, sample, size):
    return [sample() for _ in range(size)]


def random_tree(
    rng: random.Random,
    n_vars: int,
    sample: Callable[[], Value],
    max_domain: int = 3,
    max_arity: int = 3,
    unary_prob: float = 0.3,
) -> FactorGraph:
    """Connected acyclic factor graph grown one factor at a time."""
    domains = [rng.randint(2, max_domain) for _ in range(n_vars)]
    factors = []
    placed = [0]
    while len(placed) < n_vars:
        anchor = rng.choice(placed)
        k = min(rng.randint(1, max_arity - 1), n_vars - len(placed))
        new = list(range(len(placed), len(placed) + k))
        placed.extend(new)
        scope = [anchor] + new
        factors.append((scope, _table(rng, sample, math.prod(domains[v] for v in scope))))
    for v in range(n_vars):
        if rng.random() < unary_prob:
            factors.append(([v], _table(rng, sample, domains[v])))
    return build(domains, factors)


def random_graph(
    rng: random.Random,
    n_vars: int,
    n_factors: int,
    sample: Callable[[], Value],
    max_domain: int = 3,
    max_arity: int = 3,
) -> FactorGraph:
    domains = [rng.randint(1, max_domain) for _ in range(n_vars)]
    factors = []
    for _ in range(n_factors):
        k = rng.randint(1, min(max_arity, n_vars))
        scope = rng.sample(range(n_vars), k)
        factors.append((scope, _table(rng, sample, math.prod(domains[v] for v in scope))))
    return build(domains, factors)


def random_ksat(rng: random.Random, n_vars: int, n_clauses: int, k: int = 3) -> list[tuple[Lit, ...]]:
    return [
        tuple(Lit(v, rng.random() < 0.5) for v in rng.sample(range(n_vars), k))
        for _ in range(n_clauses)
    ]
