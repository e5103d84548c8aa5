"""Generic-semiring inference on factor graphs: exact queries, BP and SP."""

from .algebra import (
    SEMIRINGS,
    SemigroupOp,
    SemiringSpec,
    annihilator_identity,
    combine,
    format_value,
    invert,
    normalize,
    parse_value,
    registry_lookup,
)
from .factor_graph import Factor, FactorGraph, Table, build, evaluate, is_tree, markov_blanket, reduce

__all__ = [
    "SEMIRINGS",
    "SemigroupOp",
    "SemiringSpec",
    "annihilator_identity",
    "combine",
    "format_value",
    "invert",
    "normalize",
    "parse_value",
    "registry_lookup",
    "Factor",
    "FactorGraph",
    "Table",
    "build",
    "evaluate",
    "is_tree",
    "markov_blanket",
    "reduce",
]
