import gc
import random
import tracemalloc
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import naive_query
from semiring_gm.algebra import INF
from semiring_gm.demo_graphs import count_nonzero_graph
from semiring_gm.errors import (
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
from semiring_gm.factor_graph import build
from semiring_gm.generators import random_graph, value_sampler
from semiring_gm.oracle import (
    GRAMMAR,
    Lit,
    Query,
    Level,
    classify,
    encode_cnf,
    evaluate_query,
    fast_integral,
    lits_from_ints,
    max_of_min,
    min_of_max,
    parse_query,
)

F = Fraction


def test_parse_basic():
    q = parse_query("max@{0};sum@{1,2}::prod", 4)
    assert [(lv.op, set(lv.vars)) for lv in q.levels] == [("max", {0}), ("sum", {1, 2})]
    assert q.free == {3} and q.expand == "prod"
    assert q.level_index(0) == 2 and q.level_index(1) == 1
    assert parse_query(q.text(), 4) == q


def test_parse_integration_and_all():
    q = parse_query("min@{0,1,2,3}::max", 4)
    assert q.free == frozenset()
    q = parse_query("max@{0}; sum@all ::prod", 4)
    assert q.levels[1].vars == {1, 2, 3}
    q = parse_query("max@{0};sum@all;free@{3}::prod", 4)
    assert q.levels[1].vars == {1, 2} and q.free == {3}
    assert parse_query("max!@{0};sum@{1}::prod", 2).levels[0].poly


@pytest.mark.parametrize(
    "text,exc",
    [
        ("sum@{0};sum@{1}::prod", ConsecutiveOpError),
        ("sum@{0}", QuerySyntaxError),
        ("sum@{0}::pow", QuerySyntaxError),
        ("avg@{0}::prod", QuerySyntaxError),
        ("sum@{a}::prod", QuerySyntaxError),
        ("sum@{}::prod", EmptyLevelError),
        ("sum@{0};max@{0}::prod", PartitionError),
        ("sum@{5}::prod", PartitionError),
        ("sum@all;max@all::prod", PartitionError),
        ("sum@{0};free@{2}::prod", PartitionError),
        ("sum@{0,1,2};max@all::prod", EmptyLevelError),
    ],
)
def test_parse_errors(text, exc):
    with pytest.raises(exc):
        parse_query(text, 3)


def test_syntax_error_carries_grammar():
    with pytest.raises(QuerySyntaxError) as info:
        parse_query("nonsense", 2)
    assert GRAMMAR in str(info.value)


def _cls(text, n=3):
    return classify(parse_query(text, n))


@pytest.mark.parametrize(
    "text,tower,family",
    [
        ("sum@all::prod", "PP", "Sigma"),
        ("max@all::min", "NP", "Psi"),
        ("min@all::max", "coNP", "Phi"),
        ("sum@all::sum", "P", "Delta"),
        ("min@all::min", "P", "Delta"),
        ("max@all::max", "P", "Delta"),
        ("max@{0};sum@{1,2}::prod", "NP^PP", "Psi"),
        ("max!@{0};sum@{1,2}::prod", "P^PP", "Delta"),
        ("or@all::and", "NP", "Psi"),
        ("min@{0};max@{1};sum@{2}::prod", "coNP^NP^PP", "Phi"),
        ("sum@{0};max@{1,2}::sum", "PP^NP", "Sigma"),
        ("max!@{0};sum!@{1};min@{2}::prod", "P^coNP", "Delta"),
    ],
)
def test_classify(text, tower, family):
    c = _cls(text)
    assert str(c.complexity) == tower
    assert c.family == family


def test_classify_sets():
    c = _cls("max!@{0};sum@{1,2}::prod")
    assert c.M == 2 and c.sum_set == {1} and c.poly_set == {2}


def test_classify_rejections():
    with pytest.raises(ProductMarginalizationError):
        _cls("prod@all::sum")
    with pytest.raises(ProductMarginalizationError):
        _cls("max@{0};prod@{1,2}::sum")
    with pytest.raises(NotInHierarchyError):
        _cls("xor@all::and")


def test_evaluate_query_examples():
    fg = build([2], [([0], [F(2), F(5)])])
    assert evaluate_query(fg, parse_query("min@{0}::sum", 1)).scalar == 2
    chain = build([2, 2], [([0, 1], [F(1), F(2), F(3), F(4)])])
    t = evaluate_query(chain, parse_query("sum@{1}::prod", 2))
    assert t.scope == (0,) and t.values == (F(3), F(7))
    assert evaluate_query(chain, parse_query("max@{0};sum@{1}::prod", 2)).scalar == 7


def test_evaluate_query_prod_marginal_is_allowed_under_cap():
    chain = build([2, 2], [([0, 1], [F(1), F(2), F(3), F(4)])])
    assert evaluate_query(chain, parse_query("prod@all::prod", 2)).scalar == 24
    with pytest.raises(ProductMarginalizationCapExceeded):
        evaluate_query(chain, parse_query("prod@all::prod", 2), total_cap=2)
    with pytest.raises(CapExceeded):
        evaluate_query(chain, parse_query("sum@{1}::prod", 2), free_cap=1)


@given(seed=st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_evaluate_query_matches_naive_tensor(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 7)
    fg = random_graph(rng, n, rng.randint(1, 5), value_sampler("sum-product", rng))
    perm = rng.sample(range(n), n)
    cuts = sorted(rng.sample(range(n + 1), min(n + 1, rng.randint(1, 3))))
    groups = [perm[a:b] for a, b in zip([0] + cuts, cuts) if b > a] or [perm]
    ops = []
    for _ in groups:
        ops.append(rng.choice([o for o in ("sum", "min", "max") if not ops or o != ops[-1]]))
    expand = rng.choice(["prod", "sum", "min", "max"])
    q = Query(tuple(Level(o, frozenset(g)) for o, g in zip(ops, groups)), expand, n)
    got = evaluate_query(fg, q)
    want = naive_query(fg, [(lv.op, lv.vars) for lv in q.levels], expand)
    assert list(got.values) == want


def test_sum_sum_closed_form_small():
    fg = build([2, 2], [([0], [F(3), F(4)])])
    assert fast_integral(fg, "sum-sum") == 2 * (3 + 4)
    assert fast_integral(count_nonzero_graph(), "min-min") == 0
    assert fast_integral(count_nonzero_graph(), "max-max") == 3
    with pytest.raises(UnsupportedPattern):
        fast_integral(fg, "sum-prod")


@given(seed=st.integers(0, 10**6), pattern=st.sampled_from(["sum-sum", "min-min", "max-max"]))
@settings(max_examples=40, deadline=None)
def test_fast_integral_matches_oracle(seed, pattern):
    rng = random.Random(seed)
    fg = random_graph(rng, rng.randint(1, 6), rng.randint(1, 5), value_sampler("min-sum", rng, zeros=False))
    marg, exp = pattern.split("-")
    assert fast_integral(fg, pattern) == evaluate_query(fg, parse_query(f"{marg}@all::{exp}", fg.n_vars)).scalar


def test_encode_cnf_tables():
    # only (x0=0, x1=1), row-major index 1, falsifies x0 or not x1
    clause = [(Lit(0, True), Lit(1, False))]
    assert encode_cnf(clause, "or-and").factors[0].table == (True, False, True, True)
    assert encode_cnf(clause, "sum-product").factors[0].table == (1, 0, 1, 1)
    assert encode_cnf(clause, "min-sum").factors[0].table == (0, INF, 0, 0)
    with pytest.raises(EmptyClause):
        encode_cnf([()])
    with pytest.raises(LiteralOutOfRange):
        encode_cnf([(Lit(3, True),)], n_vars=2)
    with pytest.raises(LiteralOutOfRange):
        lits_from_ints([[1, 0]])


def test_cnf_integral_reports_satisfiability():
    sat = encode_cnf(lits_from_ints([[1, -2], [2, 3], [-1, -3]]))
    assert evaluate_query(sat, parse_query("or@all::and", 3)).scalar is True
    unsat = encode_cnf(lits_from_ints([[1], [-1]]))
    assert evaluate_query(unsat, parse_query("or@all::and", 1)).scalar is False
    counts = encode_cnf(lits_from_ints([[1, -2], [2, 3], [-1, -3]]), "sum-product")
    assert evaluate_query(counts, parse_query("sum@all::prod", 3)).scalar == 2


def test_non_commutation_witness():
    table = [[F(0), F(1)], [F(1), F(0)]]
    assert min_of_max(table) == 1
    assert max_of_min(table) == 0


@given(seed=st.integers(0, 10**6))
@settings(max_examples=30, deadline=None)
def test_sum_min_equals_sum_product_on_01(seed):
    rng = random.Random(seed)
    fg = random_graph(rng, rng.randint(1, 6), rng.randint(1, 5), lambda: F(rng.randint(0, 1)))
    n = fg.n_vars
    assert (
        evaluate_query(fg, parse_query("sum@all::min", n)).scalar
        == evaluate_query(fg, parse_query("sum@all::prod", n)).scalar
    )


def _peak_bytes(n):
    fg = build([2] * n, [([v, v + 1], [F(1), F(2), F(3), F(1)]) for v in range(n - 1)])
    q = parse_query("max@{0};sum@all::prod", n)
    gc.collect()
    tracemalloc.start()
    evaluate_query(fg, q)
    _, peak = tracemalloc.get_traced_memory()
    tracemalloc.stop()
    return peak


def test_memory_grows_linearly_with_n():
    # |X| grows 16x from n=8 to n=12; memory must stay far below that.
    small, big = _peak_bytes(8), _peak_bytes(12)
    assert big < 3 * small + 20_000
