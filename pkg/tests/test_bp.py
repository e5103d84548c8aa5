import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_marginals, naive_query
from semiring_gm.algebra import INF, SEMIRINGS, registry_lookup
from semiring_gm.bp import (
    check_fixed_point,
    decode,
    f2v_raw,
    finish,
    init_state,
    integral_decomposition,
    local_integrals,
    marginal_factor,
    marginal_region,
    marginal_variable,
    region_is_exact,
    run_loopy,
    run_tree,
    v2f_raw,
)
from semiring_gm.demo_graphs import region_tree
from semiring_gm.errors import DivisionByAnnihilator, NotAChoiceSemiring, NotATree, NotInvertible
from semiring_gm.factor_graph import build, evaluate
from semiring_gm.generators import random_tree, value_sampler
from semiring_gm.oracle import brute_integral, brute_marginal, encode_cnf, lits_from_ints

F = Fraction
CHAIN = build([2, 2], [([0, 1], [F(1), F(2), F(3), F(4)])])


def test_v2f_examples():
    fg = build([2], [([0], [F(1)] * 2)] * 3)
    sp = registry_lookup("sum-product")
    raw = v2f_raw(fg, sp, 0, [(F(1, 2), F(1, 2)), (F(1, 5), F(4, 5))])
    assert raw == [F(1, 10), F(2, 5)]
    assert finish(sp, raw, True)[0] == (F(1, 5), F(4, 5))
    ms = registry_lookup("min-sum")
    raw = v2f_raw(fg, ms, 0, [(F(0), F(2)), (F(1), F(0))])
    assert raw == [F(1), F(2)]
    assert finish(ms, raw, True)[0] == (F(0), F(1))
    assert v2f_raw(fg, sp, 0, []) == [1, 1]


def test_f2v_identity_matrix():
    fg = build([2, 2], [([0, 1], [F(1), F(0), F(0), F(1)])])
    raw = f2v_raw(fg, registry_lookup("sum-product"), 0, 0, {1: (F(3, 10), F(7, 10))})
    assert raw == [F(3, 10), F(7, 10)]


def test_chain_example():
    state, margs = run_tree(CHAIN, "sum-product")
    assert margs[0] == (F(3, 10), F(7, 10))
    assert margs[1] == (F(2, 5), F(3, 5))
    assert integral_decomposition(state) == 10
    assert check_fixed_point(state) == (True, 0.0)


def test_single_unary_factor():
    fg = build([3], [([0], [F(1), F(2), F(5)])])
    state, margs = run_tree(fg, "sum-product")
    assert margs[0] == (F(1, 8), F(1, 4), F(5, 8))
    assert integral_decomposition(state) == 8
    raw_state, _ = run_tree(fg, "sum-product", normalized=False)
    assert local_integrals(raw_state).factor[0] == 8
    assert integral_decomposition(raw_state) == 8


def test_run_tree_rejects_loops():
    loop = build([2, 2], [([0, 1], [F(1)] * 4), ([0, 1], [F(1)] * 4)])
    with pytest.raises(NotATree):
        run_tree(loop, "sum-product")


TREE_SEMIRINGS = ["sum-product", "max-product", "min-sum", "min-max", "or-and"]


@pytest.mark.parametrize("name", TREE_SEMIRINGS)
@given(seed=st.integers(0, 10**6))
@settings(max_examples=15, deadline=None)
def test_tree_exactness(name, seed):
    s = registry_lookup(name)
    rng = random.Random(seed)
    fg = random_tree(rng, rng.randint(1, 7), value_sampler(s, rng), max_domain=3)
    _, margs = run_tree(fg, s)
    assert margs == brute_marginals(fg, s)


@pytest.mark.parametrize("name", ["sum-product", "max-product", "min-sum"])
@given(seed=st.integers(0, 10**6))
@settings(max_examples=15, deadline=None)
def test_tree_exactness_float(name, seed):
    s = registry_lookup(name)
    rng = random.Random(seed)
    fg = random_tree(rng, rng.randint(1, 7), value_sampler(s, rng, zeros=False))
    _, margs = run_tree(fg.to_float(), s)
    for got, want in zip(margs, brute_marginals(fg, s)):
        assert max(abs(float(a) - float(b)) for a, b in zip(got, want)) < 1e-9


@pytest.mark.parametrize("name", ["sum-product", "max-product", "min-sum"])
@given(seed=st.integers(0, 10**6))
@settings(max_examples=15, deadline=None)
def test_normalized_messages_and_decomposition(name, seed):
    s = registry_lookup(name)
    rng = random.Random(seed)
    fg = random_tree(rng, rng.randint(1, 7), value_sampler(s, rng, zeros=False))
    state, margs = run_tree(fg, s)
    for vec in list(state.v2f.values()) + list(state.f2v.values()) + margs:
        assert s.sum_all(vec) == s.one_times
    assert integral_decomposition(state) == brute_integral(fg, s)
    li = local_integrals(state)
    for i, a in fg.edges():
        assert li.factor[a] == s.times(li.f2v[(a, i)], li.edge[(i, a)])


def test_decomposition_errors():
    state, _ = run_tree(CHAIN, "min-max")
    with pytest.raises(NotInvertible):
        integral_decomposition(state)
    zero = build([2], [([0], [F(0), F(0)])])
    state, _ = run_tree(zero, "sum-product")
    with pytest.raises(DivisionByAnnihilator):
        integral_decomposition(state)


def test_min_sum_marginals_have_zero_minimum():
    rng = random.Random(3)
    fg = random_tree(rng, 6, value_sampler("min-sum", rng, zeros=False))
    _, margs = run_tree(fg, "min-sum")
    assert all(min(m) == 0 for m in margs)


def test_constraint_factor_marginal_respects_forbidden_rows():
    fg = encode_cnf(lits_from_ints([[1, -2]]), "sum-product")
    state, _ = run_tree(fg, "sum-product")
    assert marginal_factor(state, 0).values[1] == 0


def test_region_marginal_on_example_tree():
    fg, idx = region_tree()
    state, _ = run_tree(fg, "sum-product")
    s = registry_lookup("sum-product")
    for names in ["ijk", "jer", "i", "jerg", "ijkwa", "ijkerhn"]:
        A = sorted(idx[c] for c in names)
        got = marginal_region(state, A)
        assert got.exact and region_is_exact(fg, A)
        assert got.values == brute_marginal(fg, s, A).values
    for names in ["ie", "ij", "erg"]:
        assert not marginal_region(state, [idx[c] for c in names]).exact


def test_loopy_on_tree_reaches_exact_marginals():
    rng = random.Random(8)
    fg = random_tree(rng, 6, value_sampler("sum-product", rng, zeros=False))
    state, rep = run_loopy(fg, "sum-product", tol=0, max_iter=50)
    assert rep.converged
    assert [marginal_variable(state, i) for i in range(fg.n_vars)] == brute_marginals(fg, registry_lookup("sum-product"))


def test_double_edge_loop_discrepancy_is_measurable():
    fg = build([2, 2], [([0, 1], [F(2), F(1), F(1), F(2)])] * 2).to_float()
    state, rep = run_loopy(fg, "sum-product", tol=1e-12)
    assert rep.converged
    exact = brute_marginals(fg, registry_lookup("sum-product"))
    bp = [marginal_variable(state, i) for i in range(2)]
    gap = max(abs(a - b) for m, e in zip(bp, exact) for a, b in zip(m, e))
    # symmetric factors keep BP at the uniform point, which is also exact here
    assert gap < 1e-9


def _ferro_cycle(coupling=2.0, bias=1.5):
    pair = [coupling, 1.0, 1.0, coupling]
    factors = [([0, 1], pair), ([1, 2], pair), ([0, 2], pair), ([0], [bias, 1.0])]
    return build([2, 2, 2], factors, backend="float64")


@pytest.mark.parametrize("schedule", ["synchronous", "sequential"])
@pytest.mark.parametrize("damping", [0.0, 0.5])
def test_ferro_cycle_schedules(schedule, damping):
    fg = _ferro_cycle()
    state, rep = run_loopy(fg, "sum-product", schedule=schedule, damping=damping, tol=1e-10, max_iter=500, seed=4)
    assert rep.converged and rep.max_residual <= 1e-10
    ok, res = check_fixed_point(state, tol=1e-9)
    assert ok
    before = state.copy()
    run_loopy(fg, "sum-product", damping=0.7, max_iter=1, state=state)
    for k, v in before.v2f.items():
        assert max(abs(a - b) for a, b in zip(v, state.v2f[k])) <= 1e-9


def test_schedules_agree_on_marginals():
    fg = _ferro_cycle()
    a, _ = run_loopy(fg, "sum-product", schedule="synchronous", tol=1e-12, max_iter=1000)
    b, _ = run_loopy(fg, "sum-product", schedule="sequential", tol=1e-12, max_iter=1000, seed=9)
    for i in range(3):
        assert max(abs(x - y) for x, y in zip(marginal_variable(a, i), marginal_variable(b, i))) < 1e-8


def test_random_init_is_not_a_fixed_point():
    fg = _ferro_cycle()
    ok, res = check_fixed_point(init_state(fg, "sum-product", init="random", seed=1), tol=1e-9)
    assert not ok and res > 0


def test_loopy_arguments_validated():
    with pytest.raises(ValueError):
        run_loopy(CHAIN, "sum-product", damping=1.0)
    with pytest.raises(ValueError):
        run_loopy(CHAIN, "sum-product", schedule="random")


@pytest.mark.parametrize("name", ["max-product", "min-sum", "min-max", "or-and"])
@given(seed=st.integers(0, 10**6))
@settings(max_examples=15, deadline=None)
def test_decode_attains_integral(name, seed):
    s = registry_lookup(name)
    rng = random.Random(seed)
    fg = random_tree(rng, rng.randint(1, 7), value_sampler(s, rng))
    state, margs = run_tree(fg, s)
    x = decode(state)
    assert evaluate(fg, s, x) == brute_integral(fg, s)


def test_decode_matches_argmax_without_ties():
    fg = build([2, 3], [([0, 1], [F(v) for v in (1, 7, 2, 3, 5, 4)]), ([0], [F(2), F(1)])])
    state, margs = run_tree(fg, "max-product")
    x = decode(state)
    assert x == tuple(m.index(max(m)) for m in margs) == (0, 1)
    with pytest.raises(NotAChoiceSemiring):
        decode(run_tree(fg, "sum-product")[0])


def test_isolated_variable_marginal():
    fg = build([2, 3], [([0], [F(1), F(3)])])
    _, margs = run_tree(fg, "sum-product")
    assert margs[1] == (F(1, 3),) * 3
    _, margs = run_tree(fg, "min-sum")
    assert margs[1] == (0,) * 3
