import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semiring_gm.algebra import (
    INF,
    NEG_INF,
    OPS,
    SEMIRINGS,
    annihilator_identity,
    combine,
    format_value,
    get_op,
    invert,
    normalize,
    parse_value,
    registry_lookup,
    to_json_value,
)
from semiring_gm.errors import (
    DivisionByAnnihilator,
    EmptyVector,
    NotInvertible,
    TypeMismatch,
    UndefinedForm,
    UnknownSemiring,
    ValueParseError,
)
from strategies import CARRIER, triples

F = Fraction
NAMES = sorted(SEMIRINGS)


@pytest.mark.parametrize(
    "tag,a,b,expected",
    [
        ("sum", F(2), F(3), F(5)),
        ("prod", F(2), F(3), F(6)),
        ("min", F(2), F(0), F(0)),
        ("max", F(2), F(-1), F(2)),
        ("or", True, False, True),
        ("and", True, False, False),
        ("xor", True, True, False),
        ("sum", F(1), INF, INF),
        ("min", INF, F(3), F(3)),
        ("max", NEG_INF, F(3), F(3)),
    ],
)
def test_combine_examples(tag, a, b, expected):
    assert combine(tag, a, b) == expected


@pytest.mark.parametrize("tag,a,b", [("prod", F(0), INF), ("sum", INF, NEG_INF), ("prod", INF, F(0))])
def test_undefined_forms(tag, a, b):
    with pytest.raises(UndefinedForm):
        combine(tag, a, b)


@pytest.mark.parametrize("tag,a,b", [("sum", True, F(1)), ("or", F(1), True), ("min", "x", F(1))])
def test_carrier_mismatch(tag, a, b):
    with pytest.raises(TypeMismatch):
        combine(tag, a, b)


def test_unknown_names():
    with pytest.raises(UnknownSemiring):
        registry_lookup("plus-times")
    with pytest.raises(UnknownSemiring):
        get_op("gcd")


@pytest.mark.parametrize(
    "name,true,false",
    [
        ("sum-product", 1, 0),
        ("max-product", 1, 0),
        ("min-sum", 0, INF),
        ("min-max", NEG_INF, INF),
        ("or-and", True, False),
        ("xor-and", True, False),
    ],
)
def test_identity_function_values(name, true, false):
    assert annihilator_identity(name) == (true, false)


def test_op_metadata():
    assert {t for t, op in OPS.items() if op.is_choice} == {"min", "max", "or", "and"}
    assert not OPS["xor"].is_idempotent
    for op in OPS.values():
        assert op.reduce([]) == op.identity


@pytest.mark.parametrize("name", NAMES)
@given(data=st.data())
@settings(max_examples=150, deadline=None)
def test_semiring_laws(name, data):
    s = SEMIRINGS[name]
    a, b, c = data.draw(triples(name))
    plus, times = s.plus, s.times
    assert plus(a, plus(b, c)) == plus(plus(a, b), c)
    assert times(a, times(b, c)) == times(times(a, b), c)
    assert plus(a, b) == plus(b, a)
    assert times(a, b) == times(b, a)
    assert times(a, plus(b, c)) == plus(times(a, b), times(a, c))
    assert plus(a, s.one_plus) == a
    assert times(a, s.one_times) == a
    assert times(a, s.one_plus) == s.one_plus


@pytest.mark.parametrize("name", [n for n in NAMES if SEMIRINGS[n].expand_invertible])
@given(data=st.data())
@settings(max_examples=100, deadline=None)
def test_normalize_properties(name, data):
    s = SEMIRINGS[name]
    v = data.draw(st.lists(CARRIER[name], min_size=1, max_size=5))
    n = normalize(s, v)
    if s.sum_all(v) == s.one_plus:
        assert n == [s.one_plus] * len(v)
    else:
        assert s.sum_all(n) == s.one_times
    assert normalize(s, n) == n


def test_normalize_fixed_examples():
    assert normalize("sum-product", [F(1), F(3)]) == [F(1, 4), F(3, 4)]
    assert normalize("min-sum", [F(5), F(2), INF]) == [F(3), F(0), INF]
    assert normalize("max-product", [F(1), F(4)]) == [F(1, 4), F(1)]
    assert normalize("min-max", [F(5), F(2)]) == [F(5), F(2)]
    with pytest.raises(EmptyVector):
        normalize("sum-product", [])


def test_invert():
    assert invert("sum-product", F(4)) == F(1, 4)
    assert invert("min-sum", F(3)) == F(-3)
    with pytest.raises(DivisionByAnnihilator):
        invert("sum-product", F(0))
    with pytest.raises(DivisionByAnnihilator):
        invert("min-sum", INF)
    with pytest.raises(NotInvertible):
        invert("min-max", F(1))
    with pytest.raises(NotInvertible):
        invert("or-and", True)


@given(st.lists(st.integers(0, 1), min_size=1, max_size=6))
def test_product_equals_min_on_01(xs):
    vals = [F(x) for x in xs]
    assert OPS["prod"].reduce(vals) == OPS["min"].reduce(vals)


@given(st.one_of(st.fractions(max_denominator=50), st.sampled_from([INF, NEG_INF]), st.booleans()))
def test_value_text_round_trip(x):
    assert parse_value(format_value(x)) == x


def test_parse_value_forms():
    assert parse_value("7/2") == F(7, 2)
    assert parse_value("3.5") == F(7, 2)
    assert parse_value("3.5", "float64") == 3.5
    assert parse_value("-inf") == NEG_INF
    assert parse_value("TRUE") is True
    for bad in ("", "1/0", "abc", "nan?"):
        with pytest.raises(ValueParseError):
            parse_value(bad)


def test_json_encoding():
    assert to_json_value(F(1, 3)) == "1/3"
    assert to_json_value(INF) == "inf"
    assert to_json_value(0.5) == 0.5
    assert to_json_value(True) is True


def test_convert_backends():
    s = SEMIRINGS["sum-product"]
    assert s.convert(F(1, 4), "float64") == 0.25
    assert s.convert(INF, "rational") == INF
    assert isinstance(s.convert(2, "rational"), Fraction)
    assert math.isinf(s.convert(INF, "float64"))
