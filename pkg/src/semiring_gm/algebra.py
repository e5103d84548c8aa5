"""Commutative semigroups and semirings over exact and floating values.

Values are ``fractions.Fraction`` (exact backend), ``float`` (float64
backend) or ``bool``.  Infinities are always the float ``inf``/``-inf``,
which compare and add correctly against ``Fraction``.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Callable, Iterable, Sequence, Union

from .errors import (
    DivisionByAnnihilator,
    EmptyVector,
    NotInvertible,
    TypeMismatch,
    UndefinedForm,
    UnknownSemiring,
    ValueParseError,
)

INF = math.inf
NEG_INF = -math.inf

Value = Union[Fraction, float, bool, int]

BACKENDS = ("rational", "float64")


def _sum(a, b):
    r = a + b
    if r != r:
        raise UndefinedForm(f"{a} + {b}")
    return r


def _prod(a, b):
    r = a * b
    if r != r:
        raise UndefinedForm(f"{a} * {b}")
    return r


def _min(a, b):
    return b if b < a else a


def _max(a, b):
    return b if b > a else a


def _or(a, b):
    return a or b


def _and(a, b):
    return a and b


@dataclass(frozen=True)
class SemigroupOp:
    """A commutative semigroup operation together with its identity.

    ``fn`` skips carrier checks and is meant for inner loops; ``combine``
    is the checked entry point.
    """

    tag: str
    identity: Value
    is_choice: bool
    is_idempotent: bool
    carrier: str
    fn: Callable[[Value, Value], Value] = field(compare=False, repr=False)

    def combine(self, a: Value, b: Value) -> Value:
        _check_carrier(self, a)
        _check_carrier(self, b)
        return self.fn(a, b)

    def reduce(self, values: Iterable[Value]) -> Value:
        return reduce(self.fn, values, self.identity)


def _carrier_of(x) -> str:
    if isinstance(x, bool):
        return "bool"
    if isinstance(x, (int, Fraction, float)):
        return "num"
    raise TypeMismatch(f"unsupported value type {type(x).__name__}")


def _check_carrier(op: SemigroupOp, x) -> None:
    if _carrier_of(x) != op.carrier:
        raise TypeMismatch(f"{op.tag} expects {op.carrier} values, got {x!r}")


OPS: dict[str, SemigroupOp] = {
    "sum": SemigroupOp("sum", Fraction(0), False, False, "num", _sum),
    "prod": SemigroupOp("prod", Fraction(1), False, False, "num", _prod),
    "min": SemigroupOp("min", INF, True, True, "num", _min),
    "max": SemigroupOp("max", NEG_INF, True, True, "num", _max),
    "or": SemigroupOp("or", False, True, True, "bool", _or),
    "and": SemigroupOp("and", True, True, True, "bool", _and),
    "xor": SemigroupOp("xor", False, False, False, "bool", operator.ne),
}


def get_op(tag: str | SemigroupOp) -> SemigroupOp:
    if isinstance(tag, SemigroupOp):
        return tag
    try:
        return OPS[tag]
    except KeyError:
        raise UnknownSemiring(f"unknown operation {tag!r}; expected one of {sorted(OPS)}") from None


def combine(op: str | SemigroupOp, a: Value, b: Value) -> Value:
    """Apply a semigroup operation with carrier and indeterminate-form checks.

    >>> combine("min", Fraction(2), Fraction(0))
    Fraction(0, 1)
    """
    return get_op(op).combine(a, b)


@dataclass(frozen=True)
class SemiringSpec:
    """A commutative semiring (marg, expand) with its two identities.

    ``one_plus`` is the identity of ``marg`` and the annihilator of
    ``expand``; ``one_times`` is the identity of ``expand``.
    """

    name: str
    marg: SemigroupOp
    expand: SemigroupOp
    one_plus: Value
    one_times: Value
    expand_invertible: bool
    _inverse: Callable[[Value], Value] | None = field(default=None, compare=False, repr=False)

    @property
    def carrier(self) -> str:
        return self.marg.carrier

    def plus(self, a: Value, b: Value) -> Value:
        return self.marg.fn(a, b)

    def times(self, a: Value, b: Value) -> Value:
        return self.expand.fn(a, b)

    def sum_all(self, values: Iterable[Value]) -> Value:
        return reduce(self.marg.fn, values, self.one_plus)

    def prod_all(self, values: Iterable[Value]) -> Value:
        return reduce(self.expand.fn, values, self.one_times)

    def indicator(self, cond: bool) -> Value:
        return self.one_times if cond else self.one_plus

    def invert(self, a: Value) -> Value:
        return invert(self, a)

    def normalize(self, v: Sequence[Value]) -> list[Value]:
        return normalize(self, v)

    def convert(self, x: Value, backend: str) -> Value:
        """Cast a value to the requested numeric backend (booleans pass through)."""
        if isinstance(x, bool) or self.carrier == "bool":
            return x
        if backend == "float64":
            return float(x)
        if isinstance(x, float) and math.isinf(x):
            return x
        return Fraction(x)


def _recip(a):
    if isinstance(a, float):
        return 1.0 / a
    return Fraction(1) / a


def _neg(a):
    return -a


def _make_registry() -> dict[str, SemiringSpec]:
    o = OPS
    return {
        "sum-product": SemiringSpec("sum-product", o["sum"], o["prod"], Fraction(0), Fraction(1), True, _recip),
        "max-product": SemiringSpec("max-product", o["max"], o["prod"], Fraction(0), Fraction(1), True, _recip),
        "min-sum": SemiringSpec("min-sum", o["min"], o["sum"], INF, Fraction(0), True, _neg),
        "min-max": SemiringSpec("min-max", o["min"], o["max"], INF, NEG_INF, False),
        "or-and": SemiringSpec("or-and", o["or"], o["and"], False, True, False),
        "xor-and": SemiringSpec("xor-and", o["xor"], o["and"], False, True, False),
    }


SEMIRINGS: dict[str, SemiringSpec] = _make_registry()


def registry_lookup(name: str | SemiringSpec) -> SemiringSpec:
    if isinstance(name, SemiringSpec):
        return name
    try:
        return SEMIRINGS[name]
    except KeyError:
        raise UnknownSemiring(f"unknown semiring {name!r}; expected one of {sorted(SEMIRINGS)}") from None


get_semiring = registry_lookup


def annihilator_identity(s: SemiringSpec | str) -> tuple[Value, Value]:
    """Values of the identity function: (value for true, value for false)."""
    s = registry_lookup(s)
    return s.one_times, s.one_plus


def invert(s: SemiringSpec | str, a: Value) -> Value:
    """Inverse of ``a`` under the expansion operation."""
    s = registry_lookup(s)
    if not s.expand_invertible:
        raise NotInvertible(f"{s.name}: expansion operation {s.expand.tag} has no inverse")
    if a == s.one_plus:
        raise DivisionByAnnihilator(f"{s.name}: cannot invert the annihilator {format_value(a)}")
    return s._inverse(a)


def normalize(s: SemiringSpec | str, v: Sequence[Value]) -> list[Value]:
    """Scale ``v`` so that its marginalization equals the expansion identity.

    A vector whose marginalization is the annihilator maps to the all-annihilator
    vector.  Semirings without an inverse return ``v`` unchanged; callers read
    ``s.expand_invertible`` to know whether the result is normalized.
    """
    s = registry_lookup(s)
    if len(v) == 0:
        raise EmptyVector("cannot normalize an empty vector")
    if not s.expand_invertible:
        return list(v)
    total = s.sum_all(v)
    if total == s.one_plus:
        return [s.one_plus] * len(v)
    inv = s._inverse(total)
    return [s.expand.fn(x, inv) for x in v]


# ---------------------------------------------------------------------------
# textual values


def parse_value(text: str, backend: str = "rational") -> Value:
    """Parse ``3.5``, ``7/2``, ``inf``, ``-inf``, ``true`` or ``false``."""
    t = text.strip().lower()
    if t in ("inf", "+inf"):
        return INF
    if t == "-inf":
        return NEG_INF
    if t == "true":
        return True
    if t == "false":
        return False
    try:
        q = Fraction(t)
    except (ValueError, ZeroDivisionError):
        raise ValueParseError(f"not a value: {text!r}") from None
    return float(q) if backend == "float64" else q


def format_value(x: Value) -> str:
    """Canonical text form: lowest-terms rationals, ``inf``, ``true``."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(Fraction(x))


def to_json_value(x: Value):
    """JSON-friendly encoding: rationals and infinities become strings."""
    if isinstance(x, bool):
        return x
    if isinstance(x, float) and not math.isinf(x):
        return x
    return format_value(x)
