"""Exception types shared across the package."""

from __future__ import annotations


class InferenceError(Exception):
    """Base class for every error raised by this package."""


# algebra
class TypeMismatch(InferenceError, TypeError):
    pass


class UndefinedForm(InferenceError, ArithmeticError):
    """0 x inf, inf - inf and similar indeterminate combinations."""


class NotInvertible(InferenceError):
    pass


class DivisionByAnnihilator(InferenceError, ZeroDivisionError):
    pass


class EmptyVector(InferenceError, ValueError):
    pass


class UnknownSemiring(InferenceError, LookupError):
    pass


class ValueParseError(InferenceError, ValueError):
    pass


# factor graphs
class GraphError(InferenceError, ValueError):
    pass


class ScopeOutOfRange(GraphError):
    pass


class TableSizeMismatch(GraphError):
    pass


class EmptyScope(GraphError):
    pass


class DuplicateInScope(GraphError):
    pass


class FactorTooLarge(GraphError):
    pass


class IndexOutOfRange(GraphError):
    pass


class ValueOutOfDomain(GraphError):
    pass


# queries
class QueryError(InferenceError, ValueError):
    pass


class QuerySyntaxError(QueryError):
    pass


class PartitionError(QueryError):
    pass


class ConsecutiveOpError(QueryError):
    pass


class EmptyLevelError(QueryError):
    pass


class ProductMarginalizationError(QueryError):
    pass


class NotInHierarchyError(QueryError):
    """Marginalization op with no place in the complexity hierarchy (xor)."""


class UnsupportedPattern(QueryError):
    pass


class CapExceeded(InferenceError):
    pass


class ProductMarginalizationCapExceeded(CapExceeded):
    """Product marginalization is evaluated, but only under the size cap."""


class EmptyClause(InferenceError, ValueError):
    pass


class LiteralOutOfRange(InferenceError, ValueError):
    pass


# message passing
class NotATree(InferenceError):
    pass


class NotAChoiceSemiring(InferenceError):
    pass


class GridCapExceeded(CapExceeded):
    pass


class EnumerationCapExceeded(CapExceeded):
    pass


class InfiniteMessageSpace(InferenceError):
    pass


class GridClosureError(InferenceError):
    """A BP update of grid-valued inputs produced a message outside the grid."""


# file formats
class ParseError(InferenceError, ValueError):
    def __init__(self, line: int, col: int, reason: str):
        super().__init__(f"line {line}, col {col}: {reason}")
        self.line = line
        self.col = col
        self.reason = reason


class HeaderMismatchWarning(UserWarning):
    pass
