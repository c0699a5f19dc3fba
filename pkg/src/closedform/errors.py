"""Exception types shared across the package."""


class ExprSyntaxError(ValueError):
    """Raised when expression text does not conform to the grammar.

    Carries the byte offset of the failure and the set of token kinds
    that would have been accepted there.
    """

    def __init__(self, message: str, offset: int, expected: frozenset[str] = frozenset()):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.expected = expected


class SchemaError(ValueError):
    """A problem file or solution record is structurally malformed."""


class SemanticError(ValueError):
    """A problem file parses but violates a semantic constraint."""


class UnsupportedFunctionError(ValueError):
    """An expression uses a function outside the differentiation table."""


class InvalidPositionError(ValueError):
    """A position does not resolve to a node of the given expression."""


class DuplicatePositionError(ValueError):
    """Two insertions in one expansion target the same position."""
