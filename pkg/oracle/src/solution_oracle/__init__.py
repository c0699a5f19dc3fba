"""Independent sympy-based cross-check of exported PDE solution records."""

from .translate import MalformedInput
from .verify import EXIT_AGREE, EXIT_DISAGREE, EXIT_MALFORMED, OracleReport, oracle_verify

__all__ = [
    "MalformedInput",
    "OracleReport",
    "oracle_verify",
    "EXIT_AGREE",
    "EXIT_DISAGREE",
    "EXIT_MALFORMED",
]
