"""CLI: one solution record against one problem file per invocation.

    solution-oracle <solution.json> <problem.prob>

Prints a one-line JSON report; exits 0 on agreement with the record's
verification flags, 3 on disagreement, 1 on malformed input.
"""

from __future__ import annotations

import sys

from .translate import MalformedInput
from .verify import EXIT_MALFORMED, oracle_verify


def cli(argv: list[str]) -> int:
    if len(argv) != 2:
        print("usage: solution-oracle <solution.json> <problem.prob>", file=sys.stderr)
        return EXIT_MALFORMED
    try:
        report, code = oracle_verify(argv[0], argv[1])
    except MalformedInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    print(report.to_json())
    return code


def main() -> None:
    sys.exit(cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
