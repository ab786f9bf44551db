"""Command-line entry: one figure per invocation.

Exit codes: 0 success, 1 bad figure spec or input table, 2 runtime failure.
"""

import argparse
import sys

from .dataio import DataError
from .figspec import SpecError, load_figure_spec
from .render import render


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="plotkit",
        description="Render surface and curve figures from sweep CSV tables.")
    parser.add_argument("spec", help="figure spec file (flat key=value)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = load_figure_spec(args.spec)
        summary = render(spec)
    except (SpecError, DataError) as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    count = sum(len(panel) for panel in summary["series"].values()) \
        if summary["kind"].startswith("curves") else len(summary["series"])
    print(f"wrote {summary['kind']} figure to {summary['output']} "
          f"({count} series)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
