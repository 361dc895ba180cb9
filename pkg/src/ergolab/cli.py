"""Command line entry point.

    ergolab <kind> --config FILE [--seed S] [--out DIR]
    ergolab acceptance [--out DIR] [--criteria 1 2 ...]

Exit status: 0 on success, 1 when an acceptance verdict fails, 2 on usage
errors (bad config, unknown kind, budget over its ceiling).
"""
from __future__ import annotations

import argparse
import sys

from .config import KINDS, ExperimentConfig, UsageError
from .io import dumps
from .orbitstats import BudgetError
from .systems import ConfigError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ergolab", description="Run an ergolab experiment from a config file.")
    sub = p.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    for kind in KINDS:
        if kind == "acceptance":
            a = sub.add_parser(kind, help="run every acceptance criterion")
            a.add_argument("--out", help="directory for report.json")
            a.add_argument("--criteria", type=int, nargs="+", help="run only these criterion numbers")
            continue
        k = sub.add_parser(kind, help=f"run an experiment of kind {kind}")
        k.add_argument("--config", required=True, help="experiment config file")
        k.add_argument("--seed", type=int, help="override the config seed")
        k.add_argument("--out", help="output directory (overrides the config)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    from .harness import run

    if args.kind == "acceptance":
        from .acceptance import acceptance_suite
        report = acceptance_suite(out=args.out, numbers=args.criteria)
        for line in report.results["lines"]:
            print(line)
        return EXIT_OK if report.passed else EXIT_FAIL
    try:
        cfg = ExperimentConfig.from_file(args.config)
        if cfg.kind != args.kind:
            raise UsageError(f"{args.config}: [experiment] kind is {cfg.kind!r} but the command is {args.kind!r}")
        cfg = cfg.with_overrides(seed=args.seed, out=args.out)
        report = run(cfg)
    except (UsageError, BudgetError, ConfigError) as exc:
        print(f"ergolab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(dumps(report.results))
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
