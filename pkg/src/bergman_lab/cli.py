"""Command-line entry point: ``bergman-lab run|list|verify|clean-cache``.

Exit codes: 0 all assertions pass, 1 assertion failure, 2 usage error,
3 numerics error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .errors import BergmanLabError, DomainError, InsufficientDataError, PreconditionError
from .experiments import (CACHE_ENV, ExperimentConfig, FrameCache, apply_overrides, list_experiments,
                          load_config, run)

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERICS = 0, 1, 2, 3

log = logging.getLogger("bergman_lab")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bergman-lab", description="Bergman kernel experiments")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run one experiment from a YAML config")
    r.add_argument("config", help="YAML experiment config")
    r.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config entry (dotted keys, YAML values); repeatable")
    r.add_argument("--out", help="output directory (overrides the config)")
    r.add_argument("--workers", type=int, help="worker processes (overrides the config)")
    r.add_argument("--no-cache", action="store_true", help="rebuild frames without touching the cache")

    sub.add_parser("list", help="list the experiment catalog")

    v = sub.add_parser("verify", help="run the acceptance suite")
    v.add_argument("--profile", choices=["quick", "full"], default="quick")
    v.add_argument("--criteria", type=int, nargs="+", help="subset of criterion numbers")
    v.add_argument("--json", help="write the suite summary to this file")

    sub.add_parser("clean-cache", help="delete every cached frame")
    return p


def _cache_dir():
    return FrameCache(os.environ.get(CACHE_ENV)).root


def _cmd_run(args) -> int:
    try:
        cfg = apply_overrides(load_config(args.config), args.overrides)
        if args.out:
            cfg["output"] = args.out
        if args.workers:
            cfg["workers"] = args.workers
        config = ExperimentConfig.from_dict(cfg)
    except (OSError, ValueError, TypeError) as exc:
        print(f"bergman-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = run(config, cache_dir=None if args.no_cache else _cache_dir())
    for name, a in report.assertions.items():
        print(f"[{'PASS' if a['passed'] else 'FAIL'}] {name}: value={a['value']} tol={a['tolerance']}")
    print(f"wrote {config.output}/{config.experiment}.{{csv,json,dat}} in {report.wall_time:.1f}s")
    return EXIT_PASS if report.passed else EXIT_FAIL


def _cmd_list(args) -> int:
    for e in list_experiments():
        print(f"{e['name']:15s} {e['description']}  (default k: {e['default_ks']})")
    return EXIT_PASS


def _cmd_verify(args) -> int:
    from .acceptance import CRITERIA, verify_all
    if args.criteria and not set(args.criteria) <= set(CRITERIA):
        print(f"bergman-lab: error: criteria must be in {sorted(CRITERIA)}", file=sys.stderr)
        return EXIT_USAGE
    suite = verify_all(args.profile, _cache_dir(), criteria=args.criteria)
    for r in suite.results:
        print(r.line())
    print(f"{sum(suite.vector())}/{len(suite.results)} criteria passed in {suite.seconds:.1f}s ({args.profile})")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"profile": suite.profile, "seconds": suite.seconds,
                       "results": [{"number": r.number, "name": r.name, "passed": r.passed,
                                    "summary": r.summary, "seconds": r.seconds} for r in suite.results]},
                      fh, indent=1)
    return EXIT_PASS if suite.passed else EXIT_FAIL


def _cmd_clean(args) -> int:
    n = FrameCache(os.environ.get(CACHE_ENV)).clean()
    print(f"removed {n} cache files")
    return EXIT_PASS


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    cmd = {"run": _cmd_run, "list": _cmd_list, "verify": _cmd_verify, "clean-cache": _cmd_clean}[args.command]
    try:
        return cmd(args)
    except (PreconditionError, DomainError, InsufficientDataError) as exc:
        print(f"bergman-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BergmanLabError as exc:
        print(f"bergman-lab: numerics error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICS
    except FloatingPointError as exc:
        print(f"bergman-lab: numerics error: {exc}", file=sys.stderr)
        return EXIT_NUMERICS


if __name__ == "__main__":
    sys.exit(main())
