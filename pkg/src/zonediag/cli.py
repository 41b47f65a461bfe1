"""Command line: ``zonediag run <file|name>`` and ``zonediag list``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from pydantic import ValidationError

from . import scenario
from .runner import run_scenario

EXIT_PARSE = 2


def build_parser():
    p = argparse.ArgumentParser(prog="zonediag", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario file or a bundled scenario by name")
    run.add_argument("scenario", help="path to a .toml scenario or a bundled name")
    run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run.add_argument("--grid", type=int, default=None, help="pixels per axis")
    run.add_argument("--max-iter", type=int, default=None, help="cap on Dom applications")
    run.add_argument("--out", type=Path, default=None, help="output directory (default out/<name>)")
    sub.add_parser("list", help="list bundled scenarios")
    return p


def cmd_list(out=None):
    out = out or sys.stdout
    for name in scenario.bundled_names():
        sc = scenario.parse(scenario.bundled_text(name))
        out.write(f"{name:<26} {sc.reproduces}\n")
    return 0


def cmd_run(args, out=None, err=None):
    out, err = out or sys.stdout, err or sys.stderr
    try:
        sc = scenario.load(args.scenario)
    except (ValidationError, ValueError, FileNotFoundError) as exc:
        err.write(f"zonediag: cannot load scenario: {exc}\n")
        return EXIT_PARSE
    if args.grid is not None and args.grid < 2:
        err.write("zonediag: --grid must be at least 2\n")
        return EXIT_PARSE
    if args.max_iter is not None and args.max_iter < 1:
        err.write("zonediag: --max-iter must be at least 1\n")
        return EXIT_PARSE
    dest = args.out or Path("out") / sc.name
    code, runner = run_scenario(sc, dest, args.grid, args.max_iter, args.seed)
    out.write((dest / "report.txt").read_text())
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "list":
        return cmd_list()
    return cmd_run(args)


if __name__ == "__main__":
    sys.exit(main())
