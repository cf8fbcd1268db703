"""Command-line front end: ``solovay-bench SCENARIO [options]``."""

from __future__ import annotations

import argparse
import fnmatch
import os
import sys
from pathlib import Path

from .scenario import ScenarioError, bundled_scenarios, emit_csv, run_scenario

OUTDIR_ENV = "SOLOVAY_BENCH_OUTDIR"


def _resolve(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    for b in bundled_scenarios():
        if b.stem == path:
            return b
    raise ScenarioError(f"no scenario file or bundled scenario named {path!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="solovay-bench",
        description="Run a scenario of constructions and finite-depth checks.")
    ap.add_argument("scenario", nargs="?", help="scenario file, or the name of a bundled scenario")
    ap.add_argument("--depth", type=int, help="override the scenario budget depth (task-level keys still apply)")
    ap.add_argument("--fuel", type=int, help="override the scenario budget fuel (task-level keys still apply)")
    ap.add_argument("--task", action="append", default=[],
                    help="run only matching tasks (glob) and their dependencies; repeatable")
    ap.add_argument("--csv-dir", help=f"write report and CSVs here (env {OUTDIR_ENV} overrides)")
    ap.add_argument("--seed", type=int, help="reserved; deterministic tasks ignore it")
    ap.add_argument("--list", action="store_true", help="list bundled scenarios and exit")
    ap.add_argument("--timings", action="store_true", help="print per-task wall time to stderr")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.list:
        for p in bundled_scenarios():
            print(p.stem)
        return 0
    if not args.scenario:
        print("solovay-bench: a scenario is required (see --list)", file=sys.stderr)
        return 2
    task_filter = None
    if args.task:
        task_filter = lambda name: any(fnmatch.fnmatchcase(name, pat) for pat in args.task)
    try:
        path = _resolve(args.scenario)
        report = run_scenario(path, {"depth": args.depth, "fuel": args.fuel}, task_filter)
    except ScenarioError as exc:
        print(f"solovay-bench: {exc}", file=sys.stderr)
        return 2
    text = report.render()
    sys.stdout.write(text)
    outdir = os.environ.get(OUTDIR_ENV) or args.csv_dir
    if outdir:
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{report.scenario}.report.txt").write_bytes(text.encode("utf-8"))
        for t in report.order:
            if report.tasks[t].tables:
                emit_csv(report, t, out)
    if args.timings:
        sys.stderr.write(report.timings())
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
