"""Command-line entry points: run, learn, report, compare, sweep."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness
from .harness import RunConfig


def _print(obj: dict | list) -> None:
    json.dump(obj, sys.stdout, indent=2, ensure_ascii=False)
    sys.stdout.write("\n")


def cmd_run(args: argparse.Namespace) -> int:
    config = RunConfig.from_file(args.config)
    if args.out:
        config.output_dir = args.out
    report = harness.run(config)
    _print(report)
    return 0


def cmd_learn(args: argparse.Namespace) -> int:
    config = RunConfig.from_file(args.config)
    example_set = harness.learn_examples(config)
    example_set.save(args.out)
    _print(
        {
            "method": example_set.method,
            "examples": len(example_set.examples),
            "out": args.out,
        }
    )
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    run_dir = Path(args.run_dir)
    traces = harness.read_traces(run_dir / "traces.jsonl")
    report_path = run_dir / "report.json"
    out: dict = {}
    if report_path.exists():
        out["report"] = json.loads(report_path.read_text(encoding="utf-8"))
    out["metrics"] = harness.trace_metrics(traces)
    _print(out)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    _print(harness.compare(args.run_a, args.run_b))
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    config = RunConfig.from_file(args.config)
    turns = [int(part) for part in args.turns.split(",") if part.strip()]
    reports = harness.sweep(config, turns)
    _print(
        [
            {
                "max_turns": r["max_turns"],
                "mean_score": r["mean_score"],
                "n": r["n"],
            }
            for r in reports
        ]
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="codeloop",
        description="Budgeted code-loop reasoning: runs, learning, reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="evaluate a configured task run")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="override the configured output directory")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("learn", help="bootstrap an example set and save it")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_learn)

    p = sub.add_parser("report", help="metrics for a finished run directory")
    p.add_argument("run_dir")
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("compare", help="compare two run directories")
    p.add_argument("run_a")
    p.add_argument("run_b")
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("sweep", help="re-run at several turn caps")
    p.add_argument("--config", required=True)
    p.add_argument("--turns", required=True, help="comma-separated caps, e.g. 2,4,6")
    p.set_defaults(fn=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
