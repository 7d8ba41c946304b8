"""Command-line surface: parser wiring plus the read-only subcommands
run in-process against a finished run directory."""

from __future__ import annotations

import json
import threading

import pytest

from codeloop.budget import BudgetLimits, BudgetState
from codeloop.cli import build_parser, main
from codeloop.harness import RunConfig, build_report, write_trace_line
from codeloop.orchestrator import Mode, Outcome, Trace
from codeloop.backends import ChatTurn


def finished_run(tmp_path, name: str, scored: list[tuple[str, float, int]]):
    run_dir = tmp_path / name
    run_dir.mkdir()
    lock = threading.Lock()
    traces = []
    for pid, score, tokens in scored:
        trace = Trace(
            episode_id=f"e-{pid}",
            problem_id=pid,
            mode=Mode.CODE,
            conversation=[ChatTurn("user", "q"), ChatTurn("assistant", "prose only")],
            cell_results=[],
            answer="a",
            outcome=Outcome.ANSWERED,
            budget_final=BudgetState(tokens_used=tokens, time_used=1.0, turns_used=1),
            turn_stats=[],
            limits=BudgetLimits(),
            score=score,
        )
        traces.append(trace)
        write_trace_line(run_dir / "traces.jsonl", trace, lock)
    config = RunConfig(task="exact", method="codeact", output_dir=str(run_dir))
    (run_dir / "report.json").write_text(
        json.dumps(build_report(config, traces)) + "\n"
    )
    return run_dir


def test_parser_dispatch_table():
    parser = build_parser()
    args = parser.parse_args(["run", "--config", "c.json", "--out", "d"])
    assert (args.command, args.config, args.out) == ("run", "c.json", "d")
    args = parser.parse_args(["learn", "--config", "c.json", "--out", "e.json"])
    assert args.command == "learn"
    args = parser.parse_args(["report", "some/dir"])
    assert args.run_dir == "some/dir"
    args = parser.parse_args(["compare", "a", "b"])
    assert (args.run_a, args.run_b) == ("a", "b")
    args = parser.parse_args(["sweep", "--config", "c.json", "--turns", "2,4,6"])
    assert args.turns == "2,4,6"


def test_parser_rejects_missing_subcommand():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_report_command_prints_report_and_metrics(tmp_path, capsys):
    run_dir = finished_run(tmp_path, "a", [("p1", 1.0, 100), ("p2", 0.5, 300)])
    assert main(["report", str(run_dir)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["report"]["n"] == 2
    assert out["report"]["mean_score"] == 0.75
    assert out["metrics"]["aggregate"]["n"] == 2
    assert out["metrics"]["per_trace"][0]["code_reasoning_ratio"] == 0.0


def test_report_command_without_report_file(tmp_path, capsys):
    run_dir = finished_run(tmp_path, "a", [("p1", 1.0, 100)])
    (run_dir / "report.json").unlink()
    assert main(["report", str(run_dir)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert "report" not in out
    assert out["metrics"]["aggregate"]["n"] == 1


def test_compare_command_prints_savings(tmp_path, capsys):
    dir_a = finished_run(tmp_path, "a", [("p1", 1.0, 100), ("p2", 0.0, 100)])
    dir_b = finished_run(tmp_path, "b", [("p1", 0.0, 400), ("p2", 0.0, 400)])
    assert main(["compare", str(dir_a), str(dir_b)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["n"] == 2
    assert out["score_delta"] == 0.5
    assert out["token_savings_pct"] == 75.0
    assert out["paired_t"]["dof"] == 1
