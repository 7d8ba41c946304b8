"""Evaluation harness: configured runs, trace files, reports, comparisons.

A run evaluates one task with one method and writes, under its output
directory, a traces.jsonl file (one trace per line, schema-tagged), the
learned examples when the method uses them, and a report.json.  Runs are
resumable: problems whose traces are already on disk are skipped, and the
report is rebuilt from the full trace file, so an interrupted run finishes
to the same report as an uninterrupted one.  Evaluation can run across
threads; per-problem results do not depend on scheduling.
"""

from __future__ import annotations

import json
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Callable

from scipy import stats as scipy_stats

from .backends import HTTPBackend, LMConfig
from .budget import BudgetLimits
from .learn import ExampleSet, LearnConfig, generate_candidates, select_bfl, select_gfl
from .orchestrator import Episode, Mode, Trace, solve
from .protocol import AgentMessage, CellStatus, parse_agent_message
from .tasks import EmbeddingTable, TaskSuite, get_verifier, load_problems
from .tasks.countdown import generate_problems as generate_countdown
from .workspace import KernelWorkspace, Workspace

TRACE_SCHEMA = 1

METHODS = ("cot", "codeact", "bfl", "gfl", "cot-gfl")

BackendFactory = Callable[[Any], Any]
WorkspaceFactory = Callable[[], Workspace]

# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------


@dataclass
class RunConfig:
    task: str
    method: str
    output_dir: str
    problems_path: str | None = None
    train_path: str | None = None
    examples_path: str | None = None
    embedding_path: str | None = None
    kernel_command: list[str] | None = None
    lm: LMConfig = field(default_factory=LMConfig)
    limits: BudgetLimits = field(default_factory=BudgetLimits)
    learn: LearnConfig = field(default_factory=LearnConfig)
    parallelism: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got '{self.method}'")

    @classmethod
    def from_dict(cls, obj: dict) -> "RunConfig":
        def build(factory, key):
            known = {f.name for f in fields(factory)}
            return factory(**{k: v for k, v in obj.get(key, {}).items() if k in known})

        return cls(
            task=obj["task"],
            method=obj["method"],
            output_dir=obj["output_dir"],
            problems_path=obj.get("problems"),
            train_path=obj.get("train_problems"),
            examples_path=obj.get("examples"),
            embedding_path=obj.get("embedding_file"),
            kernel_command=obj.get("kernel_command"),
            lm=build(LMConfig, "lm"),
            limits=build(BudgetLimits, "limits"),
            learn=build(LearnConfig, "learn"),
            parallelism=obj.get("parallelism", 1),
            seed=obj.get("seed", 0),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _load_suite(config: RunConfig, which: str) -> TaskSuite:
    path = config.train_path if which == "train" else config.problems_path
    if path:
        problems = load_problems(path)
    elif config.task == "countdown":
        problems = generate_countdown()
        if which == "train":
            problems = problems[: config.learn.n_train]
    else:
        raise ValueError(f"no problem file configured for task '{config.task}'")
    table = (
        EmbeddingTable.load(config.embedding_path) if config.embedding_path else None
    )
    verifier = get_verifier(config.task, embedding_table=table)
    return TaskSuite(name=config.task, problems=problems, verifier=verifier)


def _default_backend_factory(config: RunConfig) -> BackendFactory:
    lm = replace(
        config.lm,
        temperature=config.limits.temperature,
        max_tokens=config.limits.per_call_max_tokens,
    )
    return lambda problem: HTTPBackend(lm)


def _default_workspace_factory(config: RunConfig) -> WorkspaceFactory:
    return lambda: KernelWorkspace(
        command=config.kernel_command,
        per_turn_timeout=config.limits.per_turn_timeout,
    )


# --------------------------------------------------------------------------
# trace files
# --------------------------------------------------------------------------


def write_trace_line(path: Path, trace: Trace, lock: threading.Lock) -> None:
    line = json.dumps({"schema": TRACE_SCHEMA, **trace.to_dict()}, ensure_ascii=False)
    with lock:
        with open(path, "a", encoding="utf-8") as f:
            f.write(line + "\n")


def read_traces(path: str | Path) -> list[Trace]:
    path = Path(path)
    if not path.exists():
        return []
    traces = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if obj.get("schema") != TRACE_SCHEMA:
                raise ValueError(f"unknown trace schema {obj.get('schema')!r}")
            traces.append(Trace.from_dict(obj))
    return traces


# --------------------------------------------------------------------------
# learning phase
# --------------------------------------------------------------------------


def learn_examples(
    config: RunConfig,
    backend_factory: BackendFactory | None = None,
    workspace_factory: WorkspaceFactory | None = None,
) -> ExampleSet:
    """Produce the example set for a method that uses one."""
    backend_factory = backend_factory or _default_backend_factory(config)
    workspace_factory = workspace_factory or _default_workspace_factory(config)
    suite = _load_suite(config, "train")
    backend = backend_factory(None)
    cfg = replace(config.learn, seed=config.seed)
    if config.method in ("gfl", "cot-gfl"):
        return select_gfl(suite, backend, workspace_factory, cfg, config.limits)
    if config.method == "bfl":
        candidates = generate_candidates(
            suite, backend, workspace_factory, cfg, config.limits
        )
        return select_bfl(suite, candidates, cfg)
    raise ValueError(f"method '{config.method}' does not use examples")


# --------------------------------------------------------------------------
# runs
# --------------------------------------------------------------------------


def run(
    config: RunConfig,
    backend_factory: BackendFactory | None = None,
    workspace_factory: WorkspaceFactory | None = None,
) -> dict:
    """Execute a configured run and return its report."""
    backend_factory = backend_factory or _default_backend_factory(config)
    workspace_factory = workspace_factory or _default_workspace_factory(config)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    traces_path = out_dir / "traces.jsonl"

    suite = _load_suite(config, "eval")
    mode = Mode.COT if config.method in ("cot", "cot-gfl") else Mode.CODE

    examples: list[str] = []
    if config.method in ("bfl", "gfl", "cot-gfl"):
        examples_path = (
            Path(config.examples_path)
            if config.examples_path
            else out_dir / "examples.json"
        )
        if examples_path.exists():
            example_set = ExampleSet.load(examples_path)
        else:
            example_set = learn_examples(config, backend_factory, workspace_factory)
            example_set.save(examples_path)
        examples = example_set.texts()

    done = {t.problem_id for t in read_traces(traces_path)}
    todo = [p for p in suite.problems if p.id not in done]
    lock = threading.Lock()

    def evaluate(problem) -> None:
        workspace = workspace_factory()
        try:
            episode = Episode(
                problem=problem,
                mode=mode,
                examples=examples,
                limits=config.limits,
                episode_id=f"{config.method}-{problem.id}",
            )
            trace = solve(episode, backend_factory(problem), workspace)
            trace.score = suite.verifier.verify(problem, trace.answer).score
        finally:
            workspace.close()
        write_trace_line(traces_path, trace, lock)

    if config.parallelism > 1 and len(todo) > 1:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            list(pool.map(evaluate, todo))
    else:
        for problem in todo:
            evaluate(problem)

    report = build_report(config, read_traces(traces_path))
    (out_dir / "report.json").write_text(
        json.dumps(report, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    return report


def _distribution(values: list[float]) -> dict:
    if not values:
        return {"mean": 0.0, "total": 0.0, "max": 0.0}
    return {
        "mean": sum(values) / len(values),
        "total": sum(values),
        "max": max(values),
    }


def build_report(config: RunConfig, traces: list[Trace]) -> dict:
    traces = sorted(traces, key=lambda t: t.problem_id)
    scores = [t.score if t.score is not None else 0.0 for t in traces]
    n = len(traces)
    mean = sum(scores) / n if n else 0.0
    if n > 1:
        var = sum((s - mean) ** 2 for s in scores) / (n - 1)
        sem = math.sqrt(var / n)
    else:
        sem = 0.0
    outcomes: dict[str, int] = {}
    for t in traces:
        outcomes[t.outcome.value] = outcomes.get(t.outcome.value, 0) + 1
    return {
        "schema": TRACE_SCHEMA,
        "task": config.task,
        "method": config.method,
        "model_id": config.lm.model_id,
        "n": n,
        "mean_score": mean,
        "sem_score": sem,
        "outcomes": outcomes,
        "tokens": _distribution([float(t.budget_final.tokens_used) for t in traces]),
        "time": _distribution([t.budget_final.time_used for t in traces]),
        "turns": _distribution([float(t.budget_final.turns_used) for t in traces]),
        "per_problem": [
            {
                "problem_id": t.problem_id,
                "score": t.score,
                "tokens": t.budget_final.tokens_used,
                "secs": t.budget_final.time_used,
                "turns": t.budget_final.turns_used,
                "outcome": t.outcome.value,
            }
            for t in traces
        ],
    }


# --------------------------------------------------------------------------
# analytics
# --------------------------------------------------------------------------


def paired_t_test(a: list[float], b: list[float]) -> dict:
    """Paired t statistic on aligned samples, n-1 degrees of freedom."""
    if len(a) != len(b) or len(a) < 2:
        raise ValueError("need two aligned samples of length >= 2")
    n = len(a)
    diffs = [x - y for x, y in zip(a, b)]
    mean = sum(diffs) / n
    var = sum((d - mean) ** 2 for d in diffs) / (n - 1)
    if var == 0.0:
        t = 0.0 if mean == 0.0 else math.copysign(math.inf, mean)
        p = 1.0 if mean == 0.0 else 0.0
    else:
        t = mean / math.sqrt(var / n)
        p = 2.0 * float(scipy_stats.t.sf(abs(t), n - 1))
    return {"t": t, "p": p, "dof": n - 1, "mean_diff": mean}


def _percent_savings(a: float, b: float) -> float | None:
    """How much less run A spent than run B, as a share of B."""
    if b == 0:
        return None
    return 100.0 * (b - a) / b


def compare(run_a: str | Path, run_b: str | Path) -> dict:
    """Score deltas, resource savings, and a paired t-test over the
    problems common to both runs."""
    traces_a = {t.problem_id: t for t in read_traces(Path(run_a) / "traces.jsonl")}
    traces_b = {t.problem_id: t for t in read_traces(Path(run_b) / "traces.jsonl")}
    common = sorted(set(traces_a) & set(traces_b))
    if not common:
        raise ValueError("runs share no problems")
    sa = [traces_a[p].score or 0.0 for p in common]
    sb = [traces_b[p].score or 0.0 for p in common]
    tok_a = sum(traces_a[p].budget_final.tokens_used for p in common)
    tok_b = sum(traces_b[p].budget_final.tokens_used for p in common)
    time_a = sum(traces_a[p].budget_final.time_used for p in common)
    time_b = sum(traces_b[p].budget_final.time_used for p in common)
    result = {
        "n": len(common),
        "mean_score_a": sum(sa) / len(sa),
        "mean_score_b": sum(sb) / len(sb),
        "score_delta": sum(sa) / len(sa) - sum(sb) / len(sb),
        "token_savings_pct": _percent_savings(tok_a, tok_b),
        "time_savings_pct": _percent_savings(time_a, time_b),
    }
    if len(common) >= 2:
        result["paired_t"] = paired_t_test(sa, sb)
    return result


def trace_metrics(traces: list[Trace]) -> dict:
    """Per-trace resource and code-use metrics, with aggregate means.

    code_reasoning_ratio is the share of assistant characters that sit
    inside code cells.
    """
    per_trace = []
    for t in traces:
        code_chars = 0
        total_chars = 0
        for turn in t.conversation:
            if turn.role != "assistant":
                continue
            total_chars += len(turn.content)
            parsed = parse_agent_message(turn.content)
            if isinstance(parsed, AgentMessage):
                code_chars += sum(len(c.source) for c in parsed.cells)
        errors = sum(
            1
            for r in t.cell_results
            if r.status in (CellStatus.ERROR, CellStatus.INTERRUPTED)
        )
        per_trace.append(
            {
                "problem_id": t.problem_id,
                "tokens": t.budget_final.tokens_used,
                "secs": t.budget_final.time_used,
                "turns": t.budget_final.turns_used,
                "n_cells": len(t.cell_results),
                "n_error_cells": errors,
                "code_chars": code_chars,
                "prose_chars": total_chars - code_chars,
                "code_reasoning_ratio": code_chars / total_chars if total_chars else 0.0,
            }
        )

    def mean_of(key: str) -> float:
        if not per_trace:
            return 0.0
        return sum(m[key] for m in per_trace) / len(per_trace)

    return {
        "per_trace": per_trace,
        "aggregate": {
            "n": len(per_trace),
            "mean_tokens": mean_of("tokens"),
            "mean_turns": mean_of("turns"),
            "mean_cells": mean_of("n_cells"),
            "mean_error_cells": mean_of("n_error_cells"),
            "mean_code_reasoning_ratio": mean_of("code_reasoning_ratio"),
        },
    }


def sweep(
    config: RunConfig,
    turns_list: list[int],
    backend_factory: BackendFactory | None = None,
    workspace_factory: WorkspaceFactory | None = None,
) -> list[dict]:
    """Re-run the config at several max_turns caps; one report per cap."""
    reports = []
    for k in turns_list:
        sub = replace(
            config,
            limits=replace(config.limits, max_turns=k),
            output_dir=str(Path(config.output_dir) / f"turns_{k}"),
        )
        report = run(sub, backend_factory, workspace_factory)
        report["max_turns"] = k
        reports.append(report)
    return reports


__all__ = [
    "METHODS",
    "RunConfig",
    "build_report",
    "compare",
    "learn_examples",
    "paired_t_test",
    "read_traces",
    "run",
    "sweep",
    "trace_metrics",
    "write_trace_line",
]
