"""Bootstrap few-shot learning over self-verified solution traces.

Two selection strategies share one candidate-generation step:

  * Score-based ("bfl"): keep the best-scoring trace per training problem
    and sample K of them from the top score tier.
  * Generalization-based ("gfl"): additionally test each kept trace as a
    one-shot example on the other training problems and pick the K with the
    best mean transfer score, at most one per source problem.

Candidate generation gives every attempt one in-context retry when its
first answer scores below perfect, keeping the better attempt.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .budget import BudgetLimits
from .orchestrator import Episode, Mode, Outcome, Trace, retry_in_context, solve
from .tasks.base import Problem, TaskSuite
from .workspace import Workspace

WorkspaceFactory = Callable[[], Workspace]

# --------------------------------------------------------------------------
# types
# --------------------------------------------------------------------------


@dataclass
class LearnConfig:
    n_train: int = 5
    attempts: int = 6
    keep: int = 3
    k_examples: int = 2
    seed: int = 0


@dataclass
class Candidate:
    problem_id: str
    attempt_index: int
    trace: Trace
    score: float
    gen_score: float | None = None


@dataclass
class RenderedExample:
    problem_id: str
    text: str
    score: float
    gen_score: float | None = None


@dataclass
class ExampleSet:
    method: str
    examples: list[RenderedExample] = field(default_factory=list)

    def texts(self) -> list[str]:
        return [e.text for e in self.examples]

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema": 1,
                "method": self.method,
                "examples": [
                    {
                        "problem_id": e.problem_id,
                        "score": e.score,
                        "gen_score": e.gen_score,
                        "text": e.text,
                    }
                    for e in self.examples
                ],
            },
            ensure_ascii=False,
            indent=2,
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "ExampleSet":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            method=obj["method"],
            examples=[
                RenderedExample(
                    problem_id=e["problem_id"],
                    text=e["text"],
                    score=e["score"],
                    gen_score=e.get("gen_score"),
                )
                for e in obj["examples"]
            ],
        )


# --------------------------------------------------------------------------
# rendering traces as examples
# --------------------------------------------------------------------------


def render_example(problem: Problem, trace: Trace) -> str:
    """One-shot example block: the problem, then the full alternating
    exchange verbatim, ending at the answering turn."""
    if trace.outcome is not Outcome.ANSWERED:
        raise ValueError("only answered traces can serve as examples")
    turns = trace.conversation
    start = next(i for i, t in enumerate(turns) if t.role == "assistant")
    parts = [f"# EXAMPLE PROBLEM\n{problem.prompt}\n\n# EXAMPLE SOLUTION TRACE"]
    for turn in turns[start:]:
        label = "ASSISTANT:" if turn.role == "assistant" else "USER:"
        parts.append(f"{label}\n{turn.content}")
    return "\n\n".join(parts)


# --------------------------------------------------------------------------
# candidate generation (attempts with one in-context retry each)
# --------------------------------------------------------------------------


def generate_candidates(
    suite: TaskSuite,
    backend,
    workspace_factory: WorkspaceFactory,
    cfg: LearnConfig,
    limits: BudgetLimits | None = None,
) -> dict[str, list[Candidate]]:
    """All attempts for the first n_train problems, in deterministic order."""
    limits = limits or BudgetLimits()
    problems = suite.problems[: cfg.n_train]
    out: dict[str, list[Candidate]] = {}
    for problem in problems:
        attempts: list[Candidate] = []
        for j in range(cfg.attempts):
            workspace = workspace_factory()
            try:
                episode = Episode(
                    problem=problem,
                    mode=Mode.CODE,
                    limits=limits,
                    episode_id=f"{problem.id}-a{j}",
                )
                trace = solve(episode, backend, workspace)
                trace.score = suite.verifier.verify(problem, trace.answer).score
                best_trace, best_score = trace, trace.score
                if best_score < 1 and trace.outcome is not Outcome.ABORTED:
                    retried = retry_in_context(trace, best_score, backend, workspace)
                    retried.score = suite.verifier.verify(problem, retried.answer).score
                    if retried.score > best_score:
                        best_trace, best_score = retried, retried.score
            finally:
                workspace.close()
            attempts.append(
                Candidate(
                    problem_id=problem.id,
                    attempt_index=j,
                    trace=best_trace,
                    score=best_score,
                )
            )
        out[problem.id] = attempts
    return out


# --------------------------------------------------------------------------
# filtering and selection
# --------------------------------------------------------------------------


def _score_key(c: Candidate) -> tuple:
    # higher score, then fewer turns, fewer tokens, earlier attempt
    return (
        -c.score,
        c.trace.budget_final.turns_used,
        c.trace.budget_final.tokens_used,
        c.attempt_index,
    )


def _gen_key(c: Candidate) -> tuple:
    gen = c.gen_score if c.gen_score is not None else float("-inf")
    return (-gen,) + _score_key(c)


def filter_top_by_score(candidates: list[Candidate], keep: int) -> list[Candidate]:
    """Best ``keep`` answered candidates by score, deterministic ties."""
    eligible = [c for c in candidates if c.trace.outcome is Outcome.ANSWERED]
    return sorted(eligible, key=_score_key)[:keep]


def generalization_eval(
    candidate: Candidate,
    own_problem: Problem,
    other_problems: list[Problem],
    backend,
    workspace_factory: WorkspaceFactory,
    verifier,
    limits: BudgetLimits | None = None,
) -> float:
    """Mean of the candidate's own score and its one-shot transfer scores."""
    limits = limits or BudgetLimits()
    example_text = render_example(own_problem, candidate.trace)
    scores = [candidate.score]
    for problem in other_problems:
        workspace = workspace_factory()
        try:
            episode = Episode(
                problem=problem,
                mode=Mode.CODE,
                examples=[example_text],
                limits=limits,
                episode_id=(
                    f"{candidate.problem_id}-a{candidate.attempt_index}-on-{problem.id}"
                ),
            )
            trace = solve(episode, backend, workspace)
            scores.append(verifier.verify(problem, trace.answer).score)
        finally:
            workspace.close()
    return sum(scores) / len(scores)


def pick_examples(
    kept_by_problem: dict[str, list[Candidate]], k: int
) -> list[Candidate]:
    """Per-problem argmax of gen_score, then the top k across problems."""
    bests = []
    for candidates in kept_by_problem.values():
        scored = [c for c in candidates if c.gen_score is not None]
        if scored:
            bests.append(min(scored, key=_gen_key))
    return sorted(bests, key=_gen_key)[:k]


def select_gfl(
    suite: TaskSuite,
    backend,
    workspace_factory: WorkspaceFactory,
    cfg: LearnConfig,
    limits: BudgetLimits | None = None,
    candidates: dict[str, list[Candidate]] | None = None,
) -> ExampleSet:
    """Full generalization-guided selection pipeline."""
    limits = limits or BudgetLimits()
    problems = suite.problems[: cfg.n_train]
    by_id = {p.id: p for p in problems}
    if candidates is None:
        candidates = generate_candidates(suite, backend, workspace_factory, cfg, limits)
    kept = {pid: filter_top_by_score(cands, cfg.keep) for pid, cands in candidates.items()}
    for pid, cands in kept.items():
        others = [p for p in problems if p.id != pid]
        for candidate in cands:
            candidate.gen_score = generalization_eval(
                candidate,
                by_id[pid],
                others,
                backend,
                workspace_factory,
                suite.verifier,
                limits,
            )
    chosen = pick_examples(kept, cfg.k_examples)
    return ExampleSet(
        method="gfl",
        examples=[
            RenderedExample(
                problem_id=c.problem_id,
                text=render_example(by_id[c.problem_id], c.trace),
                score=c.score,
                gen_score=c.gen_score,
            )
            for c in chosen
        ],
    )


def select_bfl(
    suite: TaskSuite,
    candidates: dict[str, list[Candidate]],
    cfg: LearnConfig,
) -> ExampleSet:
    """Score-based baseline: seeded sample of per-problem bests from the top
    score tier, extending to the next tier when the pool is short."""
    by_id = {p.id: p for p in suite.problems}
    order = [p.id for p in suite.problems if p.id in candidates]
    bests = []
    for pid in order:
        top = filter_top_by_score(candidates[pid], 1)
        if top:
            bests.append(top[0])
    rng = random.Random(cfg.seed)
    tiers: dict[float, list[Candidate]] = {}
    for c in bests:
        tiers.setdefault(c.score, []).append(c)
    selected: list[Candidate] = []
    for tier_score in sorted(tiers, reverse=True):
        need = cfg.k_examples - len(selected)
        if need <= 0:
            break
        tier = tiers[tier_score]
        if len(tier) <= need:
            selected.extend(tier)
        else:
            selected.extend(rng.sample(tier, need))
    return ExampleSet(
        method="bfl",
        examples=[
            RenderedExample(
                problem_id=c.problem_id,
                text=render_example(by_id[c.problem_id], c.trace),
                score=c.score,
                gen_score=c.gen_score,
            )
            for c in selected
        ],
    )
