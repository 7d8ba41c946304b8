"""Episode engine: drives one problem through the budgeted reasoning loop.

A code-loop episode alternates model messages with workspace feedback until
the model returns an answer or the budget runs out.  On exhaustion the model
gets exactly one final-guess turn: a fixed user prompt, one completion, and
only a return directive is honored from the reply (cells are not executed),
so turns_used can reach max_turns + 1.  Chain-of-thought episodes are a
single completion with the answer on a trailing "Answer:" line.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field, fields, replace
from enum import Enum

from . import prompts
from .backends import BackendError, ChatTurn, CompletionResult
from .budget import (
    BudgetLimits,
    BudgetState,
    charge,
    is_exhausted,
    low_turn_warning,
    render_budget_report,
)
from .protocol import (
    AgentMessage,
    CellResult,
    CellStatus,
    NudgeRequired,
    parse_agent_message,
    render_feedback,
    render_nudge,
)
from .tasks.base import Problem
from .workspace import UnresolvedReturn, Workspace, resolve_return

# --------------------------------------------------------------------------
# types
# --------------------------------------------------------------------------


class Mode(Enum):
    CODE = "codeact"
    COT = "cot"


class Outcome(Enum):
    ANSWERED = "answered"
    BUDGET_EXHAUSTED = "budget_exhausted"
    ABORTED = "aborted"


@dataclass(frozen=True)
class TurnStat:
    """Per-completion accounting, enough to replay the episode."""

    output_tokens: int
    latency: float
    tokens_estimated: bool = False


@dataclass
class Episode:
    problem: Problem
    mode: Mode = Mode.CODE
    examples: list[str] = field(default_factory=list)
    limits: BudgetLimits = field(default_factory=BudgetLimits)
    episode_id: str = ""

    def __post_init__(self) -> None:
        if not self.episode_id:
            self.episode_id = f"{self.problem.id}-{uuid.uuid4().hex[:8]}"


@dataclass
class Trace:
    episode_id: str
    problem_id: str
    mode: Mode
    conversation: list[ChatTurn]
    cell_results: list[CellResult]
    answer: str | None
    outcome: Outcome
    budget_final: BudgetState
    turn_stats: list[TurnStat]
    limits: BudgetLimits
    score: float | None = None
    error: str = ""

    def to_dict(self) -> dict:
        return {
            "episode_id": self.episode_id,
            "problem_id": self.problem_id,
            "mode": self.mode.value,
            "conversation": [
                {"role": t.role, "content": t.content} for t in self.conversation
            ],
            "cell_results": [
                {
                    "cell_name": r.cell_name,
                    "status": r.status.value,
                    "output": r.output,
                    "error_trace": r.error_trace,
                    "duration": r.duration,
                }
                for r in self.cell_results
            ],
            "answer": self.answer,
            "outcome": self.outcome.value,
            "budget_final": {
                "tokens_used": self.budget_final.tokens_used,
                "time_used": self.budget_final.time_used,
                "turns_used": self.budget_final.turns_used,
            },
            "turn_stats": [
                {
                    "output_tokens": s.output_tokens,
                    "latency": s.latency,
                    "tokens_estimated": s.tokens_estimated,
                }
                for s in self.turn_stats
            ],
            "limits": {f.name: getattr(self.limits, f.name) for f in fields(self.limits)},
            "score": self.score,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Trace":
        return cls(
            episode_id=obj["episode_id"],
            problem_id=obj["problem_id"],
            mode=Mode(obj["mode"]),
            conversation=[
                ChatTurn(t["role"], t["content"]) for t in obj["conversation"]
            ],
            cell_results=[
                CellResult(
                    cell_name=r["cell_name"],
                    status=CellStatus(r["status"]),
                    output=r["output"],
                    error_trace=r["error_trace"],
                    duration=r["duration"],
                )
                for r in obj["cell_results"]
            ],
            answer=obj["answer"],
            outcome=Outcome(obj["outcome"]),
            budget_final=BudgetState(**obj["budget_final"]),
            turn_stats=[
                TurnStat(
                    output_tokens=s["output_tokens"],
                    latency=s["latency"],
                    tokens_estimated=s.get("tokens_estimated", False),
                )
                for s in obj["turn_stats"]
            ],
            limits=BudgetLimits(**obj["limits"]),
            score=obj.get("score"),
            error=obj.get("error", ""),
        )


# --------------------------------------------------------------------------
# prompt assembly
# --------------------------------------------------------------------------


def assemble_prompt(episode: Episode) -> list[ChatTurn]:
    """Initial conversation for an episode.

    Code mode: the system prompt, then a user message holding any rendered
    examples, the message-format instructions, and the problem.  Chain of
    thought: a single user message with the problem and the step-by-step
    instruction.
    """
    prompt = episode.problem.prompt
    examples = "\n\n".join(episode.examples)
    if episode.mode is Mode.CODE:
        user = ""
        if examples:
            user += examples + "\n\n" + prompts.INSPIRATION_SENTENCE
        user += prompts.FORMAT_INSTRUCTIONS
        user += f"\n\n{prompts.NEW_PROBLEM_HEADER}\n\n{prompt}"
        return [
            ChatTurn("system", prompts.SYSTEM_PROMPT),
            ChatTurn("user", user),
        ]
    user = ""
    if examples:
        user += examples + "\n\n" + prompts.INSPIRATION_SENTENCE.rstrip() + "\n\n"
    user += f"{prompts.NEW_PROBLEM_HEADER}\n\n{prompt}\n\n{prompts.COT_INSTRUCTIONS}"
    return [ChatTurn("user", user)]


def _budget_block(state: BudgetState, limits: BudgetLimits) -> tuple[str, list[str]]:
    report = render_budget_report(state, limits)
    warning = low_turn_warning(state, limits)
    return report, [warning] if warning else []


# --------------------------------------------------------------------------
# episode loop
# --------------------------------------------------------------------------


def solve(episode: Episode, backend, workspace: Workspace) -> Trace:
    """Run one episode to completion and return its trace."""
    conversation = assemble_prompt(episode)
    if episode.mode is Mode.COT:
        return _solve_cot(episode, backend, conversation)
    return _run_loop(
        episode,
        backend,
        workspace,
        conversation,
        BudgetState(),
        [],
        [],
    )


def retry_in_context(trace: Trace, score: float, backend, workspace: Workspace) -> Trace:
    """Continue a finished episode after score feedback, same session.

    The conversation and budget pick up where the first attempt stopped.
    The extended trace carries the new answer; keeping the better of the
    two attempts is the caller's decision.
    """
    if score >= 1:
        raise ValueError("retries of perfect scores are rejected")
    if trace.mode is not Mode.CODE:
        raise ValueError("retry is only defined for code-loop episodes")
    conversation = list(trace.conversation)
    conversation.append(
        ChatTurn("user", prompts.RETRY_PROMPT_TEMPLATE.format(score=f"{score:g}"))
    )
    episode = Episode(
        problem=Problem(id=trace.problem_id, prompt="", payload={}, task=""),
        mode=trace.mode,
        limits=trace.limits,
        episode_id=trace.episode_id + "-retry",
    )
    return _run_loop(
        episode,
        backend,
        workspace,
        conversation,
        trace.budget_final,
        list(trace.cell_results),
        list(trace.turn_stats),
    )


def _solve_cot(episode: Episode, backend, conversation: list[ChatTurn]) -> Trace:
    from .tasks.extract import answer_colon_line

    state = BudgetState()
    try:
        completion = backend.complete(conversation)
    except BackendError as exc:
        return _aborted(episode, conversation, state, [], [], str(exc))
    state = charge(
        state, tokens=completion.output_tokens, seconds=completion.latency, turns=1
    )
    conversation = conversation + [ChatTurn("assistant", completion.text)]
    stats = [_stat(completion)]
    answer = answer_colon_line(completion.text)
    return Trace(
        episode_id=episode.episode_id,
        problem_id=episode.problem.id,
        mode=episode.mode,
        conversation=conversation,
        cell_results=[],
        answer=answer if answer is not None else "",
        outcome=Outcome.ANSWERED,
        budget_final=state,
        turn_stats=stats,
        limits=episode.limits,
    )


def _stat(completion: CompletionResult) -> TurnStat:
    return TurnStat(
        output_tokens=completion.output_tokens,
        latency=completion.latency,
        tokens_estimated=completion.tokens_estimated,
    )


def _aborted(episode, conversation, state, cell_results, stats, error) -> Trace:
    return Trace(
        episode_id=episode.episode_id,
        problem_id=episode.problem.id,
        mode=episode.mode,
        conversation=conversation,
        cell_results=cell_results,
        answer=None,
        outcome=Outcome.ABORTED,
        budget_final=state,
        turn_stats=stats,
        limits=episode.limits,
        error=error,
    )


def _run_loop(
    episode: Episode,
    backend,
    workspace: Workspace,
    conversation: list[ChatTurn],
    state: BudgetState,
    cell_results: list[CellResult],
    turn_stats: list[TurnStat],
) -> Trace:
    limits = episode.limits

    def finish(answer: str | None, outcome: Outcome) -> Trace:
        return Trace(
            episode_id=episode.episode_id,
            problem_id=episode.problem.id,
            mode=episode.mode,
            conversation=conversation,
            cell_results=cell_results,
            answer=answer,
            outcome=outcome,
            budget_final=state,
            turn_stats=turn_stats,
            limits=limits,
        )

    while True:
        try:
            completion = backend.complete(conversation)
        except BackendError as exc:
            return _aborted(
                episode, conversation, state, cell_results, turn_stats, str(exc)
            )
        state = charge(
            state, tokens=completion.output_tokens, seconds=completion.latency, turns=1
        )
        conversation.append(ChatTurn("assistant", completion.text))
        turn_stats.append(_stat(completion))

        parsed = parse_agent_message(completion.text)

        if isinstance(parsed, NudgeRequired):
            if is_exhausted(state, limits):
                break
            report, warnings = _budget_block(state, limits)
            feedback = render_nudge() + "\n\n" + report
            for w in warnings:
                feedback += "\n" + w
            conversation.append(ChatTurn("user", feedback))
            continue

        results: list[CellResult] = []
        if parsed.cells:
            deadline = min(limits.per_turn_timeout, limits.max_time - state.time_used)
            results = workspace.run_message_cells(parsed.cells, deadline)
            cell_results.extend(results)
            state = charge(state, seconds=sum(r.duration for r in results))

        if parsed.return_directive is not None:
            try:
                answer = resolve_return(parsed.return_directive, workspace)
            except UnresolvedReturn as err:
                if is_exhausted(state, limits):
                    break
                report, warnings = _budget_block(state, limits)
                note = f"Could not resolve your returned answer: {err.reason}"
                feedback = render_feedback(results, report, [note] + warnings)
                conversation.append(ChatTurn("user", feedback))
                continue
            return finish(answer, Outcome.ANSWERED)

        if is_exhausted(state, limits):
            break
        report, warnings = _budget_block(state, limits)
        conversation.append(ChatTurn("user", render_feedback(results, report, warnings)))

    # final guess: one extra completion, return directive only
    conversation.append(ChatTurn("user", prompts.FINAL_GUESS_PROMPT))
    try:
        completion = backend.complete(conversation)
    except BackendError as exc:
        return _aborted(
            episode, conversation, state, cell_results, turn_stats, str(exc)
        )
    state = charge(
        state, tokens=completion.output_tokens, seconds=completion.latency, turns=1
    )
    conversation.append(ChatTurn("assistant", completion.text))
    turn_stats.append(_stat(completion))

    parsed = parse_agent_message(completion.text)
    if isinstance(parsed, AgentMessage) and parsed.return_directive is not None:
        try:
            answer = resolve_return(parsed.return_directive, workspace)
            return finish(answer, Outcome.ANSWERED)
        except UnresolvedReturn:
            pass
    return finish(None, Outcome.BUDGET_EXHAUSTED)
