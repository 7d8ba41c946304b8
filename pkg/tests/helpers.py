"""Shared test utilities: transcript fixtures and scripted model doubles."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from codeloop.backends import ChatTurn
from codeloop.budget import BudgetState
from codeloop.protocol import CellResult, CellStatus, INTERRUPT_MARKER

DATA_DIR = Path(__file__).parent / "data"
TRANSCRIPTS_DIR = DATA_DIR / "transcripts"

# --------------------------------------------------------------------------
# recorded transcripts
# --------------------------------------------------------------------------

_TURN_SPLIT_RE = re.compile(r"----------------\n(ASSISTANT|USER):\n\n")
_BUDGET_RE = re.compile(
    r"Remaining budget:\n"
    r" - (\d+) secs used, (-?\d+) secs left,\n"
    r" - (\d+) output tokens used, (-?\d+) output tokens left,\n"
    r" - (\d+) thinking steps performed, (-?\d+) steps left\."
)


@dataclass
class Transcript:
    """One recorded episode: the question and the alternating turns."""

    name: str
    question: str
    turns: list[ChatTurn]

    def assistant_turns(self) -> list[str]:
        return [t.content for t in self.turns if t.role == "assistant"]

    def user_turns(self) -> list[str]:
        return [t.content for t in self.turns if t.role == "user"]


def load_transcript(name: str) -> Transcript:
    text = (TRANSCRIPTS_DIR / f"{name}.txt").read_text(encoding="utf-8")
    parts = _TURN_SPLIT_RE.split(text)
    header = parts[0]
    question = ""
    if "QUESTION:" in header:
        question = header.split("QUESTION:\n", 1)[1]
        question = question.split("\n----------------")[0].rstrip("\n")
    turns = []
    for role, content in zip(parts[1::2], parts[2::2]):
        turns.append(ChatTurn(role.lower(), content.rstrip("\n")))
    return Transcript(name=name, question=question, turns=turns)


def budget_states(feedback: str) -> BudgetState:
    """Reconstruct the budget state shown inside one feedback message.

    Seconds display floors fractional time, so any time in [used, used+1)
    reproduces the line; a half-second offset is used throughout.
    """
    m = _BUDGET_RE.search(feedback)
    if m is None:
        raise AssertionError("no budget report in feedback")
    secs_used, _, tokens_used, _, turns_used, _ = map(int, m.groups())
    return BudgetState(
        tokens_used=tokens_used,
        time_used=secs_used + 0.5,
        turns_used=turns_used,
    )


# --------------------------------------------------------------------------
# deriving cell results back out of recorded feedback
# --------------------------------------------------------------------------

_OUTPUT_OPEN_RE = re.compile(r'<output cell="([^"]+)">\n')
_ERROR_OPEN_RE = re.compile(r'<error cell="([^"]+)">\n')
_NO_OUTPUT_RE = re.compile(r"Cell (\S+) has been executed but returned no output")


def derive_cell_results(feedback: str) -> list[CellResult]:
    """Invert the feedback rendering: recover the cell results whose
    re-rendering must reproduce the recorded bytes."""
    results: list[CellResult] = []
    pos = 0
    while pos < len(feedback):
        if feedback.startswith("Remaining budget:", pos):
            break
        m = _OUTPUT_OPEN_RE.match(feedback, pos)
        if m:
            end = feedback.index("\n</output>", m.end())
            content = feedback[m.end() : end]
            pos = end + len("\n</output>") + 2  # skip the blank separator
            if content.endswith("\n" + INTERRUPT_MARKER):
                stdout = content[: -len("\n" + INTERRUPT_MARKER)]
                em = _ERROR_OPEN_RE.match(feedback, pos)
                assert em and em.group(1) == m.group(1)
                eend = feedback.index("\n</error>", em.end())
                results.append(
                    CellResult(
                        cell_name=m.group(1),
                        status=CellStatus.INTERRUPTED,
                        output=stdout,
                        error_trace=feedback[em.end() : eend],
                    )
                )
                pos = eend + len("\n</error>") + 2
            else:
                results.append(
                    CellResult(
                        cell_name=m.group(1), status=CellStatus.OK, output=content
                    )
                )
            continue
        m = _ERROR_OPEN_RE.match(feedback, pos)
        if m:
            end = feedback.index("\n</error>", m.end())
            results.append(
                CellResult(
                    cell_name=m.group(1),
                    status=CellStatus.ERROR,
                    error_trace=feedback[m.end() : end],
                )
            )
            pos = end + len("\n</error>") + 2
            continue
        m = _NO_OUTPUT_RE.match(feedback, pos)
        if m:
            results.append(CellResult(cell_name=m.group(1), status=CellStatus.OK))
            pos = m.end() + 2
            continue
        raise AssertionError(f"unrecognized feedback at offset {pos}")
    return results


def make_answer_turn(answer: str, prose: str = "Returning the answer.") -> str:
    return f"<turn>{prose}\n<return>{answer}</return>\n</turn>"
