"""Message protocol between the model and the reasoning workspace.

The model writes messages that mix prose with named code cells and an
optional return directive:

    <turn>free-form reasoning...
    <code name="step_one">
    ```python
    x = 1 + 1
    print(x)
    ```
    </code>
    <return var="answer">
    </turn>

The workspace answers with execution feedback: one block per cell result,
then the remaining-budget report, then any warning lines.  Parsing is total
(never raises on arbitrary text) and rendering is byte-stable; golden tests
compare rendered feedback against recorded transcripts.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

# --------------------------------------------------------------------------
# message pieces
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CodeCell:
    """One named block of Python source extracted from a model message."""

    name: str
    source: str


@dataclass(frozen=True)
class InlineReturn:
    """Literal answer text carried inside <return>...</return>."""

    text: str


@dataclass(frozen=True)
class VarReturn:
    """Answer held by a workspace variable, via <return var="name">."""

    name: str


ReturnDirective = InlineReturn | VarReturn


@dataclass
class AgentMessage:
    """Structured view of one model message."""

    raw: str
    cells: list[CodeCell] = field(default_factory=list)
    return_directive: ReturnDirective | None = None
    problems: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class NudgeRequired:
    """The message contained neither a parseable cell nor a return."""

    raw: str


class CellStatus(Enum):
    OK = "ok"
    ERROR = "error"
    INTERRUPTED = "interrupted"


@dataclass(frozen=True)
class CellResult:
    """Outcome of executing one cell, with display-ready output text."""

    cell_name: str
    status: CellStatus
    output: str = ""
    error_trace: str = ""
    duration: float = 0.0


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------

# <turn> wrappers are inert; any text outside cells and returns is prose.
_CELL_RE = re.compile(r'<code\s+name="([^"\s]+)"\s*>(.*?)</code>', re.DOTALL)
_FENCE_RE = re.compile(r"```[^\n]*\n(.*?)```", re.DOTALL)
_OPEN_CODE_RE = re.compile(r"<code\b")
_RETURN_VAR_RE = re.compile(r'<return\s+var="([^"\s]*)"\s*/?>')
_RETURN_INLINE_RE = re.compile(r"<return\s*>(.*?)</return>", re.DOTALL)
_IDENTIFIER_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def _in_spans(pos: int, spans: list[tuple[int, int]]) -> bool:
    return any(a <= pos < b for a, b in spans)


def parse_agent_message(raw: str) -> AgentMessage | NudgeRequired:
    """Extract cells and the return directive from one model message.

    Total over arbitrary text.  Malformed cells (missing close tag, missing
    or bad name, no fenced block) are skipped and reported in ``problems``;
    a second return directive is likewise reported and ignored.  A message
    with no well-formed cell and no return directive yields NudgeRequired.
    """
    cells: list[CodeCell] = []
    problems: list[str] = []
    spans: list[tuple[int, int]] = []

    for m in _CELL_RE.finditer(raw):
        name, body = m.group(1), m.group(2)
        fences = _FENCE_RE.findall(body)
        if not fences:
            problems.append(f"cell '{name}' has no fenced code block")
            spans.append(m.span())
            continue
        source = "\n".join(f[:-1] if f.endswith("\n") else f for f in fences)
        cells.append(CodeCell(name=name, source=source))
        spans.append(m.span())

    # leftover <code ...> openers outside well-formed cells are malformed
    for m in _OPEN_CODE_RE.finditer(raw):
        if not _in_spans(m.start(), spans):
            problems.append("malformed code tag without a well-formed cell")

    directive: ReturnDirective | None = None
    candidates: list[tuple[int, ReturnDirective]] = []
    for m in _RETURN_VAR_RE.finditer(raw):
        if _in_spans(m.start(), spans):
            continue
        if _IDENTIFIER_RE.match(m.group(1)):
            candidates.append((m.start(), VarReturn(m.group(1))))
        else:
            problems.append(f"return var {m.group(1)!r} is not an identifier")
    for m in _RETURN_INLINE_RE.finditer(raw):
        if not _in_spans(m.start(), spans):
            candidates.append((m.start(), InlineReturn(m.group(1))))
    candidates.sort(key=lambda c: c[0])
    if candidates:
        directive = candidates[0][1]
        if len(candidates) > 1:
            problems.append("multiple return directives; keeping the first")

    if not cells and directive is None:
        return NudgeRequired(raw=raw)
    return AgentMessage(
        raw=raw, cells=cells, return_directive=directive, problems=problems
    )


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------

INTERRUPT_MARKER = "[Execution interrupted due to resource limits]"

NO_OUTPUT_TEMPLATE = "Cell {cell_name} has been executed but returned no output"

NUDGE_TEXT = (
    "Your message did not include a code block or return statement.\n"
    "\n"
    "Please continue problem solving, and remember to only respond with "
    "messages that contain code blocks or return statements. It might be "
    "that you made minor formatting mistakes. If you are unsure about the "
    "format, please refer to the examples."
)


def _block(tag: str, name: str, content: str) -> str:
    # one trailing newline of the content is absorbed by the closing tag line
    if content.endswith("\n"):
        content = content[:-1]
    return f'<{tag} cell="{name}">\n{content}\n</{tag}>'


def render_cell_result(result: CellResult) -> str:
    """Display text for one executed cell."""
    if result.status is CellStatus.OK:
        if result.output == "":
            return NO_OUTPUT_TEMPLATE.format(cell_name=result.cell_name)
        return _block("output", result.cell_name, result.output)
    if result.status is CellStatus.ERROR:
        return _block("error", result.cell_name, result.error_trace)
    # interrupted: partial output with the interruption marker, then the error
    out = _block("output", result.cell_name, result.output + "\n" + INTERRUPT_MARKER)
    err = _block("error", result.cell_name, result.error_trace)
    return out + "\n\n" + err


def render_feedback(
    results: list[CellResult], budget_report: str, warnings: list[str] | None = None
) -> str:
    """Full workspace reply: cell blocks, budget report, warning lines."""
    parts = [render_cell_result(r) for r in results]
    text = "\n\n".join(parts)
    if text:
        text += "\n\n"
    text += budget_report
    for w in warnings or []:
        text += "\n" + w
    return text


def render_nudge() -> str:
    """Reply for a message with no cells and no return; the caller appends
    the budget report after a blank line."""
    return NUDGE_TEXT


def render_agent_message(
    cells: list[CodeCell],
    return_directive: ReturnDirective | None = None,
    prose: str = "",
) -> str:
    """Canonical model-side rendering, used to script and replay episodes.

    parse_agent_message(render_agent_message(cells, ret)) recovers the same
    cells and directive.
    """
    parts = ["<turn>"]
    if prose:
        parts.append(prose)
    for cell in cells:
        parts.append(
            f'<code name="{cell.name}">\n```python\n{cell.source}\n```\n</code>'
        )
    if isinstance(return_directive, InlineReturn):
        parts.append(f"<return>{return_directive.text}</return>")
    elif isinstance(return_directive, VarReturn):
        parts.append(f'<return var="{return_directive.name}">')
    parts.append("</turn>")
    return "\n".join(parts)
