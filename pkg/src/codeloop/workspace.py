"""Reasoning workspace: runs message cells and resolves return directives.

Two implementations share one duck-typed surface:

  * KernelWorkspace drives a sandboxed kernel worker over the wire protocol
    and is used for live episodes.
  * ScriptedWorkspace replays pre-recorded cell results and is used for
    deterministic tests, demos, and trace replay.

Cell outputs are display-truncated to a line cap here; the raw byte cap is
enforced inside the worker.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Protocol

from .kernel_client import KernelClient
from .protocol import (
    CellResult,
    CellStatus,
    CodeCell,
    InlineReturn,
    ReturnDirective,
    VarReturn,
)

OUTPUT_LINE_CAP = 100
TRACEBACK_LINE_CAP = 50

SKIP_TEXT = "Skipped: total compute budget exhausted"


class UnresolvedReturn(Exception):
    """A return directive could not be turned into an answer string."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def truncate_output(text: str, cap: int = OUTPUT_LINE_CAP) -> str:
    """Keep the first ``cap`` lines and append the truncation marker."""
    lines = text.splitlines(keepends=True)
    if len(lines) <= cap:
        return text
    return "".join(lines[:cap]) + f"\n [output truncated after {cap} lines..]"


def truncate_traceback(trace: str, cap: int = TRACEBACK_LINE_CAP) -> str:
    """Keep the final ``cap`` lines of a traceback."""
    lines = trace.splitlines()
    if len(lines) <= cap:
        return trace
    return "\n".join(lines[-cap:])


class Workspace(Protocol):
    def run_message_cells(
        self, cells: list[CodeCell], deadline: float
    ) -> list[CellResult]: ...

    def resolve_variable(self, name: str) -> str: ...

    def close(self) -> None: ...


def resolve_return(directive: ReturnDirective, workspace: Workspace) -> str:
    """Answer text for a return directive; raises UnresolvedReturn."""
    if isinstance(directive, InlineReturn):
        return directive.text.strip()
    if isinstance(directive, VarReturn):
        return workspace.resolve_variable(directive.name)
    raise UnresolvedReturn(f"unsupported return directive {directive!r}")


def _skipped(cell: CodeCell) -> CellResult:
    return CellResult(
        cell_name=cell.name,
        status=CellStatus.ERROR,
        error_trace=SKIP_TEXT,
    )


# --------------------------------------------------------------------------
# live workspace backed by the kernel worker
# --------------------------------------------------------------------------


class KernelWorkspace:
    """One persistent kernel worker per episode."""

    def __init__(
        self,
        command: list[str] | None = None,
        per_turn_timeout: float = 60.0,
        memory_cap_mb: int = 500,
        line_cap: int = OUTPUT_LINE_CAP,
    ):
        self.client = KernelClient(
            command=command,
            per_cell_timeout=per_turn_timeout,
            memory_cap_mb=memory_cap_mb,
        )
        self.line_cap = line_cap
        # ordered name -> latest source; re-running a name overwrites it
        self.cells_executed: dict[str, str] = {}
        self.client.start()

    def run_message_cells(
        self, cells: list[CodeCell], deadline: float
    ) -> list[CellResult]:
        """Execute cells in message order under one shared time deadline.

        Once the deadline is spent, every remaining cell is reported as
        skipped rather than executed.
        """
        results: list[CellResult] = []
        start = time.monotonic()
        for cell in cells:
            remaining = deadline - (time.monotonic() - start)
            if remaining <= 0:
                results.append(_skipped(cell))
                continue
            self.cells_executed[cell.name] = cell.source
            response = self.client.execute(cell.name, cell.source, timeout=remaining)
            status = {
                "ok": CellStatus.OK,
                "error": CellStatus.ERROR,
                "interrupted": CellStatus.INTERRUPTED,
            }.get(response.status, CellStatus.ERROR)
            results.append(
                CellResult(
                    cell_name=cell.name,
                    status=status,
                    output=truncate_output(response.stdout, self.line_cap),
                    error_trace=truncate_traceback(response.error_trace),
                    duration=response.duration,
                )
            )
        return results

    def resolve_variable(self, name: str) -> str:
        response = self.client.resolve_var(name)
        if response.status != "ok":
            raise UnresolvedReturn(response.error_trace or f"cannot resolve '{name}'")
        return response.stdout

    def close(self) -> None:
        self.client.close()


# --------------------------------------------------------------------------
# scripted workspace for replay and tests
# --------------------------------------------------------------------------


@dataclass
class ScriptedCell:
    """Planned outcome for one named cell."""

    output: str = ""
    error: str | None = None
    interrupted: bool = False
    duration: float = 0.0
    defines: dict[str, object] = field(default_factory=dict)


@dataclass
class ScriptedWorkspace:
    """Replays planned cell outcomes and tracks defined variables.

    Outcomes for a cell name are consumed in order when a list is given,
    so re-running a cell can produce a different scripted result.  Cells
    with no plan succeed with empty output.  Deadline accounting uses the
    scripted durations, not wall time.
    """

    plans: dict[str, list[ScriptedCell] | ScriptedCell] = field(default_factory=dict)
    line_cap: int = OUTPUT_LINE_CAP
    variables: dict[str, object] = field(default_factory=dict)
    executed: list[str] = field(default_factory=list)
    cells_executed: dict[str, str] = field(default_factory=dict)
    closed: bool = False

    def _next_plan(self, name: str) -> ScriptedCell:
        plan = self.plans.get(name)
        if plan is None:
            return ScriptedCell()
        if isinstance(plan, ScriptedCell):
            return plan
        return plan.pop(0) if plan else ScriptedCell()

    def run_message_cells(
        self, cells: list[CodeCell], deadline: float
    ) -> list[CellResult]:
        results: list[CellResult] = []
        elapsed = 0.0
        for cell in cells:
            if elapsed >= deadline:
                results.append(_skipped(cell))
                continue
            plan = self._next_plan(cell.name)
            self.executed.append(cell.name)
            self.cells_executed[cell.name] = cell.source
            self.variables.update(plan.defines)
            elapsed += plan.duration
            if plan.interrupted:
                status = CellStatus.INTERRUPTED
            elif plan.error is not None:
                status = CellStatus.ERROR
            else:
                status = CellStatus.OK
            results.append(
                CellResult(
                    cell_name=cell.name,
                    status=status,
                    output=truncate_output(plan.output, self.line_cap),
                    error_trace=truncate_traceback(plan.error or ""),
                    duration=plan.duration,
                )
            )
        return results

    def resolve_variable(self, name: str) -> str:
        if name not in self.variables:
            raise UnresolvedReturn(f"name '{name}' is not defined")
        value = self.variables[name]
        if not isinstance(value, str):
            raise UnresolvedReturn(
                f"variable '{name}' is {type(value).__name__}, not a string"
            )
        return value

    def close(self) -> None:
        self.closed = True
