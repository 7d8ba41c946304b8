"""Budgeted multi-turn reasoning with executable code cells.

A language model works on a problem over up to ten turns, mixing prose with
named Python cells that a persistent sandboxed workspace executes.  Every
turn is charged against a token, time, and turn budget.  Solution traces
that verify well can be bootstrapped into few-shot examples, selected
either by raw score or by how well they transfer to sibling problems.
"""

from .backends import (
    ChatTurn,
    CompletionResult,
    HTTPBackend,
    LMConfig,
    ReplayBackend,
    estimate_tokens,
)
from .budget import (
    BudgetLimits,
    BudgetState,
    charge,
    is_exhausted,
    low_turn_warning,
    render_budget_report,
)
from .learn import (
    Candidate,
    ExampleSet,
    LearnConfig,
    filter_top_by_score,
    generalization_eval,
    generate_candidates,
    render_example,
    select_bfl,
    select_gfl,
)
from .orchestrator import (
    Episode,
    Mode,
    Outcome,
    Trace,
    assemble_prompt,
    retry_in_context,
    solve,
)
from .protocol import (
    AgentMessage,
    CellResult,
    CellStatus,
    CodeCell,
    InlineReturn,
    NudgeRequired,
    VarReturn,
    parse_agent_message,
    render_agent_message,
    render_feedback,
    render_nudge,
)
from .workspace import (
    KernelWorkspace,
    ScriptedCell,
    ScriptedWorkspace,
    UnresolvedReturn,
    resolve_return,
    truncate_output,
)

__version__ = "0.1.0"
