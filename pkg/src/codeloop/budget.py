"""Reasoning-budget ledger: output tokens, compute seconds, turns.

Charges accumulate by plain addition and are never clamped, so the display
identity  tokens used + tokens left == max_tokens  holds even in overdraft.
Seconds render floor-style on both sides of the report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

# --------------------------------------------------------------------------
# limits and state
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BudgetLimits:
    max_tokens: int = 16000
    max_time: float = 240.0
    max_turns: int = 10
    per_call_max_tokens: int = 4096
    per_turn_timeout: float = 60.0
    temperature: float = 0.5

    def __post_init__(self) -> None:
        if self.max_tokens <= 0 or self.max_turns <= 0:
            raise ValueError("token and turn limits must be positive")
        if self.max_time <= 0 or self.per_turn_timeout <= 0:
            raise ValueError("time limits must be positive")
        if self.per_call_max_tokens > self.max_tokens:
            raise ValueError("per-call token cap exceeds the total budget")
        if self.per_turn_timeout > self.max_time:
            raise ValueError("per-turn timeout exceeds the total time budget")


@dataclass(frozen=True)
class BudgetState:
    tokens_used: int = 0
    time_used: float = 0.0
    turns_used: int = 0


def charge(
    state: BudgetState, tokens: int = 0, seconds: float = 0.0, turns: int = 0
) -> BudgetState:
    """Add consumption to the ledger; amounts must be non-negative."""
    if tokens < 0 or seconds < 0 or turns < 0:
        raise ValueError("cannot charge a negative amount")
    return replace(
        state,
        tokens_used=state.tokens_used + tokens,
        time_used=state.time_used + seconds,
        turns_used=state.turns_used + turns,
    )


def is_exhausted(state: BudgetState, limits: BudgetLimits) -> bool:
    """True once any cap is reached or passed."""
    return (
        state.tokens_used >= limits.max_tokens
        or state.time_used >= limits.max_time
        or state.turns_used >= limits.max_turns
    )


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------

LOW_TURN_WARNING = (
    "Only 3 left! Make sure you will be ready to answer within the next 3 "
    "turns! Adapt your strategy if necessary.\n"
    "Start your next message by reasoning about how you will solve the task "
    "in the next 3 turns."
)


def render_budget_report(state: BudgetState, limits: BudgetLimits) -> str:
    secs_used = math.floor(state.time_used)
    secs_left = math.floor(limits.max_time - state.time_used)
    tokens_left = limits.max_tokens - state.tokens_used
    steps_left = limits.max_turns - state.turns_used
    return (
        "Remaining budget:\n"
        f" - {secs_used} secs used, {secs_left} secs left,\n"
        f" - {state.tokens_used} output tokens used, "
        f"{tokens_left} output tokens left,\n"
        f" - {state.turns_used} thinking steps performed, "
        f"{steps_left} steps left."
    )


def low_turn_warning(state: BudgetState, limits: BudgetLimits) -> str | None:
    """The fixed two-line warning, exactly when three turns remain."""
    if limits.max_turns - state.turns_used == 3:
        return LOW_TURN_WARNING
    return None
