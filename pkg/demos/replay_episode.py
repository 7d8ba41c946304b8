"""Walk one scripted episode through the full loop and print the wire text.

No network, no subprocess: a ReplayBackend stands in for the model and a
ScriptedWorkspace stands in for the kernel, so every byte below is produced
by the same orchestrator path a live run uses.
"""

from codeloop.backends import ReplayBackend
from codeloop.budget import BudgetLimits
from codeloop.orchestrator import Episode, solve
from codeloop.tasks import get_verifier
from codeloop.tasks.base import Problem
from codeloop.workspace import ScriptedCell, ScriptedWorkspace

problem = Problem(
    id="demo-sum",
    prompt="What is the sum of the integers from 1 to 10?",
    payload={"answer": "55"},
    task="exact",
)

# turn 1 computes in a cell, turn 2 stores the answer and returns it by name
script = [
    (
        "<turn>\n"
        "Let me just compute it.\n"
        '<code name="check">\n'
        "```python\n"
        "total = sum(range(1, 11))\n"
        "print(total)\n"
        "```\n"
        "</code>\n"
        "</turn>",
        60,
        1.2,
    ),
    (
        "<turn>\n"
        "The cell printed 55, so that is the answer.\n"
        '<code name="commit">\n'
        "```python\n"
        "ans = str(total)\n"
        "print(ans)\n"
        "```\n"
        "</code>\n"
        '<return var="ans">\n'
        "</turn>",
        45,
        0.8,
    ),
]

workspace = ScriptedWorkspace(
    plans={
        "check": ScriptedCell(output="55\n", duration=0.3),
        "commit": ScriptedCell(output="55\n", duration=0.1, defines={"ans": "55"}),
    }
)

episode = Episode(problem=problem, limits=BudgetLimits(max_turns=6))
trace = solve(episode, ReplayBackend(script=script), workspace)

for turn in trace.conversation:
    print(f"--- {turn.role} " + "-" * (60 - len(turn.role)))
    print(turn.content)
    print()

print("=" * 66)
score = get_verifier("exact").verify(problem, trace.answer or "")
print(f"outcome: {trace.outcome.value}   answer: {trace.answer!r}   score: {score.score}")
print(
    f"budget:  {trace.budget_final.tokens_used} tokens, "
    f"{trace.budget_final.time_used:.1f}s, {trace.budget_final.turns_used} turns"
)
