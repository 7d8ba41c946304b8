"""Number-game task: reach a target with the numbers 1..10, each used once.

The verifier parses the expression with the Python ast module and evaluates
it in exact rational arithmetic, so 6/4*2 == 3 holds and no float rounding
can leak a near miss through.
"""

from __future__ import annotations

import ast
from collections import Counter
from fractions import Fraction

from .base import FunctionVerifier, Problem, VerifierReport

NUMBERS = list(range(1, 11))
TARGETS = list(range(1, 101))

PROMPT_TEMPLATE = (
    "Using each of the numbers 1, 2, 3, 4, 5, 6, 7, 8, 9, and 10 exactly "
    "once, write a single arithmetic expression that equals {target}. You "
    "may combine the numbers with addition (+), subtraction (-), "
    "multiplication (*), division (/), and parentheses. Intermediate values "
    "may be fractions; only the final value must equal {target} exactly. "
    "Return only the expression."
)


def generate_problems() -> list[Problem]:
    """One problem per target 1..100; problems differ only in the target."""
    return [
        Problem(
            id=f"countdown-{target:03d}",
            prompt=PROMPT_TEMPLATE.format(target=target),
            payload={"target": target, "numbers": NUMBERS},
            task="countdown",
        )
        for target in TARGETS
    ]


# --------------------------------------------------------------------------
# verification
# --------------------------------------------------------------------------

_OPS = {ast.Add: "+", ast.Sub: "-", ast.Mult: "*", ast.Div: "/"}


class _Invalid(Exception):
    pass


def _evaluate(node: ast.AST, literals: list[int]) -> Fraction:
    if isinstance(node, ast.Expression):
        return _evaluate(node.body, literals)
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, int):
            raise _Invalid("only integer literals are allowed")
        literals.append(node.value)
        return Fraction(node.value)
    if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
        left = _evaluate(node.left, literals)
        right = _evaluate(node.right, literals)
        op = type(node.op)
        if op is ast.Add:
            return left + right
        if op is ast.Sub:
            return left - right
        if op is ast.Mult:
            return left * right
        if right == 0:
            raise _Invalid("division by zero")
        return left / right
    raise _Invalid(f"unsupported syntax: {type(node).__name__}")


def evaluate_expression(text: str) -> tuple[Fraction, list[int]]:
    """Exact value and the integer literals of an arithmetic expression.

    Raises ValueError for anything outside the + - * / grammar, including
    unary minus, floats, names, and calls.
    """
    cleaned = text.strip().replace("×", "*").replace("÷", "/")
    cleaned = cleaned.replace("−", "-")
    try:
        tree = ast.parse(cleaned, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"not a valid expression: {exc.msg}") from exc
    literals: list[int] = []
    try:
        value = _evaluate(tree, literals)
    except _Invalid as exc:
        raise ValueError(str(exc)) from exc
    return value, literals


def verify_countdown(problem: Problem, answer: str) -> VerifierReport:
    target = problem.payload["target"]
    numbers = problem.payload.get("numbers", NUMBERS)
    if not answer.strip():
        return VerifierReport(0.0, "empty answer")
    try:
        value, literals = evaluate_expression(answer)
    except ValueError as exc:
        return VerifierReport(0.0, str(exc))
    if Counter(literals) != Counter(numbers):
        return VerifierReport(
            0.0,
            f"expression uses numbers {sorted(literals)} instead of "
            f"{sorted(numbers)} each exactly once",
        )
    if value != target:
        return VerifierReport(0.0, f"expression equals {value}, not {target}")
    return VerifierReport(1.0, "correct")


VERIFIER = FunctionVerifier(name="countdown", fn=verify_countdown)
