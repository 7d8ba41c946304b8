"""Independent oracle for the number-game task.

Deliberately avoids the package's ast-based route: expressions are judged
with a hand-written tokenizer and recursive-descent evaluator over exact
fractions, and solutions are built constructively by enumeration, so the
two sides of every equivalence test share no code.
"""

from __future__ import annotations

import re
from collections import Counter
from fractions import Fraction
from itertools import combinations

_TOKEN_RE = re.compile(r"\s*(\d+|[()+\-*/])")


class OracleSyntaxError(ValueError):
    pass


def _tokenize(text: str) -> list[str]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise OracleSyntaxError(f"bad character at {pos}")
        tokens.append(m.group(1))
        pos = m.end()
    return tokens


def oracle_eval(text: str) -> tuple[Fraction | None, list[int]]:
    """Value and literal list; value None when a division by zero occurs.

    Grammar: expr := term (('+'|'-') term)*; term := atom (('*'|'/') atom)*;
    atom := INT | '(' expr ')'.  No unary operators.
    """
    tokens = _tokenize(text)
    literals: list[int] = []
    pos = 0

    def peek() -> str | None:
        return tokens[pos] if pos < len(tokens) else None

    def take() -> str:
        nonlocal pos
        if pos >= len(tokens):
            raise OracleSyntaxError("unexpected end")
        pos += 1
        return tokens[pos - 1]

    def atom() -> Fraction | None:
        tok = take()
        if tok == "(":
            value = expr()
            if take() != ")":
                raise OracleSyntaxError("missing ')'")
            return value
        if tok.isdigit():
            literals.append(int(tok))
            return Fraction(int(tok))
        raise OracleSyntaxError(f"unexpected token {tok!r}")

    def term() -> Fraction | None:
        value = atom()
        while peek() in ("*", "/"):
            op = take()
            rhs = atom()
            if value is None or rhs is None:
                value = None
            elif op == "*":
                value = value * rhs
            elif rhs == 0:
                value = None
            else:
                value = value / rhs
        return value

    def expr() -> Fraction | None:
        value = term()
        while peek() in ("+", "-"):
            op = take()
            rhs = term()
            if value is None or rhs is None:
                value = None
            else:
                value = value + rhs if op == "+" else value - rhs
        return value

    value = expr()
    if pos != len(tokens):
        raise OracleSyntaxError("trailing tokens")
    return value, literals


def oracle_judge(text: str, target: int, numbers: list[int]) -> bool:
    """Ground truth: does this string solve the instance?"""
    try:
        value, literals = oracle_eval(text)
    except OracleSyntaxError:
        return False
    if value is None:
        return False
    return Counter(literals) == Counter(numbers) and value == target


# --------------------------------------------------------------------------
# constructive enumeration
# --------------------------------------------------------------------------


def enumerate_expressions(numbers: tuple[int, ...]) -> list[tuple[Fraction | None, str]]:
    """Every fully parenthesized expression using each number exactly once."""
    if len(numbers) == 1:
        return [(Fraction(numbers[0]), str(numbers[0]))]
    out: list[tuple[Fraction | None, str]] = []
    n = len(numbers)
    indices = set(range(n))
    for size in range(1, n):
        for left_idx in combinations(range(n), size):
            right_idx = tuple(sorted(indices - set(left_idx)))
            left = enumerate_expressions(tuple(numbers[i] for i in left_idx))
            right = enumerate_expressions(tuple(numbers[i] for i in right_idx))
            for lv, le in left:
                for rv, re_ in right:
                    for op in "+-*/":
                        if lv is None or rv is None:
                            value = None
                        elif op == "+":
                            value = lv + rv
                        elif op == "-":
                            value = lv - rv
                        elif op == "*":
                            value = lv * rv
                        else:
                            value = None if rv == 0 else lv / rv
                        out.append((value, f"({le}{op}{re_})"))
    return out


def solutions_for(numbers: tuple[int, ...], target: int) -> list[str]:
    return [e for v, e in enumerate_expressions(numbers) if v == target]


# --------------------------------------------------------------------------
# full-task solver (used pre-build to freeze witness expressions)
# --------------------------------------------------------------------------


def solve_full_task(target: int) -> str | None:
    """A witness expression over 1..10 equal to ``target``.

    Shape: E(A) + (1+2-3)*(product of the rest), where A is a subset of
    {4..10} reaching the target; the (1+2-3) factor folds the unused
    numbers into a zero term.
    """
    pool = (4, 5, 6, 7, 8, 9, 10)
    for size in range(1, len(pool) + 1):
        for subset in combinations(pool, size):
            for value, expr in enumerate_expressions(subset):
                if value == target:
                    rest = list(pool)
                    for x in subset:
                        rest.remove(x)
                    zero = "(1+2-3)"
                    if rest:
                        product = "*".join(str(x) for x in rest)
                        return f"{expr}+{zero}*{product}"
                    return f"{expr}+{zero}"
    return None
