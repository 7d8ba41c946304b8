"""Exact-answer task: compare an extracted answer against an expected string."""

from __future__ import annotations

from .base import FunctionVerifier, Problem, VerifierReport
from .extract import AnswerFormat, ExtractError, extract_structured_answer


def verify_exact(problem: Problem, answer: str) -> VerifierReport:
    expected = problem.payload["answer"]
    fmt_name = problem.payload.get("format")
    if fmt_name:
        try:
            extracted = extract_structured_answer(answer, AnswerFormat(fmt_name))
        except ExtractError as exc:
            return VerifierReport(0.0, str(exc))
    else:
        extracted = answer.strip()
    if isinstance(extracted, list):
        ok = extracted == [s.strip() for s in str(expected).split(",")]
    else:
        ok = extracted == str(expected)
    if ok:
        return VerifierReport(1.0, "exact match")
    return VerifierReport(0.0, f"got {extracted!r}, expected {expected!r}")


VERIFIER = FunctionVerifier(name="exact", fn=verify_exact)
