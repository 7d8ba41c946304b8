"""Typo-correction task: exact match up to whitespace normalization."""

from __future__ import annotations

import re

from .base import FunctionVerifier, Problem, VerifierReport
from .extract import answer_region

_WS_RE = re.compile(r"\s+")


def normalize_whitespace(text: str) -> str:
    return _WS_RE.sub(" ", text).strip()


def verify_typos(problem: Problem, answer: str) -> VerifierReport:
    reference = normalize_whitespace(problem.payload["reference"])
    got = normalize_whitespace(answer_region(answer))
    if got == reference:
        return VerifierReport(1.0, "exact match")
    got_words = got.split(" ")
    ref_words = reference.split(" ")
    for i, (g, r) in enumerate(zip(got_words, ref_words)):
        if g != r:
            return VerifierReport(0.0, f"word {i + 1} is '{g}', expected '{r}'")
    return VerifierReport(
        0.0, f"answer has {len(got_words)} words, expected {len(ref_words)}"
    )


VERIFIER = FunctionVerifier(name="typos", fn=verify_typos)
