"""Constrained-paragraph task: structural checks over generated text.

Constraints are listed in the problem payload and checked in order; the
first unmet constraint becomes the report reason.  Supported constraint
kinds: sentence_count, last_word (of sentence i, 1-based), word_count_min,
word_count_max, must_include, must_exclude.
"""

from __future__ import annotations

import re

from .base import FunctionVerifier, Problem, VerifierReport
from .extract import answer_region

_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])\s+")
_WORD_RE = re.compile(r"[A-Za-z']+")


def split_sentences(text: str) -> list[str]:
    """Split on terminal punctuation followed by whitespace."""
    return [s.strip() for s in _SENTENCE_SPLIT_RE.split(text.strip()) if s.strip()]


def last_word(sentence: str) -> str:
    words = _WORD_RE.findall(sentence)
    return words[-1].lower() if words else ""


def _check(constraint: dict, text: str, sentences: list[str]) -> str | None:
    """None when satisfied, else the failure reason."""
    kind = constraint["type"]
    if kind == "sentence_count":
        want = constraint["count"]
        if len(sentences) != want:
            return f"Paragraph has {len(sentences)} sentences instead of {want}"
        return None
    if kind == "last_word":
        index = constraint["sentence"]  # 1-based
        want = constraint["word"].lower()
        if index > len(sentences):
            return f"Sentence {index} is missing"
        got = last_word(sentences[index - 1])
        if got != want:
            return f"Sentence {index} ends with '{got}' instead of '{want}'"
        return None
    if kind in ("word_count_min", "word_count_max"):
        count = len(text.split())
        want = constraint["count"]
        if kind == "word_count_min" and count < want:
            return f"Paragraph has {count} words, expected at least {want}"
        if kind == "word_count_max" and count > want:
            return f"Paragraph has {count} words, expected at most {want}"
        return None
    if kind in ("must_include", "must_exclude"):
        word = constraint["word"]
        present = re.search(rf"\b{re.escape(word)}\b", text, re.IGNORECASE) is not None
        if kind == "must_include" and not present:
            return f"Paragraph does not include the word '{word}'"
        if kind == "must_exclude" and present:
            return f"Paragraph includes the forbidden word '{word}'"
        return None
    return f"unknown constraint type '{kind}'"


def verify_collie(problem: Problem, answer: str) -> VerifierReport:
    text = answer_region(answer).strip()
    if not text:
        return VerifierReport(0.0, "empty answer")
    sentences = split_sentences(text)
    for constraint in problem.payload.get("constraints", []):
        reason = _check(constraint, text, sentences)
        if reason is not None:
            return VerifierReport(0.0, reason)
    return VerifierReport(1.0, "all constraints met")


VERIFIER = FunctionVerifier(name="collie", fn=verify_collie)
