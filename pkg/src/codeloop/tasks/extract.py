"""Structured answer extraction from free-form model output.

Formats:
  * ANSWER_TAGS: the region between <answer> and </answer>.
  * ANSWER_COLON_LINE: text after "Answer:" on the last such line.
  * SOLUTION_LIST: comma-separated items between <solution> tags.
  * INTEGER_0_999: an integer, validated to the 0..999 range.
"""

from __future__ import annotations

import re
from enum import Enum


class AnswerFormat(Enum):
    ANSWER_TAGS = "answer_tags"
    ANSWER_COLON_LINE = "answer_colon_line"
    SOLUTION_LIST = "solution_list"
    INTEGER_0_999 = "integer_0_999"


class ExtractError(ValueError):
    pass


class NotFound(ExtractError):
    pass


class Malformed(ExtractError):
    pass


class OutOfRange(ExtractError):
    pass


_ANSWER_TAG_RE = re.compile(r"<answer>(.*?)</answer>", re.DOTALL)
_SOLUTION_TAG_RE = re.compile(r"<solution>(.*?)</solution>", re.DOTALL)
_ANSWER_LINE_RE = re.compile(r"^\s*Answer:\s*(.*)$")
_INT_RE = re.compile(r"[+-]?\d+")


def answer_region(text: str) -> str:
    """Text between the last pair of <answer> tags, or the whole text."""
    matches = _ANSWER_TAG_RE.findall(text)
    return matches[-1] if matches else text


def answer_colon_line(text: str) -> str | None:
    """Text after "Answer:" on the last line that carries one."""
    for line in reversed(text.splitlines()):
        m = _ANSWER_LINE_RE.match(line)
        if m:
            return m.group(1).strip()
    return None


def extract_structured_answer(
    text: str, fmt: AnswerFormat
) -> str | list[str]:
    """Pull the answer out of free text; raises NotFound / Malformed /
    OutOfRange rather than guessing."""
    if fmt is AnswerFormat.ANSWER_TAGS:
        matches = _ANSWER_TAG_RE.findall(text)
        if not matches:
            raise NotFound("no <answer> tags")
        return matches[-1].strip()

    if fmt is AnswerFormat.ANSWER_COLON_LINE:
        line = answer_colon_line(text)
        if line is None:
            raise NotFound("no 'Answer:' line")
        return line

    if fmt is AnswerFormat.SOLUTION_LIST:
        matches = _SOLUTION_TAG_RE.findall(text)
        if not matches:
            raise NotFound("no <solution> tags")
        return [item.strip() for item in matches[-1].split(",")]

    if fmt is AnswerFormat.INTEGER_0_999:
        region = answer_colon_line(text)
        if region is None:
            region = text.strip()
        found = _INT_RE.findall(region)
        if not found:
            raise NotFound("no integer in answer")
        try:
            value = int(found[-1])
        except ValueError as exc:  # pragma: no cover - regex guarantees int
            raise Malformed(str(exc)) from exc
        if not 0 <= value <= 999:
            raise OutOfRange(f"{value} is outside 0..999")
        return str(value)

    raise Malformed(f"unknown format {fmt!r}")
