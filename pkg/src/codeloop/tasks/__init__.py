"""Task definitions: problems, verifiers, and answer extraction."""

from __future__ import annotations

from . import collie, countdown, creativity, exact, typos
from .base import (
    FunctionVerifier,
    Problem,
    TaskSuite,
    Verifier,
    VerifierReport,
    dump_problems,
    load_problems,
    score,
)
from .creativity import CreativityVerifier, EmbeddingTable
from .extract import AnswerFormat, ExtractError, extract_structured_answer

_STATIC_VERIFIERS = {
    "countdown": countdown.VERIFIER,
    "collie": collie.VERIFIER,
    "typos": typos.VERIFIER,
    "exact": exact.VERIFIER,
}


def get_verifier(task: str, embedding_table: EmbeddingTable | None = None) -> Verifier:
    """Look up the verifier for a task name.

    The creativity task needs an embedding table; everything else is static.
    """
    if task == "creativity":
        if embedding_table is None:
            raise ValueError("creativity task needs an embedding table")
        return CreativityVerifier(table=embedding_table)
    try:
        return _STATIC_VERIFIERS[task]
    except KeyError:
        raise KeyError(f"unknown task '{task}'") from None


__all__ = [
    "AnswerFormat",
    "CreativityVerifier",
    "EmbeddingTable",
    "ExtractError",
    "FunctionVerifier",
    "Problem",
    "TaskSuite",
    "Verifier",
    "VerifierReport",
    "collie",
    "countdown",
    "creativity",
    "dump_problems",
    "exact",
    "extract_structured_answer",
    "get_verifier",
    "load_problems",
    "score",
    "typos",
]
