"""Shared task types: problems, verifier reports, suites, JSONL files."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

# --------------------------------------------------------------------------
# types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Problem:
    id: str
    prompt: str
    payload: dict = field(default_factory=dict)
    task: str = ""


@dataclass(frozen=True)
class VerifierReport:
    """Score in [0, 1] plus a machine-readable reason."""

    score: float
    reason: str = ""

    def to_dict(self) -> dict:
        return {"score": self.score, "reason": self.reason}


class Verifier(Protocol):
    name: str

    def verify(self, problem: Problem, answer: str | None) -> VerifierReport: ...


def score(verifier: Verifier, problem: Problem, answer: str | None) -> float:
    return verifier.verify(problem, answer).score


@dataclass
class FunctionVerifier:
    """Verifier built from one scoring function; total over any answer."""

    name: str
    fn: Callable[[Problem, str], VerifierReport]

    def verify(self, problem: Problem, answer: str | None) -> VerifierReport:
        report = self.fn(problem, answer if answer is not None else "")
        if not 0.0 <= report.score <= 1.0:
            raise ValueError(f"verifier {self.name} scored outside [0, 1]")
        return report


@dataclass
class TaskSuite:
    """A set of problems with the verifier that judges them."""

    name: str
    problems: list[Problem]
    verifier: Verifier


# --------------------------------------------------------------------------
# problem files: one JSON object per line (id, prompt, payload, task)
# --------------------------------------------------------------------------


def load_problems(path: str | Path) -> list[Problem]:
    problems = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            problems.append(
                Problem(
                    id=obj["id"],
                    prompt=obj["prompt"],
                    payload=obj.get("payload", {}),
                    task=obj.get("task", ""),
                )
            )
    return problems


def dump_problems(problems: list[Problem], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for p in problems:
            f.write(
                json.dumps(
                    {"id": p.id, "prompt": p.prompt, "payload": p.payload, "task": p.task},
                    ensure_ascii=False,
                )
                + "\n"
            )
