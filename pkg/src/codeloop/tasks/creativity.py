"""Divergent-word task: name words as semantically far apart as possible.

Given three fixed seed words, the model proposes up to seven words.  The
first five valid ones are scored: 100 times the mean cosine distance over
every pick-pick and pick-seed pair (25 pairs for 5 picks and 3 seeds).
Seed-seed pairs never count.  Fewer than five valid picks scores zero.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .base import Problem, VerifierReport
from .extract import answer_region

MAX_PICKS = 7
SCORED_PICKS = 5

PROMPT_TEMPLATE = (
    "Here are three seed words: {seeds}. Please name {max_picks} words that "
    "are as different from each other and from the seed words as possible. "
    "Rules: single English words, no proper nouns, no repeats of each other "
    "or of the seed words. Return only the words, one per line."
)

_WORD_RE = re.compile(r"[A-Za-z]+")


@dataclass
class EmbeddingTable:
    """Case-folded word-vector lookup."""

    vectors: dict[str, np.ndarray]

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingTable":
        """Read a text embedding file: one `word v1 v2 ... vd` per line."""
        vectors: dict[str, np.ndarray] = {}
        with open(path, encoding="utf-8") as f:
            for line in f:
                parts = line.rstrip("\n").split(" ")
                if len(parts) < 2:
                    continue
                word = parts[0].casefold()
                if word not in vectors:
                    vectors[word] = np.asarray(parts[1:], dtype=np.float64)
        return cls(vectors)

    def __contains__(self, word: str) -> bool:
        return word.casefold() in self.vectors

    def vector(self, word: str) -> np.ndarray:
        return self.vectors[word.casefold()]


def cosine_distance(u: np.ndarray, v: np.ndarray) -> float:
    norm = float(np.linalg.norm(u) * np.linalg.norm(v))
    if norm == 0.0:
        return 1.0
    return 1.0 - float(np.dot(u, v)) / norm


def parse_picks(answer: str, seeds: list[str], table: EmbeddingTable) -> list[str]:
    """First five valid words among the first seven parsed from the answer.

    Valid means: in the vocabulary and case-folded distinct from both the
    seeds and every earlier pick.
    """
    tokens = _WORD_RE.findall(answer_region(answer))[:MAX_PICKS]
    taken = {s.casefold() for s in seeds}
    picks: list[str] = []
    for token in tokens:
        folded = token.casefold()
        if folded in taken or token not in table:
            continue
        picks.append(token)
        taken.add(folded)
        if len(picks) == SCORED_PICKS:
            break
    return picks


def dat_score(picks: list[str], seeds: list[str], table: EmbeddingTable) -> float:
    """Mean pairwise cosine distance, scaled to 0..100.

    Pairs: every pick-pick pair plus every pick-seed pair; seed-seed pairs
    are excluded.  Requires exactly five picks.
    """
    if len(picks) != SCORED_PICKS:
        return 0.0
    vectors = [table.vector(w) for w in picks]
    seed_vectors = [table.vector(s) for s in seeds]
    distances = []
    for i in range(len(vectors)):
        for j in range(i + 1, len(vectors)):
            distances.append(cosine_distance(vectors[i], vectors[j]))
    for v in vectors:
        for s in seed_vectors:
            distances.append(cosine_distance(v, s))
    return 100.0 * float(np.mean(distances))


def make_problem(problem_id: str, seeds: list[str]) -> Problem:
    return Problem(
        id=problem_id,
        prompt=PROMPT_TEMPLATE.format(seeds=", ".join(seeds), max_picks=MAX_PICKS),
        payload={"seeds": seeds},
        task="creativity",
    )


@dataclass
class CreativityVerifier:
    """Scores answers against one shared embedding table."""

    table: EmbeddingTable
    name: str = "creativity"

    def verify(self, problem: Problem, answer: str | None) -> VerifierReport:
        seeds = problem.payload["seeds"]
        for seed in seeds:
            if seed not in self.table:
                return VerifierReport(0.0, f"seed word '{seed}' not in vocabulary")
        picks = parse_picks(answer or "", seeds, self.table)
        if len(picks) < SCORED_PICKS:
            return VerifierReport(
                0.0, f"only {len(picks)} valid words, need {SCORED_PICKS}"
            )
        raw = dat_score(picks, seeds, self.table)
        utility = min(max(raw / 100.0, 0.0), 1.0)
        return VerifierReport(utility, f"divergence score {raw:.2f}/100")
