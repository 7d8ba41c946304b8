"""Divergent-word task tests with small synthetic embedding tables."""

from __future__ import annotations

import numpy as np
import pytest

from codeloop.tasks.base import Problem
from codeloop.tasks.creativity import (
    CreativityVerifier,
    EmbeddingTable,
    cosine_distance,
    dat_score,
    make_problem,
    parse_picks,
)

SEEDS = ["river", "stone", "cloud"]
PICKS = ["violin", "mercy", "tractor", "algebra", "pepper"]


def orthonormal_table() -> EmbeddingTable:
    words = SEEDS + PICKS
    eye = np.eye(len(words))
    return EmbeddingTable({w: eye[i] for i, w in enumerate(words)})


def seeded_problem() -> Problem:
    return make_problem("dat-1", SEEDS)


# --------------------------------------------------------------------------
# scoring math
# --------------------------------------------------------------------------


def test_orthogonal_words_score_100():
    table = orthonormal_table()
    assert dat_score(PICKS, SEEDS, table) == pytest.approx(100.0)


def test_identical_vectors_score_0():
    v = np.array([1.0, 2.0, 3.0])
    table = EmbeddingTable({w: v.copy() for w in SEEDS + PICKS})
    assert dat_score(PICKS, SEEDS, table) == pytest.approx(0.0)


def test_pair_set_is_25_pairs_computed_independently():
    """Recompute the score by explicit pair enumeration on random vectors."""
    rng = np.random.default_rng(17)
    words = SEEDS + PICKS
    table = EmbeddingTable({w: rng.normal(size=12) for w in words})

    def cos_dist(a: str, b: str) -> float:
        u, v = table.vector(a), table.vector(b)
        return 1.0 - float(u @ v / (np.linalg.norm(u) * np.linalg.norm(v)))

    pairs = []
    for i in range(5):
        for j in range(i + 1, 5):
            pairs.append(cos_dist(PICKS[i], PICKS[j]))
    for p in PICKS:
        for s in SEEDS:
            pairs.append(cos_dist(p, s))
    assert len(pairs) == 25
    expected = 100.0 * sum(pairs) / 25
    assert dat_score(PICKS, SEEDS, table) == pytest.approx(expected, abs=1e-9)


def test_score_invariant_under_pick_order():
    rng = np.random.default_rng(3)
    table = EmbeddingTable({w: rng.normal(size=6) for w in SEEDS + PICKS})
    base = dat_score(PICKS, SEEDS, table)
    shuffled = [PICKS[i] for i in (4, 2, 0, 3, 1)]
    assert dat_score(shuffled, SEEDS, table) == pytest.approx(base, abs=1e-12)


def test_score_requires_exactly_five_picks():
    table = orthonormal_table()
    assert dat_score(PICKS[:4], SEEDS, table) == 0.0
    assert dat_score([], SEEDS, table) == 0.0


def test_cosine_distance_range_and_zero_norm():
    u = np.array([1.0, 0.0])
    assert cosine_distance(u, u) == pytest.approx(0.0)
    assert cosine_distance(u, -u) == pytest.approx(2.0)
    assert cosine_distance(u, np.array([0.0, 1.0])) == pytest.approx(1.0)
    assert cosine_distance(u, np.zeros(2)) == 1.0


# --------------------------------------------------------------------------
# pick parsing
# --------------------------------------------------------------------------


def test_parse_picks_first_five_valid():
    table = orthonormal_table()
    answer = "violin, mercy, tractor, algebra, pepper"
    assert parse_picks(answer, SEEDS, table) == PICKS


def test_parse_picks_skips_unknown_and_duplicate_words():
    table = orthonormal_table()
    answer = "violin xylophone violin Mercy tractor algebra pepper"
    # xylophone is out of vocabulary, the repeat and case variant of
    # earlier words are dropped, and five valid picks remain
    assert parse_picks(answer, SEEDS, table) == [
        "violin",
        "Mercy",
        "tractor",
        "algebra",
        "pepper",
    ]


def test_parse_picks_skips_seed_words():
    table = orthonormal_table()
    answer = "river Stone violin mercy tractor algebra pepper"
    assert parse_picks(answer, SEEDS, table) == PICKS


def test_parse_picks_considers_only_first_seven_tokens():
    table = orthonormal_table()
    # tokens 1..7 include three junk words, so only four valid words are
    # reachable; pepper sits at position 8 and must not be considered
    answer = "violin junk1 mercy junk2 tractor junk3 algebra pepper"
    picks = parse_picks(answer, SEEDS, table)
    assert picks == ["violin", "mercy", "tractor", "algebra"]


def test_parse_picks_reads_answer_region():
    table = orthonormal_table()
    answer = (
        "Here is my reasoning about stone and cloud.\n"
        "<answer>violin mercy tractor algebra pepper</answer>"
    )
    assert parse_picks(answer, SEEDS, table) == PICKS


# --------------------------------------------------------------------------
# verifier
# --------------------------------------------------------------------------


def test_verifier_full_marks_on_orthogonal_picks():
    verifier = CreativityVerifier(table=orthonormal_table())
    report = verifier.verify(seeded_problem(), " ".join(PICKS))
    assert report.score == 1.0
    assert report.reason == "divergence score 100.00/100"


def test_verifier_zero_on_too_few_valid():
    verifier = CreativityVerifier(table=orthonormal_table())
    report = verifier.verify(seeded_problem(), "violin mercy")
    assert report.score == 0.0
    assert report.reason == "only 2 valid words, need 5"
    assert verifier.verify(seeded_problem(), None).score == 0.0


def test_verifier_clamps_scores_above_100():
    # picks antipodal to the seeds: pick-seed distance 2, pick-pick 0,
    # raw score 100 * (15*2 + 10*0) / 25 = 120
    vec = np.array([1.0, 0.0])
    table = EmbeddingTable(
        {**{s: vec.copy() for s in SEEDS}, **{p: -vec.copy() for p in PICKS}}
    )
    assert dat_score(PICKS, SEEDS, table) == pytest.approx(120.0)
    verifier = CreativityVerifier(table=table)
    assert verifier.verify(seeded_problem(), " ".join(PICKS)).score == 1.0


def test_verifier_flags_missing_seed_vector():
    table = EmbeddingTable({w: np.ones(3) for w in PICKS})
    verifier = CreativityVerifier(table=table)
    report = verifier.verify(seeded_problem(), " ".join(PICKS))
    assert report.score == 0.0
    assert "seed word" in report.reason


# --------------------------------------------------------------------------
# embedding file loading
# --------------------------------------------------------------------------


def test_embedding_table_load(tmp_path):
    path = tmp_path / "vectors.txt"
    path.write_text(
        "apple 1.0 0.0 0.5\n"
        "Banana 0.0 1.0 0.25\n"
        "apple 9.0 9.0 9.0\n"  # duplicate: first occurrence wins
        "\n"
        "loner\n"  # malformed: skipped
    )
    table = EmbeddingTable.load(path)
    assert set(table.vectors) == {"apple", "banana"}
    assert table.vector("APPLE").tolist() == [1.0, 0.0, 0.5]
    assert "BANANA" in table
    assert "loner" not in table


def test_problem_prompt_mentions_rules():
    p = seeded_problem()
    assert "river, stone, cloud" in p.prompt
    assert p.task == "creativity"
    assert p.payload == {"seeds": SEEDS}
