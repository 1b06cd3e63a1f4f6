"""Deterministic synthetic vocabularies for scale and property tests."""

from __future__ import annotations

import random

from termmapper import Concept

_VOWELS = "aeiou"
_CONSONANTS = "bcdfghklmnprstvz"


def word_pool(count: int, seed: int = 11) -> list[str]:
    """Pronounceable pseudo-words, unique, deterministic for a seed."""
    rng = random.Random(seed)
    words: list[str] = []
    seen: set[str] = set()
    while len(words) < count:
        syllables = rng.randint(2, 4)
        word = "".join(
            rng.choice(_CONSONANTS) + rng.choice(_VOWELS) for _ in range(syllables)
        )
        if word not in seen:
            seen.add(word)
            words.append(word)
    return words


def synthetic_concepts(
    n: int, *, vocabulary: str = "RxNorm", seed: int = 11, start_id: int = 1000
) -> list[Concept]:
    """``n`` concepts with unique ids and unique two-word names.

    Word pairs use combinations (i < j), so no two names share the same
    token multiset and no two embeddings of the test provider collide.
    """
    pool_size = 40
    while pool_size * (pool_size - 1) // 2 < n:
        pool_size *= 2
    words = word_pool(pool_size, seed=seed)
    concepts: list[Concept] = []
    made = 0
    for i in range(pool_size):
        for j in range(i + 1, pool_size):
            if made >= n:
                return concepts
            cid = start_id + made
            concepts.append(
                Concept(
                    concept_id=cid,
                    concept_name=f"{words[i]} {words[j]}",
                    vocabulary_id=vocabulary,
                    concept_code=str(cid),
                    domain_id="Drug",
                    standard_concept="S",
                )
            )
            made += 1
    return concepts


def write_concept_tsv(path, concepts: list[Concept]) -> None:
    """Write concepts in the tab-separated vocabulary download layout."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            "concept_id\tconcept_name\tdomain_id\tvocabulary_id\t"
            "concept_class_id\tstandard_concept\tconcept_code\t"
            "valid_start_date\tvalid_end_date\tinvalid_reason\n"
        )
        for c in concepts:
            fh.write(
                f"{c.concept_id}\t{c.concept_name}\t{c.domain_id}\t"
                f"{c.vocabulary_id}\tIngredient\t{c.standard_concept or ''}\t"
                f"{c.concept_code}\t19700101\t20991231\t\n"
            )
