"""Normalized insert/delete string similarity and candidate ranking.

The score between two strings a and b is

    100 * (1 - d_indel(lower(a), lower(b)) / (len(a) + len(b)))

where d_indel is the minimum number of single-character insertions and
deletions turning one lowercased string into the other (substitution is not
an allowed edit). 100.0 means the lowercased strings are equal; 0.0 means
they share no common subsequence.

d_indel is computed exactly through the longest common subsequence:
d_indel(a, b) = len(a) + len(b) - 2 * LCS(a, b). LCS length uses the
bit-parallel row algorithm (one integer per input, arbitrary precision), so
scoring stays cheap even when ranking thousands of candidates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .concepts import Concept
from .errors import InvalidInputError


def _lcs_length(a: str, b: str) -> int:
    """Length of the longest common subsequence of a and b.

    Bit-parallel formulation: the i-th zero bit of the running register
    marks a column where an LCS match has been consumed. Python's unbounded
    ints make word-size chunking unnecessary; high garbage bits never
    propagate back into the low len(a) bits.
    """
    if not a or not b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    masks: dict[str, int] = {}
    bit = 1
    for ch in a:
        masks[ch] = masks.get(ch, 0) | bit
        bit <<= 1
    s = bit - 1
    for ch in b:
        m = masks.get(ch, 0)
        u = s & m
        s = (s + u) | (s - u)
    return len(a) - (s & (bit - 1)).bit_count()


def indel_distance(a: str, b: str) -> int:
    """Exact insert/delete edit distance between a and b (case-sensitive)."""
    return len(a) + len(b) - 2 * _lcs_length(a, b)


def indel_similarity(a: str, b: str) -> float:
    """Case-insensitive insert/delete similarity in [0, 100].

    Symmetric; returns 100.0 iff the lowercased strings are equal.
    Raises InvalidInputError when either string is empty.
    """
    if not a or not b:
        raise InvalidInputError("similarity requires two non-empty strings")
    la = a.lower()
    lb = b.lower()
    if la == lb:
        return 100.0
    total = len(la) + len(lb)
    return 100.0 * (1.0 - indel_distance(la, lb) / total)


@dataclass(frozen=True)
class ScoredConcept:
    """A candidate concept with its similarity to the search term."""

    concept: Concept
    similarity: float


def rank_candidates(
    search_term: str,
    candidates: Sequence[Concept],
    threshold: float,
    *,
    extra_names: Mapping[int, Sequence[str]] | None = None,
) -> list[ScoredConcept]:
    """Score candidates against the search term, filter and order them.

    Each candidate is scored against its concept_name; when ``extra_names``
    supplies additional names for a concept_id (synonyms that matched the
    text query), the best score across all names wins. Candidates below
    ``threshold`` are dropped; the rest are sorted by similarity descending,
    ties broken by concept_id ascending. Scores are carried verbatim into
    output events.
    """
    if not 0.0 <= threshold <= 100.0:
        raise InvalidInputError(f"threshold must be in [0, 100], got {threshold}")
    scored: list[ScoredConcept] = []
    for concept in candidates:
        similarity = indel_similarity(search_term, concept.concept_name)
        if extra_names:
            for name in extra_names.get(concept.concept_id, ()):
                if name and name != concept.concept_name:
                    similarity = max(similarity, indel_similarity(search_term, name))
        if similarity >= threshold:
            scored.append(ScoredConcept(concept=concept, similarity=similarity))
    scored.sort(key=lambda s: (-s.similarity, s.concept.concept_id))
    return scored
