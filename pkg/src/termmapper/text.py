"""Shared text normalization: lowercasing, punctuation handling, tokenizing.

The rules here feed both the concept store's inverted index and search-term
preprocessing, so indexed names and queries always tokenize identically.

Punctuation handling: every ASCII punctuation character becomes a space,
except "-" and "/" when they sit directly between two alphanumeric
characters. That keeps tokens like "omega-3", "5-htp" and
"acetaminophen/codeine" intact while still splitting "(fish oil)" or
"st. john's".
"""

from __future__ import annotations

import string

# Minimal English stop-word list; deliberately short so drug-name tokens
# ("iron", "gold", "oral") are never dropped.
STOP_WORDS = frozenset(
    {"a", "an", "and", "by", "for", "in", "of", "or", "the", "to", "with"}
)

_PUNCTUATION = frozenset(string.punctuation)
_CONDITIONAL_KEEP = frozenset("-/")


def strip_punctuation(text: str) -> str:
    """Replace punctuation with spaces, keeping intra-word "-" and "/"."""
    out = []
    last = len(text) - 1
    for i, ch in enumerate(text):
        if ch in _PUNCTUATION:
            if (
                ch in _CONDITIONAL_KEEP
                and 0 < i < last
                and text[i - 1].isalnum()
                and text[i + 1].isalnum()
            ):
                out.append(ch)
            else:
                out.append(" ")
        else:
            out.append(ch)
    return "".join(out)


def tokenize(text: str) -> list[str]:
    """Lowercase, strip punctuation and split on whitespace.

    Stop words are retained; callers that need them removed (query
    preprocessing) filter afterwards. Token order follows the input.
    """
    return strip_punctuation(text.lower()).split()


def query_terms(text: str) -> list[str]:
    """Tokenize for searching: stop words removed, duplicates dropped.

    Order of first occurrence is preserved.
    """
    seen: set[str] = set()
    terms: list[str] = []
    for token in tokenize(text):
        if token in STOP_WORDS or token in seen:
            continue
        seen.add(token)
        terms.append(token)
    return terms
