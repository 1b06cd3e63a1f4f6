#!/usr/bin/env python3
"""Ingesting a vocabulary and searching it with OR-of-terms queries.

Search terms are preprocessed first: lowercased, punctuation stripped
(keeping intra-word "-" and "/"), stop words removed. Every surviving term
is OR-ed against the tokenized concept names.
"""

from pathlib import Path

from termmapper import EmptyQueryError, build_store, preprocess_search_term

DATA = Path(__file__).parent / "data"

store, stats = build_store(DATA / "CONCEPT.tsv", DATA / "CONCEPT_SYNONYM.tsv")
print(f"ingested: {stats.concepts} concepts, {stats.synonyms} synonyms")
print()

for raw in [
    "paracetamol and caffeine",
    "Omega-3 (fish oil)",
    "betamethasone",
    "and the of",
]:
    print(f"input: {raw!r}")
    try:
        query = preprocess_search_term(raw)
    except EmptyQueryError:
        print("  -> nothing searchable (stop words and punctuation only)")
        print()
        continue
    print(f"  terms:    {list(query.terms)}")
    print(f"  rendered: {query.rendered!r}")
    for concept in store.text_search(query, limit=5):
        print(f"  match: {concept.concept_id:>8}  {concept.concept_name}")
    print()

# Synonyms are opt-in: "paracetamol" only reaches acetaminophen through
# its synonym row.
query = preprocess_search_term("paracetamol", include_synonyms=True)
hits = store.text_search(query, limit=5)
print(f"with synonyms, {query.rendered!r} ->", [c.concept_name for c in hits])
