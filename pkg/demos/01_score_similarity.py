#!/usr/bin/env python3
"""How the string similarity score behaves.

The score is a normalized insert/delete ratio on lowercased strings: 100
means identical (ignoring case), 0 means nothing in common, and every
missing or extra character costs against the combined length.
"""

from termmapper import Concept, indel_distance, indel_similarity, rank_candidates

pairs = [
    ("Betamethasone", "betamethasone"),
    ("Betamethasone", "betamethasone 1 MG"),
    ("paracetamol", "acetaminophen"),
    ("Advil", "ibuprofen"),
    ("omeprazole", "esomeprazole"),
    ("abc", "xyz"),
]

print("similarity scores")
print("-" * 60)
for a, b in pairs:
    distance = indel_distance(a.lower(), b.lower())
    score = indel_similarity(a, b)
    print(f"{a!r:>18} vs {b!r:<24} d={distance:<3} score={score:.4f}")

# Ranking candidates the way the pipeline does: score each concept name,
# drop anything below the threshold, best first, ties by concept id.
candidates = [
    Concept(920827, "betamethasone 1 MG", "RxNorm", "332616"),
    Concept(920458, "betamethasone", "RxNorm", "1514"),
    Concept(1125315, "acetaminophen", "RxNorm", "161"),
]
print()
print("ranked candidates for 'Betamethasone' at threshold 80")
print("-" * 60)
for item in rank_candidates("Betamethasone", candidates, threshold=80.0):
    print(f"{item.concept.concept_id:>8}  {item.concept.concept_name:<24} {item.similarity:.10f}")
