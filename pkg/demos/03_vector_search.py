#!/usr/bin/env python3
"""Building a vector index and querying it.

Every concept name becomes a unit-length embedding; retrieval scores are
dot products, so querying an indexed name verbatim scores 1.0. The
exact-match threshold turns that into a gate: hits above it answer the
request without involving the generation step at all.
"""

from pathlib import Path

from termmapper import (
    HashingEmbedder,
    VectorIndex,
    build_store,
    exceeds_exact_threshold,
    query_top_k,
)

DATA = Path(__file__).parent / "data"
OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

store, _ = build_store(DATA / "CONCEPT.tsv")
embedder = HashingEmbedder()  # deterministic test provider; swap in a
# RemoteEmbedder pointed at a real embedding service for production use.

index = VectorIndex.build(list(store.concepts()), embedder)
index.save(OUT / "index.bin")
print(f"built index: {len(index)} vectors, dimension {index.dimension}")
print(f"provider: {index.provider_fingerprint}")
print()

for query in ["fish oil", "omega-3 supplement", "beta methasone cream"]:
    hits = query_top_k(query, 3, index, embedder)
    print(f"top 3 for {query!r}:")
    for hit in hits:
        print(f"  {hit.score:+.4f}  {hit.concept_id:>8}  {hit.concept_name}")
    exact = exceeds_exact_threshold(hits, 0.95)
    verdict = "exact match - skip generation" if exact else "no exact match - generate"
    print(f"  gate at 0.95: {verdict}")
    print()
