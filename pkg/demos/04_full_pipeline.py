#!/usr/bin/env python3
"""The four pipeline modes end to end, with the stub generation backend.

Modes: "db_search" queries the store directly; "vector_search" returns
ranked embedding hits; "llm" asks the backend for a formal name and looks
that up; "rag" retrieves first and only generates when nothing scores
above the exact-match threshold.
"""

import json
from pathlib import Path

from termmapper import (
    HashingEmbedder,
    PipelineDeps,
    PipelineOptions,
    StubBackend,
    VectorIndex,
    build_store,
    run_batch,
)

DATA = Path(__file__).parent / "data"

store, _ = build_store(DATA / "CONCEPT.tsv", DATA / "CONCEPT_SYNONYM.tsv")
embedder = HashingEmbedder()
index = VectorIndex.build(list(store.concepts()), embedder)
backend = StubBackend(json.loads((DATA / "stub_replies.json").read_text()))
deps = PipelineDeps(store=store, index=index, embedder=embedder, backend=backend)

# One already-formal name and one informal brand name, through RAG.
options = PipelineOptions(mode="rag")
for result in run_batch(["betamethasone", "Betnovate Scalp Application"], options, deps):
    print(f"=== {result.name} ({result.elapsed_ms:.1f} ms)")
    for event in result.events:
        print(f"--- event: {event.event}")
        print(json.dumps(event.payload, indent=2))
    print()

print(f"generation calls so far: {backend.call_count} (the exact match skipped one)")
print()

# The same informal name through the plain LLM mode.
events = run_batch(["Now Foods omega-3"], PipelineOptions(mode="llm"), deps)[0].events
print("=== Now Foods omega-3 via llm mode")
print("reply:", events[0].payload["reply"])
print("concepts:", [c["concept_name"] for c in events[1].payload["CONCEPT"]])
