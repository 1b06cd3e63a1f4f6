#!/usr/bin/env python3
"""The HTTP surface, exercised in-process.

The same app normally runs as a server (`termmapper serve --config
demos/data/server_config.json` after demo 06 builds the store and index);
here a test client drives it directly so the request and response shapes
are easy to see.
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from termmapper import HashingEmbedder, PipelineDeps, StubBackend, VectorIndex, build_store
from termmapper.server import create_app

DATA = Path(__file__).parent / "data"

store, _ = build_store(DATA / "CONCEPT.tsv", DATA / "CONCEPT_SYNONYM.tsv")
embedder = HashingEmbedder()
deps = PipelineDeps(
    store=store,
    index=VectorIndex.build(list(store.concepts()), embedder),
    embedder=embedder,
    backend=StubBackend(json.loads((DATA / "stub_replies.json").read_text())),
)
client = TestClient(create_app(deps))

print("GET /api/health")
print(json.dumps(client.get("/api/health").json(), indent=2))
print()

print('POST /api/pipeline {"names": ["Tylenol", "Advil"]}')
response = client.post(
    "/api/pipeline",
    json={"names": ["Tylenol", "Advil"], "pipeline_options": {"mode": "llm"}},
)
for result in response.json():
    reply = result["events"][0]["payload"]["reply"]
    concepts = [c["concept_name"] for c in result["events"][1]["payload"]["CONCEPT"]]
    print(f"  {result['name']}: reply={reply!r} concepts={concepts}")
print()

print("GET /api/concepts/1125315?synonyms=true")
print(json.dumps(client.get("/api/concepts/1125315", params={"synonyms": True}).json(), indent=2))
print()

print("validation: empty names ->", client.post("/api/pipeline", json={"names": []}).status_code)
print(
    "validation: unknown option ->",
    client.post("/api/pipeline", json={"names": ["x"], "pipeline_options": {"zap": 1}}).status_code,
)
