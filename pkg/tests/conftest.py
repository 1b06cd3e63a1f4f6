from __future__ import annotations

from pathlib import Path

import pytest

from termmapper import (
    Concept,
    HashingEmbedder,
    PipelineDeps,
    StubBackend,
    VectorIndex,
    build_store,
)

DATA = Path(__file__).parent / "data"

FIXTURE_CONCEPTS = [
    Concept(920458, "betamethasone", "RxNorm", "1514", "Drug", "S"),
    Concept(920827, "betamethasone 1 MG", "RxNorm", "332616", "Drug", "S"),
    Concept(1125315, "acetaminophen", "RxNorm", "161", "Drug", "S"),
]


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture()
def fixture_store():
    store, _ = build_store(
        DATA / "concepts.tsv",
        DATA / "synonyms.tsv",
        DATA / "ancestors.tsv",
        DATA / "relationships.tsv",
    )
    return store


@pytest.fixture()
def embedder() -> HashingEmbedder:
    return HashingEmbedder()


@pytest.fixture()
def fixture_index(embedder) -> VectorIndex:
    return VectorIndex.build(FIXTURE_CONCEPTS, embedder)


@pytest.fixture()
def stub_backend() -> StubBackend:
    return StubBackend({"Betnovate Scalp Application": "Betamethasone"})


@pytest.fixture()
def fixture_deps(fixture_store, fixture_index, embedder, stub_backend) -> PipelineDeps:
    return PipelineDeps(
        store=fixture_store,
        index=fixture_index,
        embedder=embedder,
        backend=stub_backend,
    )
