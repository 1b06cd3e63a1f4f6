from __future__ import annotations

import json

import pytest

from termmapper import (
    InvalidInputError,
    PipelineDeps,
    PipelineOptions,
    StubBackend,
    run_batch,
    run_db,
    run_llm,
    run_one,
    run_rag,
    run_vector,
    validate_llm_payload,
    validate_omop_payload,
)
from termmapper.pipeline import DetailFlags

from .oracles import exhaustive_top_k


def test_default_options_match_documented_defaults():
    options = PipelineOptions()
    assert options.mode == "rag"
    assert options.k == 5
    assert options.exact_match_threshold == 0.95
    assert options.similarity_threshold == 80.0
    assert options.vocabulary_filter == ("RxNorm",)
    assert options.include_synonyms is False
    assert options.fetch_details == DetailFlags(False, False, False)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"mode": "bogus"},
        {"k": 0},
        {"exact_match_threshold": 0.0},
        {"exact_match_threshold": 1.5},
        {"similarity_threshold": -1.0},
        {"similarity_threshold": 101.0},
        {"text_search_limit": 0},
        {"max_tokens": 0},
    ],
)
def test_option_validation(kwargs):
    with pytest.raises(InvalidInputError):
        PipelineOptions(**kwargs).validate()


# -- rag -------------------------------------------------------------------------


def test_rag_exact_match_skips_generation(fixture_deps, stub_backend):
    events = run_rag("betamethasone", PipelineOptions(), fixture_deps)
    assert [e.event for e in events] == ["vector_output"]
    assert stub_backend.call_count == 0
    hit = events[0].payload["hits"][0]
    assert hit["concept_id"] == 920458
    assert hit["score"] == pytest.approx(1.0, abs=1e-6)
    assert hit["vocabulary_id"] == "RxNorm"


def test_rag_worked_example(fixture_deps, stub_backend):
    events = run_rag("Betnovate Scalp Application", PipelineOptions(), fixture_deps)
    assert [e.event for e in events] == ["llm_output", "omop_output"]
    assert stub_backend.call_count == 1

    llm = events[0].payload
    assert llm["reply"] == "Betamethasone"
    assert llm["informal_name"] == "Betnovate Scalp Application"
    meta = llm["meta"][0]
    assert meta["object"] == "text_completion"
    assert meta["choices"][0]["finish_reason"] == "stop"
    assert meta["usage"]["prompt_tokens"] == 100
    assert meta["usage"]["completion_tokens"] == 6

    omop = events[1].payload
    assert omop["search_term"] == "Betamethasone"
    entries = omop["CONCEPT"]
    assert [e["concept_id"] for e in entries] == [920458, 920827]
    assert entries[0]["concept_name_similarity_score"] == 100.0
    assert entries[1]["concept_name_similarity_score"] == pytest.approx(
        83.87096774193549, abs=1e-9
    )


def test_rag_prompt_contains_retrieved_terms(fixture_deps, stub_backend):
    run_rag("Betnovate Scalp Application", PipelineOptions(), fixture_deps)
    prompt = stub_backend.prompts[0]
    assert "Possibly related RxNorm terms:" in prompt
    assert "- betamethasone" in prompt


def test_rag_reply_of_stop_words_yields_empty_concepts(fixture_store, fixture_index, embedder):
    backend = StubBackend({"mystery": "and the of"})
    deps = PipelineDeps(
        store=fixture_store, index=fixture_index, embedder=embedder, backend=backend
    )
    events = run_rag("mystery", PipelineOptions(), deps)
    assert [e.event for e in events] == ["llm_output", "omop_output"]
    assert events[1].payload["CONCEPT"] == []
    assert events[1].payload["warning"] == "empty_search_query"


def test_rag_gate_fires_iff_score_reaches_threshold(fixture_deps, stub_backend):
    # all three stored names gate out generation; two unseen names do not
    for name in ("betamethasone", "betamethasone 1 MG", "acetaminophen"):
        events = run_rag(name, PipelineOptions(), fixture_deps)
        assert [e.event for e in events] == ["vector_output"]
    assert stub_backend.call_count == 0
    for i, name in enumerate(("Betnovate Scalp Application", "qqqq"), start=1):
        run_rag(name, PipelineOptions(), fixture_deps)
        assert stub_backend.call_count == i


# -- llm -------------------------------------------------------------------------


def test_llm_worked_example(fixture_deps):
    events = run_llm("Betnovate Scalp Application", PipelineOptions(mode="llm"), fixture_deps)
    assert [e.event for e in events] == ["llm_output", "omop_output"]
    assert events[0].payload["reply"] == "Betamethasone"
    assert [c["concept_id"] for c in events[1].payload["CONCEPT"]] == [920458, 920827]


def test_llm_reply_with_different_case_still_scores_100(fixture_store):
    backend = StubBackend({"x": "ACETAMINOPHEN"})
    deps = PipelineDeps(store=fixture_store, backend=backend)
    events = run_llm("x", PipelineOptions(mode="llm"), deps)
    entries = events[1].payload["CONCEPT"]
    assert entries[0]["concept_id"] == 1125315
    assert entries[0]["concept_name_similarity_score"] == 100.0


def test_llm_unknown_reply_gives_empty_concepts(fixture_store):
    backend = StubBackend({"x": "qqqq"})
    deps = PipelineDeps(store=fixture_store, backend=backend)
    events = run_llm("x", PipelineOptions(mode="llm"), deps)
    assert events[1].payload["CONCEPT"] == []


# -- vector ----------------------------------------------------------------------


def test_vector_self_query_scores_one(fixture_deps):
    events = run_vector("acetaminophen", PipelineOptions(mode="vector_search"), fixture_deps)
    hits = events[0].payload["hits"]
    assert hits[0]["concept_id"] == 1125315
    assert hits[0]["score"] == pytest.approx(1.0, abs=1e-6)


def test_vector_k_caps_at_index_size(fixture_deps):
    events = run_vector("anything", PipelineOptions(mode="vector_search", k=5), fixture_deps)
    assert len(events[0].payload["hits"]) == 3


def test_vector_ordering_matches_oracle(fixture_deps, fixture_index, embedder):
    from termmapper import embed

    events = run_vector("betamethasone cream", PipelineOptions(mode="vector_search"), fixture_deps)
    expected = exhaustive_top_k(
        fixture_index.matrix,
        fixture_index.ids,
        embed("betamethasone cream", embedder),
        5,
    )
    got = [(h["concept_id"], h["score"]) for h in events[0].payload["hits"]]
    assert [g[0] for g in got] == [e[0] for e in expected]
    for (_, score), (_, expected_score) in zip(got, expected):
        assert score == pytest.approx(expected_score, abs=1e-9)


# -- db --------------------------------------------------------------------------


def test_db_search_term_is_the_original_name(fixture_deps):
    events = run_db("paracetamol and caffeine", PipelineOptions(mode="db_search"), fixture_deps)
    assert events[0].payload["search_term"] == "paracetamol and caffeine"


def test_db_all_stop_words_warns(fixture_deps):
    events = run_db("and the of", PipelineOptions(mode="db_search"), fixture_deps)
    payload = events[0].payload
    assert payload["CONCEPT"] == []
    assert payload["warning"] == "empty_search_query"


def test_db_exact_name_scores_100(fixture_deps):
    events = run_db("acetaminophen", PipelineOptions(mode="db_search"), fixture_deps)
    top = events[0].payload["CONCEPT"][0]
    assert top["concept_id"] == 1125315
    assert top["concept_name_similarity_score"] == 100.0


def test_db_synonym_match_scores_the_matching_name(fixture_deps):
    options = PipelineOptions(mode="db_search", include_synonyms=True, similarity_threshold=50.0)
    events = run_db("diprosone", options, fixture_deps)
    entries = events[0].payload["CONCEPT"]
    assert entries[0]["concept_id"] == 920458
    assert entries[0]["concept_name_similarity_score"] == 100.0


def test_db_details_flags_populate_arrays(fixture_deps):
    options = PipelineOptions(
        mode="db_search",
        similarity_threshold=50.0,
        fetch_details=DetailFlags(synonyms=True, ancestors=True, relationships=True),
    )
    events = run_db("betamethasone", options, fixture_deps)
    by_id = {e["concept_id"]: e for e in events[0].payload["CONCEPT"]}
    assert by_id[920458]["CONCEPT_SYNONYM"] == ["diprosone"]
    assert by_id[920827]["CONCEPT_ANCESTOR"] == [
        {"ancestor_concept_id": 920458, "levels_of_separation": 1}
    ]
    assert by_id[920827]["CONCEPT_RELATIONSHIP"] == [
        {"relationship_id": "RxNorm has ing", "related_concept_id": 920458}
    ]


# -- batch -----------------------------------------------------------------------


def test_batch_isolates_failures(fixture_store):
    class ExplodingBackend(StubBackend):
        def complete(self, rendered_prompt, params):
            if "bad" in rendered_prompt:
                from termmapper import BackendUnavailableError

                raise BackendUnavailableError("down")
            return super().complete(rendered_prompt, params)

    deps = PipelineDeps(store=fixture_store, backend=ExplodingBackend({"ok": "acetaminophen"}))
    results = run_batch(["ok", "bad"], PipelineOptions(mode="llm"), deps)
    assert [r.name for r in results] == ["ok", "bad"]
    assert [e.event for e in results[0].events] == ["llm_output", "omop_output"]
    assert [e.event for e in results[1].events] == ["error"]
    assert results[1].events[0].payload["error"] == "backend_unavailable"


def test_batch_empty_input(fixture_deps):
    assert run_batch([], PipelineOptions(), fixture_deps) == []


def test_batch_preserves_order_and_times_each_name(fixture_deps):
    names = [f"name {i}" for i in range(40)]
    results = run_batch(names, PipelineOptions(mode="db_search"), fixture_deps)
    assert [r.name for r in results] == names
    assert all(r.elapsed_ms >= 0.0 for r in results)


def test_batch_worker_pool_preserves_order(fixture_deps):
    names = [f"name {i}" for i in range(20)]
    sequential = run_batch(names, PipelineOptions(mode="db_search"), fixture_deps)
    threaded = run_batch(names, PipelineOptions(mode="db_search"), fixture_deps, workers=4)
    assert [r.name for r in threaded] == [r.name for r in sequential]
    assert [[e.payload for e in r.events] for r in threaded] == [
        [e.payload for e in r.events] for r in sequential
    ]


def test_400_name_batch_completes_with_timings(fixture_deps):
    names = [f"batch name {i}" for i in range(400)]
    results = run_batch(names, PipelineOptions(mode="db_search"), fixture_deps)
    assert len(results) == 400
    assert all(r.elapsed_ms >= 0.0 for r in results)


def test_run_one_rejects_blank_names(fixture_deps):
    with pytest.raises(InvalidInputError):
        run_one("  ", PipelineOptions(), fixture_deps)


def test_missing_dependency_is_an_error(fixture_store):
    deps = PipelineDeps(store=fixture_store)
    with pytest.raises(InvalidInputError):
        run_one("x", PipelineOptions(mode="rag"), deps)


# -- serialization ----------------------------------------------------------------


def test_events_round_trip_through_json(fixture_deps):
    events = run_rag("Betnovate Scalp Application", PipelineOptions(), fixture_deps)
    for event in events:
        parsed = json.loads(json.dumps(event.to_dict()))
        assert parsed["event"] == event.event
        assert parsed["payload"] == event.payload


def test_reference_listings_validate_against_schema(data_dir):
    llm_payload = json.loads((data_dir / "llm_output_example.json").read_text())
    omop_payload = json.loads((data_dir / "omop_output_example.json").read_text())
    validate_llm_payload(llm_payload)
    validate_omop_payload(omop_payload)


def test_generated_events_validate_against_schema(fixture_deps):
    events = run_rag("Betnovate Scalp Application", PipelineOptions(), fixture_deps)
    validate_llm_payload(events[0].payload)
    validate_omop_payload(events[1].payload)


def test_schema_validation_rejects_missing_keys():
    with pytest.raises(InvalidInputError):
        validate_omop_payload({"search_term": "x"})
    with pytest.raises(InvalidInputError):
        validate_llm_payload({"reply": "x", "informal_name": "y", "meta": []})


def test_scores_in_events_equal_fuzzy_outputs_verbatim(fixture_deps):
    from termmapper import indel_similarity

    events = run_db("betamethasone", PipelineOptions(mode="db_search"), fixture_deps)
    for entry in events[0].payload["CONCEPT"]:
        assert entry["concept_name_similarity_score"] == indel_similarity(
            "betamethasone", entry["concept_name"]
        )
