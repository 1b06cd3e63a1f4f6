"""End-to-end mapping flows and output-event assembly.

Four modes: "vector_search" (retrieval only), "llm" (generate then look the
reply up in the concept store), "rag" (retrieve; answer directly on a very
close match, otherwise generate with the retrieved terms in the prompt),
and "db_search" (preprocess and query the store directly).

Every run produces a list of MappingEvents whose payloads use exact,
stable field names:

* llm_output   — {"reply", "informal_name", "meta": [ ...run metadata... ]}
* omop_output  — {"search_term", "CONCEPT": [entries]} where each entry has
  concept_name, concept_id, vocabulary_id, concept_code,
  concept_name_similarity_score, CONCEPT_SYNONYM, CONCEPT_ANCESTOR,
  CONCEPT_RELATIONSHIP, in that order.
* vector_output — {"search_term", "hits": [entries]} with per-hit concept
  metadata resolved from the store.
* error        — {"informal_name", "error", "detail"}; emitted by the batch
  runner when one name fails without aborting the rest.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .concepts import ConceptDetails, ConceptStore, preprocess_search_term
from .errors import EmptyQueryError, EngineError, InvalidInputError
from .fuzzy import rank_candidates
from .llm import GenerationBackend, GenerationParams, LlmReply, build_rag_prompt, build_simple_prompt, generate
from .vectors import EmbeddingProvider, VectorHit, VectorIndex, exceeds_exact_threshold, query_top_k

MODES = ("vector_search", "llm", "rag", "db_search")

EMPTY_QUERY_WARNING = "empty_search_query"


@dataclass(frozen=True)
class DetailFlags:
    """Which auxiliary concept tables to include in output entries."""

    synonyms: bool = False
    ancestors: bool = False
    relationships: bool = False

    @property
    def any(self) -> bool:
        return self.synonyms or self.ancestors or self.relationships


@dataclass(frozen=True)
class PipelineOptions:
    """Every user-tunable knob; defaults apply when a request omits them."""

    mode: str = "rag"
    k: int = 5
    exact_match_threshold: float = 0.95
    similarity_threshold: float = 80.0
    vocabulary_filter: tuple[str, ...] | None = ("RxNorm",)
    include_synonyms: bool = False
    fetch_details: DetailFlags = field(default_factory=DetailFlags)
    text_search_limit: int = 100
    max_tokens: int = 64
    temperature: float = 0.0
    stop_sequences: tuple[str, ...] = ("\n",)

    def validate(self) -> None:
        if self.mode not in MODES:
            raise InvalidInputError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.k < 1:
            raise InvalidInputError("k must be >= 1")
        if not 0.0 < self.exact_match_threshold <= 1.0:
            raise InvalidInputError("exact_match_threshold must be in (0, 1]")
        if not 0.0 <= self.similarity_threshold <= 100.0:
            raise InvalidInputError("similarity_threshold must be in [0, 100]")
        if self.text_search_limit < 1:
            raise InvalidInputError("text_search_limit must be >= 1")
        if self.max_tokens < 1:
            raise InvalidInputError("max_tokens must be >= 1")

    @property
    def generation_params(self) -> GenerationParams:
        return GenerationParams(
            max_tokens=self.max_tokens,
            temperature=self.temperature,
            stop_sequences=self.stop_sequences,
        )


@dataclass
class PipelineDeps:
    """Shared read-only resources a pipeline run draws on."""

    store: ConceptStore | None = None
    index: VectorIndex | None = None
    embedder: EmbeddingProvider | None = None
    backend: GenerationBackend | None = None


@dataclass(frozen=True)
class MappingEvent:
    event: str
    payload: dict[str, Any]

    def to_dict(self) -> dict[str, Any]:
        return {"event": self.event, "payload": self.payload}


@dataclass(frozen=True)
class NameResult:
    """Events for one input name plus its wall time."""

    name: str
    events: list[MappingEvent]
    elapsed_ms: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "events": [event.to_dict() for event in self.events],
            "elapsed_ms": self.elapsed_ms,
        }


# -- payload assembly ----------------------------------------------------------


def _details_for(
    store: ConceptStore | None, concept_id: int, flags: DetailFlags
) -> ConceptDetails | None:
    if store is None or not flags.any or store.get(concept_id) is None:
        return None
    return store.fetch_concept_details(
        concept_id,
        synonyms=flags.synonyms,
        ancestors=flags.ancestors,
        relationships=flags.relationships,
    )


def _detail_arrays(details: ConceptDetails | None) -> tuple[list, list, list]:
    if details is None:
        return [], [], []
    synonyms = list(details.synonyms)
    ancestors = [
        {"ancestor_concept_id": anc, "levels_of_separation": levels}
        for anc, levels in details.ancestors
    ]
    relationships = [
        {"relationship_id": rel, "related_concept_id": other}
        for rel, other in details.relationships
    ]
    return synonyms, ancestors, relationships


def _concept_entry(
    concept, similarity: float, details: ConceptDetails | None
) -> dict[str, Any]:
    synonyms, ancestors, relationships = _detail_arrays(details)
    return {
        "concept_name": concept.concept_name,
        "concept_id": concept.concept_id,
        "vocabulary_id": concept.vocabulary_id,
        "concept_code": concept.concept_code,
        "concept_name_similarity_score": similarity,
        "CONCEPT_SYNONYM": synonyms,
        "CONCEPT_ANCESTOR": ancestors,
        "CONCEPT_RELATIONSHIP": relationships,
    }


def _llm_event(reply: LlmReply, informal_name: str) -> MappingEvent:
    meta = reply.meta
    usage: dict[str, Any] = {
        "prompt_tokens": meta.prompt_tokens,
        "completion_tokens": meta.completion_tokens,
        "total_tokens": meta.total_tokens,
    }
    entry: dict[str, Any] = {
        "id": meta.id,
        "object": "text_completion",
        "created": meta.created,
        "model": meta.model,
        "choices": [
            {
                "text": reply.raw_text,
                "index": 0,
                "logprobs": None,
                "finish_reason": meta.finish_reason,
            }
        ],
        "usage": usage,
    }
    if meta.usage_missing:
        entry["usage_missing"] = True
    return MappingEvent(
        event="llm_output",
        payload={"reply": reply.reply, "informal_name": informal_name, "meta": [entry]},
    )


def _hit_entry(
    hit: VectorHit, store: ConceptStore | None, flags: DetailFlags
) -> dict[str, Any]:
    concept = store.get(hit.concept_id) if store is not None else None
    details = _details_for(store, hit.concept_id, flags)
    synonyms, ancestors, relationships = _detail_arrays(details)
    return {
        "concept_id": hit.concept_id,
        "concept_name": hit.concept_name,
        "score": hit.score,
        "vocabulary_id": concept.vocabulary_id if concept else None,
        "concept_code": concept.concept_code if concept else None,
        "CONCEPT_SYNONYM": synonyms,
        "CONCEPT_ANCESTOR": ancestors,
        "CONCEPT_RELATIONSHIP": relationships,
    }


def _vector_event(
    search_term: str,
    hits: Sequence[VectorHit],
    store: ConceptStore | None,
    flags: DetailFlags,
) -> MappingEvent:
    return MappingEvent(
        event="vector_output",
        payload={
            "search_term": search_term,
            "hits": [_hit_entry(hit, store, flags) for hit in hits],
        },
    )


def error_event(informal_name: str, exc: EngineError) -> MappingEvent:
    return MappingEvent(
        event="error",
        payload={
            "informal_name": informal_name,
            "error": getattr(exc, "code", "engine_error"),
            "detail": str(exc),
        },
    )


def _store_query_event(
    search_term: str, options: PipelineOptions, deps: PipelineDeps
) -> MappingEvent:
    """Run the preprocessed store query and build the omop_output event."""
    assert deps.store is not None
    try:
        query = preprocess_search_term(
            search_term,
            vocabulary_filter=options.vocabulary_filter,
            include_synonyms=options.include_synonyms,
        )
    except EmptyQueryError:
        return MappingEvent(
            event="omop_output",
            payload={
                "search_term": search_term,
                "CONCEPT": [],
                "warning": EMPTY_QUERY_WARNING,
            },
        )
    matches = deps.store.search_with_matches(query, options.text_search_limit)
    extra_names: dict[int, list[str]] = {}
    if options.include_synonyms:
        for concept, matched in matches:
            extras = [n for n in matched if n != concept.concept_name]
            if extras:
                extra_names[concept.concept_id] = extras
    scored = rank_candidates(
        search_term,
        [concept for concept, _ in matches],
        options.similarity_threshold,
        extra_names=extra_names or None,
    )
    entries = [
        _concept_entry(
            item.concept,
            item.similarity,
            _details_for(deps.store, item.concept.concept_id, options.fetch_details),
        )
        for item in scored
    ]
    return MappingEvent(
        event="omop_output", payload={"search_term": search_term, "CONCEPT": entries}
    )


# -- pipeline modes -------------------------------------------------------------


def _require(deps: PipelineDeps, *, store=False, index=False, backend=False) -> None:
    if store and deps.store is None:
        raise InvalidInputError("this mode requires a concept store")
    if index and (deps.index is None or deps.embedder is None):
        raise InvalidInputError("this mode requires a vector index and embedder")
    if backend and deps.backend is None:
        raise InvalidInputError("this mode requires a generation backend")


def run_vector(
    name: str, options: PipelineOptions, deps: PipelineDeps
) -> list[MappingEvent]:
    """Vector search only: top-k hits with store metadata resolved."""
    _require(deps, index=True)
    hits = query_top_k(name, options.k, deps.index, deps.embedder)
    return [_vector_event(name, hits, deps.store, options.fetch_details)]


def run_db(name: str, options: PipelineOptions, deps: PipelineDeps) -> list[MappingEvent]:
    """Store query only: preprocess, text search, fuzzy rank."""
    _require(deps, store=True)
    return [_store_query_event(name, options, deps)]


def run_llm(name: str, options: PipelineOptions, deps: PipelineDeps) -> list[MappingEvent]:
    """Generate a formal name, then look the reply up in the store."""
    _require(deps, store=True, backend=True)
    prompt = build_simple_prompt(name)
    reply = generate(prompt, deps.backend, options.generation_params)
    return [
        _llm_event(reply, name),
        _store_query_event(reply.reply, options, deps),
    ]


def run_rag(name: str, options: PipelineOptions, deps: PipelineDeps) -> list[MappingEvent]:
    """Retrieval-augmented flow with the exact-match gate.

    When any retrieved hit scores at or above the exact-match threshold the
    hits answer the request directly and generation is skipped entirely;
    otherwise the hits are folded into the prompt and the generated reply
    is looked up in the store.
    """
    _require(deps, store=True, index=True, backend=True)
    hits = query_top_k(name, options.k, deps.index, deps.embedder)
    exact = exceeds_exact_threshold(hits, options.exact_match_threshold)
    if exact:
        return [_vector_event(name, exact, deps.store, options.fetch_details)]
    prompt = build_rag_prompt(name, hits)
    reply = generate(prompt, deps.backend, options.generation_params)
    return [
        _llm_event(reply, name),
        _store_query_event(reply.reply, options, deps),
    ]


_RUNNERS = {
    "vector_search": run_vector,
    "llm": run_llm,
    "rag": run_rag,
    "db_search": run_db,
}


def run_one(name: str, options: PipelineOptions, deps: PipelineDeps) -> list[MappingEvent]:
    """Dispatch one name through the configured mode."""
    options.validate()
    if not name or not name.strip():
        raise InvalidInputError("name must be non-empty")
    return _RUNNERS[options.mode](name, options, deps)


def run_batch(
    names: Sequence[str],
    options: PipelineOptions,
    deps: PipelineDeps,
    *,
    workers: int = 1,
) -> list[NameResult]:
    """Run every name, preserving input order.

    One name's engine failure becomes an "error" event in that name's
    result; it never aborts the batch. Wall time per name is recorded in
    milliseconds.
    """
    options.validate()

    def _run(name: str) -> NameResult:
        start = time.monotonic()
        try:
            events = run_one(name, options, deps)
        except EngineError as exc:
            events = [error_event(name, exc)]
        elapsed_ms = (time.monotonic() - start) * 1000.0
        return NameResult(name=name, events=events, elapsed_ms=elapsed_ms)

    if workers > 1 and len(names) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run, names))
    return [_run(name) for name in names]


# -- payload validation ----------------------------------------------------------

_LLM_PAYLOAD_KEYS = ("reply", "informal_name", "meta")
_CONCEPT_ENTRY_KEYS = (
    "concept_name",
    "concept_id",
    "vocabulary_id",
    "concept_code",
    "concept_name_similarity_score",
    "CONCEPT_SYNONYM",
    "CONCEPT_ANCESTOR",
    "CONCEPT_RELATIONSHIP",
)


def validate_llm_payload(payload: Mapping[str, Any]) -> None:
    """Raise InvalidInputError unless ``payload`` is a valid llm_output body."""
    for key in _LLM_PAYLOAD_KEYS:
        if key not in payload:
            raise InvalidInputError(f"llm_output payload missing key {key!r}")
    meta = payload["meta"]
    if not isinstance(meta, list) or not meta:
        raise InvalidInputError("llm_output meta must be a non-empty list")
    entry = meta[0]
    for key in ("id", "object", "created", "model", "choices", "usage"):
        if key not in entry:
            raise InvalidInputError(f"llm_output meta entry missing key {key!r}")
    for key in ("prompt_tokens", "completion_tokens", "total_tokens"):
        if key not in entry["usage"]:
            raise InvalidInputError(f"llm_output usage missing key {key!r}")
    for choice in entry["choices"]:
        for key in ("text", "index", "logprobs", "finish_reason"):
            if key not in choice:
                raise InvalidInputError(f"llm_output choice missing key {key!r}")


def validate_omop_payload(payload: Mapping[str, Any]) -> None:
    """Raise InvalidInputError unless ``payload`` is a valid omop_output body."""
    for key in ("search_term", "CONCEPT"):
        if key not in payload:
            raise InvalidInputError(f"omop_output payload missing key {key!r}")
    if not isinstance(payload["CONCEPT"], list):
        raise InvalidInputError("omop_output CONCEPT must be a list")
    for entry in payload["CONCEPT"]:
        for key in _CONCEPT_ENTRY_KEYS:
            if key not in entry:
                raise InvalidInputError(f"CONCEPT entry missing key {key!r}")
