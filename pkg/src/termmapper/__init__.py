"""termmapper: informal medical terms to standard vocabulary concepts.

The engine combines three signals: dense vector search over concept-name
embeddings (dot product of unit vectors, exact exhaustive scan), an
OR-of-terms text search over an embedded concept store, and normalized
insert/delete string similarity for ranking. An optional generation step
suggests a formal name when retrieval alone is not confident; it runs
behind a pluggable backend so no model ships with the package.
"""

from .concepts import (
    Concept,
    ConceptDetails,
    ConceptStore,
    IngestStats,
    SearchQuery,
    build_store,
    ingest_vocabulary,
    preprocess_search_term,
    store_from_concepts,
)
from .errors import (
    BackendUnavailableError,
    BuildFailedError,
    ConceptNotFoundError,
    ConfigError,
    DimensionMismatchError,
    EmptyGenerationError,
    EmptyQueryError,
    EngineError,
    EvalValidationError,
    InvalidInputError,
    ProviderUnavailableError,
    StoreFormatError,
    StoreUnavailableError,
    VocabularyFormatError,
)
from .evaluation import (
    AnnotatedExample,
    AssessmentRecord,
    ContingencyReport,
    MethodRow,
    classify,
    evaluate,
    load_annotations,
    load_results,
    summarize,
    top5_comparison,
)
from .fuzzy import ScoredConcept, indel_distance, indel_similarity, rank_candidates
from .llm import (
    DEFAULT_FEW_SHOT,
    GenerationParams,
    LlmReply,
    Prompt,
    RemoteBackend,
    StubBackend,
    build_rag_prompt,
    build_simple_prompt,
    generate,
    parse_reply,
    render_prompt,
)
from .pipeline import (
    DetailFlags,
    MappingEvent,
    NameResult,
    PipelineDeps,
    PipelineOptions,
    run_batch,
    run_db,
    run_llm,
    run_one,
    run_rag,
    run_vector,
    validate_llm_payload,
    validate_omop_payload,
)
from .vectors import (
    HashingEmbedder,
    RemoteEmbedder,
    VectorHit,
    VectorIndex,
    embed,
    exceeds_exact_threshold,
    query_top_k,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotatedExample",
    "AssessmentRecord",
    "BackendUnavailableError",
    "BuildFailedError",
    "Concept",
    "ConceptDetails",
    "ConceptNotFoundError",
    "ConceptStore",
    "ConfigError",
    "ContingencyReport",
    "DEFAULT_FEW_SHOT",
    "DetailFlags",
    "DimensionMismatchError",
    "EmptyGenerationError",
    "EmptyQueryError",
    "EngineError",
    "EvalValidationError",
    "GenerationParams",
    "HashingEmbedder",
    "IngestStats",
    "InvalidInputError",
    "LlmReply",
    "MappingEvent",
    "MethodRow",
    "NameResult",
    "PipelineDeps",
    "PipelineOptions",
    "Prompt",
    "ProviderUnavailableError",
    "RemoteBackend",
    "RemoteEmbedder",
    "ScoredConcept",
    "SearchQuery",
    "StoreFormatError",
    "StoreUnavailableError",
    "StubBackend",
    "VectorHit",
    "VectorIndex",
    "VocabularyFormatError",
    "build_rag_prompt",
    "build_simple_prompt",
    "build_store",
    "classify",
    "embed",
    "evaluate",
    "exceeds_exact_threshold",
    "generate",
    "indel_distance",
    "indel_similarity",
    "ingest_vocabulary",
    "load_annotations",
    "load_results",
    "parse_reply",
    "preprocess_search_term",
    "query_top_k",
    "rank_candidates",
    "render_prompt",
    "run_batch",
    "run_db",
    "run_llm",
    "run_one",
    "run_rag",
    "run_vector",
    "store_from_concepts",
    "summarize",
    "top5_comparison",
    "validate_llm_payload",
    "validate_omop_payload",
]
