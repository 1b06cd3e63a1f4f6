"""Exception hierarchy for the mapping engine.

Everything raised deliberately by this package derives from EngineError, so
callers (batch runner, HTTP layer, CLI) can isolate per-name failures without
swallowing genuine bugs.
"""


class EngineError(Exception):
    """Base class for all errors raised by the engine."""

    code = "engine_error"


class InvalidInputError(EngineError):
    """Caller-supplied argument violates an operation's precondition."""

    code = "invalid_input"


class EmptyQueryError(EngineError):
    """Search-term preprocessing removed every token (e.g. all stop words)."""

    code = "empty_query"


class StoreUnavailableError(EngineError):
    """Concept store queried before any vocabulary was loaded."""

    code = "store_unavailable"


class ConceptNotFoundError(EngineError):
    """Requested concept_id is not in the store."""

    code = "not_found"


class VocabularyFormatError(EngineError):
    """Vocabulary input file is structurally unusable (e.g. missing column)."""

    code = "vocabulary_format"


class StoreFormatError(EngineError):
    """Persisted store or index file is corrupt or of an unsupported version."""

    code = "store_format"


class ProviderUnavailableError(EngineError):
    """Embedding provider failed or returned an unusable response."""

    code = "provider_unavailable"


class DimensionMismatchError(EngineError):
    """Provider dimension does not match the index it is queried against."""

    code = "dimension_mismatch"


class BuildFailedError(EngineError):
    """Index build aborted part-way; carries the number of completed records."""

    code = "build_failed"

    def __init__(self, message: str, completed: int = 0):
        super().__init__(message)
        self.completed = completed


class BackendUnavailableError(EngineError):
    """Generation backend unreachable or returned a transport-level failure."""

    code = "backend_unavailable"


class EmptyGenerationError(EngineError):
    """Generation backend produced no parseable text."""

    code = "empty_generation"


class EvalValidationError(EngineError):
    """Evaluation inputs (annotations or results) are inconsistent."""

    code = "eval_validation"


class ConfigError(EngineError):
    """Service configuration is missing or malformed."""

    code = "config_error"
