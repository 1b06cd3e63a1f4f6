"""HTTP API: pipeline execution, health, concept detail lookup.

Routes:
    POST /api/pipeline        run a batch of names, JSON array of
                              {name, events, elapsed_ms} in request order
    GET  /api/health          {status, store_loaded, index_loaded,
                              backend_reachable}; always 200
    GET  /api/concepts/{id}   concept details; query flags synonyms,
                              ancestors, relationships

Error responses always carry a JSON body {"error": ..., "detail": ...}.
Malformed JSON is 400; validation failures are 422; missing store/index
for the requested mode is 503.
"""

from __future__ import annotations

from typing import Any

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .config import options_from_dict
from .errors import ConceptNotFoundError, ConfigError, EngineError
from .pipeline import MODES, PipelineDeps, PipelineOptions, run_batch

MAX_NAME_LENGTH = 512


class DetailFlagsModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    synonyms: bool = False
    ancestors: bool = False
    relationships: bool = False


class PipelineOptionsModel(BaseModel):
    """Partial options: unset fields fall back to server defaults."""

    model_config = ConfigDict(extra="forbid")

    mode: str | None = Field(default=None)
    k: int | None = Field(default=None, ge=1)
    exact_match_threshold: float | None = Field(default=None, gt=0.0, le=1.0)
    similarity_threshold: float | None = Field(default=None, ge=0.0, le=100.0)
    vocabulary_filter: list[str] | None = None
    include_synonyms: bool | None = None
    fetch_details: DetailFlagsModel | None = None
    text_search_limit: int | None = Field(default=None, ge=1)
    max_tokens: int | None = Field(default=None, ge=1)
    temperature: float | None = Field(default=None, ge=0.0)
    stop_sequences: list[str] | None = None

    @field_validator("mode")
    @classmethod
    def _known_mode(cls, value: str | None) -> str | None:
        if value is not None and value not in MODES:
            raise ValueError(f"mode must be one of {list(MODES)}")
        return value

    def overrides(self) -> dict[str, Any]:
        data = self.model_dump(exclude_none=True)
        if "fetch_details" in data:
            data["fetch_details"] = self.fetch_details.model_dump()
        return data


class MapRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    names: list[str] = Field(min_length=1)
    pipeline_options: PipelineOptionsModel | None = None

    @field_validator("names")
    @classmethod
    def _names_sane(cls, names: list[str]) -> list[str]:
        cleaned = []
        for name in names:
            trimmed = name.strip()
            if not trimmed:
                raise ValueError("names must be non-empty after trimming")
            if len(trimmed) > MAX_NAME_LENGTH:
                raise ValueError(f"names must be <= {MAX_NAME_LENGTH} characters")
            cleaned.append(trimmed)
        return cleaned


def _missing_for_mode(mode: str, deps: PipelineDeps) -> list[str]:
    missing = []
    if deps.store is None and mode in ("llm", "rag", "db_search"):
        missing.append("concept store")
    if mode in ("vector_search", "rag"):
        if deps.index is None:
            missing.append("vector index")
        if deps.embedder is None:
            missing.append("embedding provider")
    if mode in ("llm", "rag") and deps.backend is None:
        missing.append("generation backend")
    return missing


def create_app(
    deps: PipelineDeps,
    *,
    default_options: PipelineOptions | None = None,
    cors_origins: list[str] | None = None,
) -> FastAPI:
    """Build the application around one set of loaded dependencies."""
    app = FastAPI(title="termmapper", version="0.1.0")
    defaults = default_options or PipelineOptions()

    if cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=cors_origins,
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        errors = exc.errors()
        malformed = any(e.get("type") == "json_invalid" for e in errors)
        detail = [
            {"loc": list(e.get("loc", ())), "msg": e.get("msg", "")} for e in errors
        ]
        if malformed:
            return JSONResponse(
                status_code=400,
                content={"error": "malformed_json", "detail": detail},
            )
        return JSONResponse(
            status_code=422,
            content={"error": "validation_error", "detail": detail},
        )

    @app.exception_handler(EngineError)
    async def engine_handler(request: Request, exc: EngineError):
        return JSONResponse(
            status_code=500,
            content={"error": exc.code, "detail": str(exc)},
        )

    @app.post("/api/pipeline")
    def pipeline(request: MapRequest) -> JSONResponse:
        try:
            options = options_from_dict(
                request.pipeline_options.overrides() if request.pipeline_options else {},
                base=defaults,
            )
        except (ConfigError, EngineError) as exc:
            return JSONResponse(
                status_code=422,
                content={"error": "validation_error", "detail": str(exc)},
            )
        missing = _missing_for_mode(options.mode, deps)
        if missing:
            return JSONResponse(
                status_code=503,
                content={
                    "error": "not_ready",
                    "detail": f"mode {options.mode!r} needs: {', '.join(missing)}",
                },
            )
        results = run_batch(request.names, options, deps)
        return JSONResponse(content=[result.to_dict() for result in results])

    @app.get("/api/health")
    def health() -> dict[str, Any]:
        backend_reachable = deps.backend is not None and deps.backend.ping()
        ready = (
            deps.store is not None and deps.index is not None and backend_reachable
        )
        return {
            "status": "ok" if ready else "degraded",
            "store_loaded": deps.store is not None,
            "index_loaded": deps.index is not None,
            "backend_reachable": backend_reachable,
        }

    @app.get("/api/concepts/{concept_id}")
    def concept_details(
        concept_id: int,
        synonyms: bool = Query(default=False),
        ancestors: bool = Query(default=False),
        relationships: bool = Query(default=False),
    ) -> JSONResponse:
        if deps.store is None:
            return JSONResponse(
                status_code=503,
                content={"error": "not_ready", "detail": "concept store not loaded"},
            )
        try:
            details = deps.store.fetch_concept_details(
                concept_id,
                synonyms=synonyms,
                ancestors=ancestors,
                relationships=relationships,
            )
        except ConceptNotFoundError as exc:
            return JSONResponse(
                status_code=404,
                content={"error": "not_found", "detail": str(exc)},
            )
        concept = details.concept
        return JSONResponse(
            content={
                "concept": {
                    "concept_id": concept.concept_id,
                    "concept_name": concept.concept_name,
                    "vocabulary_id": concept.vocabulary_id,
                    "concept_code": concept.concept_code,
                    "domain_id": concept.domain_id,
                    "standard_concept": concept.standard_concept,
                },
                "synonyms": details.synonyms,
                "ancestors": [
                    {"ancestor_concept_id": anc, "levels_of_separation": levels}
                    for anc, levels in details.ancestors
                ],
                "relationships": [
                    {"relationship_id": rel, "related_concept_id": other}
                    for rel, other in details.relationships
                ],
            }
        )

    return app
