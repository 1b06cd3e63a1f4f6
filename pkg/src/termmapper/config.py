"""Service configuration: file plus environment-variable overrides.

The config file is JSON. Every field is optional; environment variables
prefixed with TERMMAPPER_ override file values (e.g. TERMMAPPER_PORT,
TERMMAPPER_STORE_PATH). Example:

    {
      "store_path": "data/store.jsonl",
      "index_path": "data/index.bin",
      "host": "127.0.0.1",
      "port": 8000,
      "cors_origins": ["http://localhost:5173"],
      "embedding": {"provider": "test", "dimension": 64, "seed": 0},
      "generation": {"backend": "stub", "replies_path": "data/replies.json"},
      "options": {"mode": "rag", "k": 5}
    }

embedding.provider is "test" or "remote" (remote needs "endpoint" and
"dimension"); generation.backend is "stub" or "remote" (remote needs
"endpoint", optionally "model", "timeout", "max_in_flight"; stub takes an
optional "replies_path" JSON object of informal -> formal names).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from .concepts import ConceptStore
from .errors import ConfigError
from .llm import GenerationBackend, RemoteBackend, StubBackend
from .pipeline import DetailFlags, PipelineDeps, PipelineOptions
from .vectors import DEFAULT_DIMENSION, DEFAULT_SEED, EmbeddingProvider, HashingEmbedder, RemoteEmbedder

ENV_PREFIX = "TERMMAPPER_"


@dataclass
class ServiceConfig:
    store_path: str | None = None
    index_path: str | None = None
    host: str = "127.0.0.1"
    port: int = 8000
    cors_origins: list[str] = field(default_factory=list)
    embedding: dict[str, Any] = field(default_factory=dict)
    generation: dict[str, Any] = field(default_factory=dict)
    options: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
        known = {
            "store_path",
            "index_path",
            "host",
            "port",
            "cors_origins",
            "embedding",
            "generation",
            "options",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
        return cls(**data)

    def with_env_overrides(self, environ: dict[str, str] | None = None) -> "ServiceConfig":
        env = os.environ if environ is None else environ
        cfg = replace(self)
        if f"{ENV_PREFIX}STORE_PATH" in env:
            cfg.store_path = env[f"{ENV_PREFIX}STORE_PATH"]
        if f"{ENV_PREFIX}INDEX_PATH" in env:
            cfg.index_path = env[f"{ENV_PREFIX}INDEX_PATH"]
        if f"{ENV_PREFIX}HOST" in env:
            cfg.host = env[f"{ENV_PREFIX}HOST"]
        if f"{ENV_PREFIX}PORT" in env:
            try:
                cfg.port = int(env[f"{ENV_PREFIX}PORT"])
            except ValueError as exc:
                raise ConfigError(f"{ENV_PREFIX}PORT must be an integer") from exc
        if f"{ENV_PREFIX}CORS_ORIGINS" in env:
            cfg.cors_origins = [
                origin.strip()
                for origin in env[f"{ENV_PREFIX}CORS_ORIGINS"].split(",")
                if origin.strip()
            ]
        return cfg


def build_embedder(embedding: dict[str, Any]) -> EmbeddingProvider:
    provider = embedding.get("provider", "test")
    if provider == "test":
        return HashingEmbedder(
            dimension=embedding.get("dimension", DEFAULT_DIMENSION),
            seed=embedding.get("seed", DEFAULT_SEED),
        )
    if provider == "remote":
        endpoint = embedding.get("endpoint")
        dimension = embedding.get("dimension")
        if not endpoint or not dimension:
            raise ConfigError("remote embedding provider needs endpoint and dimension")
        return RemoteEmbedder(
            endpoint,
            dimension,
            timeout=embedding.get("timeout", 30.0),
            batch_size=embedding.get("batch_size", 64),
        )
    raise ConfigError(f"unknown embedding provider {provider!r}")


def build_backend(generation: dict[str, Any]) -> GenerationBackend:
    backend = generation.get("backend", "stub")
    if backend == "stub":
        mapping: dict[str, str] = {}
        replies_path = generation.get("replies_path")
        if replies_path:
            try:
                mapping = json.loads(Path(replies_path).read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read stub replies from {replies_path}: {exc}") from exc
        return StubBackend(mapping, default_reply=generation.get("default_reply"))
    if backend == "remote":
        endpoint = generation.get("endpoint")
        if not endpoint:
            raise ConfigError("remote generation backend needs an endpoint")
        return RemoteBackend(
            endpoint,
            model=generation.get("model", ""),
            timeout=generation.get("timeout", 120.0),
            max_in_flight=generation.get("max_in_flight", 1),
        )
    raise ConfigError(f"unknown generation backend {backend!r}")


def options_from_dict(data: dict[str, Any], base: PipelineOptions | None = None) -> PipelineOptions:
    """Overlay a partial options mapping onto ``base`` (or the defaults)."""
    base = base or PipelineOptions()
    known = {
        "mode",
        "k",
        "exact_match_threshold",
        "similarity_threshold",
        "vocabulary_filter",
        "include_synonyms",
        "fetch_details",
        "text_search_limit",
        "max_tokens",
        "temperature",
        "stop_sequences",
    }
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown pipeline option keys {sorted(unknown)}")
    kwargs: dict[str, Any] = {}
    for key in known - {"fetch_details", "vocabulary_filter", "stop_sequences"}:
        if key in data:
            kwargs[key] = data[key]
    if "vocabulary_filter" in data:
        vf = data["vocabulary_filter"]
        kwargs["vocabulary_filter"] = tuple(vf) if vf is not None else None
    if "stop_sequences" in data:
        kwargs["stop_sequences"] = tuple(data["stop_sequences"])
    if "fetch_details" in data:
        flags = data["fetch_details"] or {}
        unknown_flags = set(flags) - {"synonyms", "ancestors", "relationships"}
        if unknown_flags:
            raise ConfigError(f"unknown fetch_details keys {sorted(unknown_flags)}")
        kwargs["fetch_details"] = DetailFlags(
            synonyms=flags.get("synonyms", False),
            ancestors=flags.get("ancestors", False),
            relationships=flags.get("relationships", False),
        )
    merged = replace(base, **kwargs)
    merged.validate()
    return merged


def build_deps(config: ServiceConfig) -> PipelineDeps:
    """Load store and index and construct providers per the config."""
    from .vectors import VectorIndex

    store = None
    if config.store_path:
        store_path = Path(config.store_path)
        if not store_path.exists():
            raise ConfigError(f"store file not found: {store_path}")
        store = ConceptStore.load(store_path)
    index = None
    if config.index_path:
        index_path = Path(config.index_path)
        if not index_path.exists():
            raise ConfigError(f"index file not found: {index_path}")
        index = VectorIndex.load(index_path)
    return PipelineDeps(
        store=store,
        index=index,
        embedder=build_embedder(config.embedding),
        backend=build_backend(config.generation),
    )
