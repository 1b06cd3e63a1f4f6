"""Dense vector index over concept-name embeddings.

Retrieval is an exact exhaustive scan: scores are dot products of
unit-normalized vectors, so a query identical to an indexed name scores
1.0 and every score lies in [-1, 1]. The top-k order is score descending
with ties broken by concept_id ascending.

Two embedding providers ship with the engine:

* HashingEmbedder — deterministic test provider. Each token's vector is
  derived from BLAKE2b digests (see the class docstring for the exact
  recipe), token vectors are summed and the result L2-normalized. No model
  weights, fully reproducible across platforms.
* RemoteEmbedder — HTTP client for a real embedding service: POST
  {"texts": [...]} to the configured endpoint, expect
  {"embeddings": [[...], ...]} back.

The persisted index is self-contained (ids, names, matrix) with a header
recording version, dimension, count and the provider fingerprint. Builds
with identical inputs produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .concepts import Concept
from .errors import (
    BuildFailedError,
    DimensionMismatchError,
    InvalidInputError,
    ProviderUnavailableError,
    StoreFormatError,
)
from .text import tokenize

INDEX_MAGIC = "TMVIDX"
INDEX_VERSION = 1

DEFAULT_DIMENSION = 64
DEFAULT_SEED = 0


class EmbeddingProvider(Protocol):
    """Anything that turns batches of text into fixed-dimension vectors."""

    dimension: int
    fingerprint: str

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray: ...


@dataclass(frozen=True)
class VectorHit:
    """One retrieval result: concept identity plus its dot-product score."""

    concept_id: int
    concept_name: str
    score: float


class HashingEmbedder:
    """Deterministic test provider: seeded token-hash projection.

    Recipe (version "hash-v1", frozen so golden fixtures stay valid):

    1. Tokenize the text with the shared tokenizer (lowercase, punctuation
       to spaces keeping intra-word "-" and "/", whitespace split). If no
       tokens survive, the whole lowercased text is used as a single token.
    2. For each token t, produce ``dimension`` floats by hashing
       ``"{seed}|{t}|{block}"`` (UTF-8) with BLAKE2b (64-byte digest) for
       block = 0, 1, ...; split each digest into eight big-endian uint64
       values u and map each to ``u / 2**63 - 1``, a float in [-1, 1).
    3. Sum the token vectors and L2-normalize.

    Same text and seed always give the same vector, on any platform.
    """

    def __init__(self, dimension: int = DEFAULT_DIMENSION, seed: int = DEFAULT_SEED):
        if dimension < 1:
            raise InvalidInputError("dimension must be >= 1")
        self.dimension = dimension
        self.seed = seed
        self.fingerprint = f"hash-v1:seed={seed}:dim={dimension}"
        self._token_cache: dict[str, np.ndarray] = {}

    def _token_vector(self, token: str) -> np.ndarray:
        cached = self._token_cache.get(token)
        if cached is not None:
            return cached
        values: list[float] = []
        block = 0
        while len(values) < self.dimension:
            digest = hashlib.blake2b(
                f"{self.seed}|{token}|{block}".encode("utf-8"), digest_size=64
            ).digest()
            for i in range(0, 64, 8):
                values.append(int.from_bytes(digest[i : i + 8], "big") / 2**63 - 1.0)
            block += 1
        vec = np.array(values[: self.dimension], dtype=np.float64)
        self._token_cache[token] = vec
        return vec

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dimension), dtype=np.float64)
        for row, text in enumerate(texts):
            tokens = tokenize(text) or [text.lower()]
            for token in tokens:
                out[row] += self._token_vector(token)
        return out


class RemoteEmbedder:
    """HTTP client for an external embedding endpoint.

    Posts {"texts": [...]} and expects {"embeddings": [[...], ...]} with one
    vector of the configured dimension per input text. Concurrent callers
    are capped at ``max_in_flight`` requests.
    """

    def __init__(
        self,
        base_url: str,
        dimension: int,
        *,
        timeout: float = 30.0,
        batch_size: int = 64,
        max_in_flight: int = 4,
    ):
        self.base_url = base_url.rstrip("/")
        self.dimension = dimension
        self.timeout = timeout
        self.batch_size = batch_size
        self.fingerprint = f"remote:{self.base_url}:dim={dimension}"
        self._slots = threading.Semaphore(max_in_flight)

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        import httpx

        vectors: list[list[float]] = []
        try:
            with httpx.Client(timeout=self.timeout) as client:
                for start in range(0, len(texts), self.batch_size):
                    chunk = list(texts[start : start + self.batch_size])
                    with self._slots:
                        response = client.post(self.base_url, json={"texts": chunk})
                    response.raise_for_status()
                    payload = response.json()
                    vectors.extend(payload["embeddings"])
        except httpx.HTTPError as exc:
            raise ProviderUnavailableError(
                f"embedding endpoint {self.base_url}: {exc}"
            ) from exc
        except (KeyError, TypeError, ValueError) as exc:
            raise ProviderUnavailableError(
                f"embedding endpoint {self.base_url} returned a malformed body"
            ) from exc
        matrix = np.asarray(vectors, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape != (len(texts), self.dimension):
            raise ProviderUnavailableError(
                f"expected {len(texts)}x{self.dimension} embeddings, "
                f"got shape {matrix.shape}"
            )
        return matrix


def _normalize_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1)
    if np.any(norms == 0.0):
        raise ProviderUnavailableError("provider returned a zero vector")
    return matrix / norms[:, None]


def embed(text: str, provider: EmbeddingProvider) -> np.ndarray:
    """Unit-length embedding of ``text``; deterministic per provider."""
    if not text or not text.strip():
        raise InvalidInputError("cannot embed empty text")
    matrix = provider.embed_batch([text])
    return _normalize_rows(np.asarray(matrix, dtype=np.float64))[0]


class VectorIndex:
    """Immutable exhaustive-scan index of unit vectors keyed by concept."""

    def __init__(
        self,
        ids: np.ndarray,
        names: list[str],
        matrix: np.ndarray,
        provider_fingerprint: str,
    ):
        self.ids = ids
        self.names = names
        self.matrix = matrix
        self.provider_fingerprint = provider_fingerprint

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[1]

    @classmethod
    def build(
        cls,
        concepts: Sequence[Concept],
        provider: EmbeddingProvider,
        *,
        batch_size: int = 256,
    ) -> "VectorIndex":
        """Embed every concept name and assemble the index.

        All-or-nothing: a provider failure mid-build raises BuildFailedError
        carrying the number of records embedded before the failure.
        """
        if not concepts:
            raise InvalidInputError("cannot build an index from zero concepts")
        ids = [c.concept_id for c in concepts]
        if len(set(ids)) != len(ids):
            raise InvalidInputError("duplicate concept_id in index build input")
        names = [c.concept_name for c in concepts]
        rows: list[np.ndarray] = []
        for start in range(0, len(names), batch_size):
            chunk = names[start : start + batch_size]
            try:
                matrix = provider.embed_batch(chunk)
            except ProviderUnavailableError as exc:
                raise BuildFailedError(
                    f"provider failed after {start} of {len(names)} records: {exc}",
                    completed=start,
                ) from exc
            rows.append(np.asarray(matrix, dtype=np.float64))
        matrix = _normalize_rows(np.vstack(rows))
        return cls(
            ids=np.asarray(ids, dtype=np.int64),
            names=names,
            matrix=matrix,
            provider_fingerprint=provider.fingerprint,
        )

    def save(self, path: str | Path) -> None:
        """Write the documented binary layout.

        Three UTF-8 JSON lines (header, ids, names) followed by the raw
        matrix bytes: C-order, little-endian float64. Deterministic for
        identical builds.
        """
        path = Path(path)
        header = {
            "magic": INDEX_MAGIC,
            "version": INDEX_VERSION,
            "dimension": self.dimension,
            "count": len(self.ids),
            "provider": self.provider_fingerprint,
        }
        with path.open("wb") as fh:
            fh.write((json.dumps(header, ensure_ascii=False) + "\n").encode("utf-8"))
            fh.write((json.dumps(self.ids.tolist()) + "\n").encode("utf-8"))
            fh.write((json.dumps(self.names, ensure_ascii=False) + "\n").encode("utf-8"))
            fh.write(np.ascontiguousarray(self.matrix, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "VectorIndex":
        path = Path(path)
        with path.open("rb") as fh:
            try:
                header = json.loads(fh.readline().decode("utf-8"))
            except (json.JSONDecodeError, UnicodeDecodeError) as exc:
                raise StoreFormatError(f"{path}: not a vector index file") from exc
            if header.get("magic") != INDEX_MAGIC:
                raise StoreFormatError(f"{path}: bad magic {header.get('magic')!r}")
            if header.get("version") != INDEX_VERSION:
                raise StoreFormatError(
                    f"{path}: unsupported index version {header.get('version')!r}"
                )
            ids = json.loads(fh.readline().decode("utf-8"))
            names = json.loads(fh.readline().decode("utf-8"))
            count, dimension = header["count"], header["dimension"]
            raw = fh.read(count * dimension * 8)
            matrix = np.frombuffer(raw, dtype="<f8").reshape(count, dimension)
        if len(ids) != count or len(names) != count:
            raise StoreFormatError(f"{path}: header count disagrees with records")
        return cls(
            ids=np.asarray(ids, dtype=np.int64),
            names=list(names),
            matrix=matrix.astype(np.float64),
            provider_fingerprint=header["provider"],
        )


def query_top_k(
    text: str,
    k: int,
    index: VectorIndex,
    provider: EmbeddingProvider,
) -> list[VectorHit]:
    """The min(k, index size) highest-dot-product concepts for ``text``.

    Sorted by score descending, ties broken by concept_id ascending.
    """
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    if len(index) == 0:
        raise InvalidInputError("index is empty")
    if provider.dimension != index.dimension:
        raise DimensionMismatchError(
            f"provider dimension {provider.dimension} != index dimension "
            f"{index.dimension}"
        )
    query = embed(text, provider)
    scores = index.matrix @ query
    # lexsort: last key is primary -> score descending, then concept_id ascending
    order = np.lexsort((index.ids, -scores))[: min(k, len(index))]
    return [
        VectorHit(
            concept_id=int(index.ids[i]),
            concept_name=index.names[i],
            score=float(scores[i]),
        )
        for i in order
    ]


def exceeds_exact_threshold(
    hits: Sequence[VectorHit], threshold: float
) -> list[VectorHit]:
    """Order-preserving filter to hits scoring at or above ``threshold``.

    An empty result tells the retrieval-augmented pipeline to proceed to
    generation.
    """
    if not 0.0 < threshold <= 1.0:
        raise InvalidInputError(f"threshold must be in (0, 1], got {threshold}")
    return [hit for hit in hits if hit.score >= threshold]
