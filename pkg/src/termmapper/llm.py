"""Prompt construction and pluggable text-generation backends.

Prompts follow a fixed canonical structure: role instructions, then the
default few-shot informal/formal pairs, then (for the retrieval-augmented
variant) the list of possibly related vocabulary terms, then the query.
Rendering to flat text is deterministic, so with the stub backend the whole
gateway is reproducible end to end.

No model runs in-process. Production points RemoteBackend at a completion
endpoint; every test uses StubBackend, whose replies are keyed by the
informal name in the prompt and whose call counter lets tests assert the
retrieval gate really skipped generation.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass, field
from typing import Protocol, Sequence

from .errors import BackendUnavailableError, EmptyGenerationError, InvalidInputError
from .vectors import VectorHit

SIMPLE_INSTRUCTIONS = (
    "You are an assistant that suggests formal RxNorm names for a medication. "
    "You will be given the name of a medication.\n\n"
    "Respond only with the formal name of the medication, without any extra "
    "explanation."
)

RAG_INSTRUCTIONS = (
    "You are an assistant that suggests formal RxNorm names for a medication. "
    "You will be given the name of a medication, along with some possibly "
    "related RxNorm terms. If you do not think these terms are related, ignore "
    "them when making your suggestion.\n\n"
    "Respond only with the formal name of the medication, without any extra "
    "explanation."
)

DEFAULT_FEW_SHOT: tuple[tuple[str, str], ...] = (
    ("Tylenol", "Acetaminophen"),
    ("Advil", "Ibuprofen"),
    ("Motrin", "Ibuprofen"),
    ("Aleve", "Naproxen"),
)

RELATED_TERMS_HEADER = "Possibly related RxNorm terms:"

# Fixed timestamp for stub metadata so stub runs are byte-reproducible.
STUB_CREATED = 1_700_000_000


@dataclass(frozen=True)
class Prompt:
    """Canonical prompt structure; backends decide how to render it."""

    system_text: str
    few_shot: tuple[tuple[str, str], ...]
    user_text: str
    retrieved_terms: tuple[str, ...] | None = None


@dataclass(frozen=True)
class GenerationParams:
    max_tokens: int = 64
    temperature: float = 0.0
    stop_sequences: tuple[str, ...] = ("\n",)


@dataclass(frozen=True)
class ReplyMeta:
    """Run metadata reported by the backend.

    Token counts default to -1 with ``usage_missing`` set when the backend
    response had no usage block; when both counts are present, total_tokens
    is their sum.
    """

    id: str
    model: str
    created: int
    finish_reason: str
    prompt_tokens: int
    completion_tokens: int
    total_tokens: int
    usage_missing: bool = False


@dataclass(frozen=True)
class LlmReply:
    reply: str
    raw_text: str
    meta: ReplyMeta


@dataclass(frozen=True)
class BackendResponse:
    """Raw completion as reported by a backend."""

    text: str
    finish_reason: str
    model: str
    id: str
    created: int
    prompt_tokens: int | None = None
    completion_tokens: int | None = None


class GenerationBackend(Protocol):
    def complete(self, rendered_prompt: str, params: GenerationParams) -> BackendResponse: ...

    def ping(self) -> bool: ...


def _single_line(text: str) -> str:
    return " ".join(text.split())


def build_simple_prompt(informal_name: str) -> Prompt:
    """Prompt asking for the formal name of one medication, no retrieval."""
    if not informal_name or not informal_name.strip():
        raise InvalidInputError("informal name must be non-empty")
    return Prompt(
        system_text=SIMPLE_INSTRUCTIONS,
        few_shot=DEFAULT_FEW_SHOT,
        user_text=f"Informal name: {informal_name}\nResponse:",
    )


def build_rag_prompt(informal_name: str, hits: Sequence[VectorHit]) -> Prompt:
    """Retrieval-augmented prompt listing the hit names in rank order.

    With zero hits this degenerates to the simple prompt: no related-terms
    block, no retrieval instructions.
    """
    if not hits:
        return build_simple_prompt(informal_name)
    simple = build_simple_prompt(informal_name)
    return Prompt(
        system_text=RAG_INSTRUCTIONS,
        few_shot=simple.few_shot,
        user_text=simple.user_text,
        retrieved_terms=tuple(_single_line(hit.concept_name) for hit in hits),
    )


def render_prompt(prompt: Prompt) -> str:
    """Flat-text rendering: instructions, few-shot pairs, terms, query."""
    parts = [prompt.system_text]
    for informal, formal in prompt.few_shot:
        parts.append(f"Informal name: {informal}\nResponse: {formal}")
    if prompt.retrieved_terms is not None:
        lines = [RELATED_TERMS_HEADER]
        lines.extend(f"- {term}" for term in prompt.retrieved_terms)
        parts.append("\n".join(lines))
    parts.append(prompt.user_text)
    return "\n\n".join(parts)


def parse_reply(raw_text: str) -> str:
    """Extract the suggested name from backend output.

    Takes the first non-empty line, drops a leading "Response:" label,
    strips surrounding whitespace and quotes. Raises EmptyGenerationError
    when nothing remains.
    """
    line = ""
    for candidate in raw_text.splitlines():
        candidate = candidate.strip()
        if candidate:
            line = candidate
            break
    if line.lower().startswith("response:"):
        line = line[len("response:") :].strip()
    while len(line) >= 2 and line[0] == line[-1] and line[0] in "\"'":
        line = line[1:-1].strip()
    if not line:
        raise EmptyGenerationError("backend output contained no usable text")
    return line


def generate(
    prompt: Prompt,
    backend: GenerationBackend,
    params: GenerationParams | None = None,
) -> LlmReply:
    """Render the prompt, call the backend, parse and package the reply."""
    params = params or GenerationParams()
    rendered = render_prompt(prompt)
    response = backend.complete(rendered, params)
    if not response.text or not response.text.strip():
        raise EmptyGenerationError("backend returned empty text")
    reply = parse_reply(response.text)

    usage_missing = response.prompt_tokens is None or response.completion_tokens is None
    prompt_tokens = -1 if response.prompt_tokens is None else response.prompt_tokens
    completion_tokens = (
        -1 if response.completion_tokens is None else response.completion_tokens
    )
    total_tokens = (
        prompt_tokens + completion_tokens if not usage_missing else -1
    )
    meta = ReplyMeta(
        id=response.id,
        model=response.model,
        created=response.created,
        finish_reason=response.finish_reason,
        prompt_tokens=prompt_tokens,
        completion_tokens=completion_tokens,
        total_tokens=total_tokens,
        usage_missing=usage_missing,
    )
    return LlmReply(reply=reply, raw_text=response.text, meta=meta)


class StubBackend:
    """Deterministic in-process backend for tests and offline runs.

    Replies are looked up by the informal name found in the prompt's final
    "Informal name:" line. Unmapped names echo back unchanged unless a
    ``default_reply`` is set. Tracks every rendered prompt it sees so tests
    can assert how often (and with what) generation was invoked.
    """

    def __init__(
        self,
        mapping: dict[str, str] | None = None,
        *,
        default_reply: str | None = None,
        prompt_tokens: int = 100,
        completion_tokens: int = 6,
        model: str = "stub-model",
    ):
        self.mapping = dict(mapping or {})
        self.default_reply = default_reply
        self.prompt_tokens = prompt_tokens
        self.completion_tokens = completion_tokens
        self.model = model
        self.call_count = 0
        self.prompts: list[str] = []
        self._lock = threading.Lock()

    def _informal_name(self, rendered_prompt: str) -> str:
        marker = "Informal name: "
        start = rendered_prompt.rfind(marker)
        if start < 0:
            return ""
        rest = rendered_prompt[start + len(marker) :]
        return rest.split("\n", 1)[0].strip()

    def complete(self, rendered_prompt: str, params: GenerationParams) -> BackendResponse:
        with self._lock:
            self.call_count += 1
            self.prompts.append(rendered_prompt)
        name = self._informal_name(rendered_prompt)
        reply = self.mapping.get(name)
        if reply is None:
            reply = self.default_reply if self.default_reply is not None else name
        digest = hashlib.sha1(rendered_prompt.encode("utf-8")).hexdigest()[:12]
        return BackendResponse(
            text=reply,
            finish_reason="stop",
            model=self.model,
            id=f"cmpl-stub-{digest}",
            created=STUB_CREATED,
            prompt_tokens=self.prompt_tokens,
            completion_tokens=self.completion_tokens,
        )

    def ping(self) -> bool:
        return True


class RemoteBackend:
    """HTTP client for a completion endpoint (OpenAI-compatible shape).

    Posts the rendered prompt with sampling params; expects a JSON body
    with ``choices[0].text``, ``choices[0].finish_reason`` and optionally a
    ``usage`` block. Concurrent calls are capped by ``max_in_flight``
    (default 1: a single local model instance).
    """

    def __init__(
        self,
        base_url: str,
        *,
        model: str = "",
        timeout: float = 120.0,
        max_in_flight: int = 1,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.timeout = timeout
        self._slots = threading.Semaphore(max_in_flight)

    def complete(self, rendered_prompt: str, params: GenerationParams) -> BackendResponse:
        import httpx

        body = {
            "prompt": rendered_prompt,
            "max_tokens": params.max_tokens,
            "temperature": params.temperature,
            "stop": list(params.stop_sequences),
        }
        if self.model:
            body["model"] = self.model
        with self._slots:
            try:
                response = httpx.post(self.base_url, json=body, timeout=self.timeout)
                response.raise_for_status()
                payload = response.json()
            except httpx.HTTPError as exc:
                raise BackendUnavailableError(
                    f"generation endpoint {self.base_url}: {exc}"
                ) from exc
        try:
            choice = payload["choices"][0]
            text = choice["text"]
        except (KeyError, IndexError, TypeError) as exc:
            raise BackendUnavailableError(
                f"generation endpoint {self.base_url} returned a malformed body"
            ) from exc
        usage = payload.get("usage") or {}
        return BackendResponse(
            text=text,
            finish_reason=choice.get("finish_reason", ""),
            model=payload.get("model", self.model),
            id=payload.get("id", ""),
            created=payload.get("created", 0),
            prompt_tokens=usage.get("prompt_tokens"),
            completion_tokens=usage.get("completion_tokens"),
        )

    def ping(self) -> bool:
        import httpx
        from urllib.parse import urlsplit

        parts = urlsplit(self.base_url)
        probe = f"{parts.scheme}://{parts.netloc}/health"
        try:
            response = httpx.get(probe, timeout=2.0)
            return response.status_code < 500
        except httpx.HTTPError:
            return False
