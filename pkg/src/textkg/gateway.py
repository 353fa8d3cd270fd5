"""Chat-completion access: deterministic settings, token budgets, and backends.

Two backends share one interface: a remote chat-completions endpoint (bearer
auth, retries with exponential backoff) and a fixture backend that replays
scripted responses keyed by a digest of the full message list, so whole
pipeline runs are reproducible with zero network.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .errors import TokenBudgetError, TransportError, UnscriptedPromptError

logger = logging.getLogger(__name__)

ROLES = ("system", "user", "assistant")

DEFAULT_TOKEN_LIMIT = 4096
OUTPUT_SAFETY_MARGIN = 64


def whitespace_token_count(text: str) -> int:
    """Count whitespace-delimited tokens; the pinned counter for all fixtures."""
    return len(text.split())


def cl100k_token_count(text: str) -> int:
    """Count tokens with the cl100k BPE; requires the optional tiktoken package."""
    import tiktoken

    return len(tiktoken.get_encoding("cl100k_base").encode(text))


TokenCounter = Callable[[str], int]


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"unsupported message role: {self.role!r}")


@dataclass(frozen=True)
class CompletionRequest:
    messages: tuple[ChatMessage, ...]
    model: str = "default"
    temperature: float = 0.0
    max_output_tokens: int | None = None

    def __post_init__(self) -> None:
        if self.temperature != 0:
            raise ValueError("temperature is fixed at zero for deterministic runs")
        if not self.messages:
            raise ValueError("request needs at least one message")
        system_positions = [i for i, m in enumerate(self.messages) if m.role == "system"]
        if system_positions != [0]:
            raise ValueError("requests carry exactly one system message, first")

    def prompt_tokens(self, counter: TokenCounter) -> int:
        return sum(counter(m.content) for m in self.messages)


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    base_backoff: float = 1.0

    def __post_init__(self) -> None:
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "fixture"  # "remote-chat" | "fixture"
    endpoint: str = ""
    credential_env: str = "TEXTKG_API_KEY"
    model: str = "default"
    token_limit: int = DEFAULT_TOKEN_LIMIT
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    max_in_flight: int = 1
    fixture_file: str = ""

    def __post_init__(self) -> None:
        if self.token_limit <= 0:
            raise ValueError("token_limit must be positive")


def canonical_messages(messages: tuple[ChatMessage, ...] | list[ChatMessage]) -> str:
    """Newline-normalized role/content serialization used for fixture keying."""
    parts = []
    for m in messages:
        content = re.sub(r"\r\n?", "\n", m.content)
        parts.append(f"{m.role}\x1f{content}")
    return "\x1e".join(parts)


def request_digest(messages: tuple[ChatMessage, ...] | list[ChatMessage]) -> str:
    return hashlib.sha256(canonical_messages(messages).encode("utf-8")).hexdigest()


class Backend:
    """Shared budget enforcement and call accounting for all backends."""

    def __init__(self, config: BackendConfig, token_counter: TokenCounter = whitespace_token_count):
        self.config = config
        self.token_counter = token_counter
        self.calls_made = 0
        self._lock = threading.Lock()

    def complete(self, request: CompletionRequest) -> str:
        prompt = request.prompt_tokens(self.token_counter)
        if prompt >= self.config.token_limit:
            raise TokenBudgetError(
                f"prompt alone is {prompt} tokens, limit {self.config.token_limit}"
            )
        max_out = request.max_output_tokens
        if max_out is None:
            max_out = self.config.token_limit - prompt - OUTPUT_SAFETY_MARGIN
        if max_out <= 0 or prompt + max_out > self.config.token_limit:
            raise TokenBudgetError(
                f"{prompt} prompt + {max_out} output tokens exceed limit "
                f"{self.config.token_limit}"
            )
        text = self._complete(request, max_out)
        with self._lock:
            self.calls_made += 1
        return text

    def _complete(self, request: CompletionRequest, max_output_tokens: int) -> str:
        raise NotImplementedError


class FixtureBackend(Backend):
    """Replay scripted responses keyed by the digest of the message list."""

    def __init__(
        self,
        responses: dict[str, str] | None = None,
        config: BackendConfig | None = None,
        token_counter: TokenCounter = whitespace_token_count,
    ):
        super().__init__(config or BackendConfig(kind="fixture"), token_counter)
        self.responses = dict(responses or {})

    @classmethod
    def from_file(cls, path: str | Path, config: BackendConfig | None = None) -> "FixtureBackend":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(doc["responses"], config)

    def _complete(self, request: CompletionRequest, max_output_tokens: int) -> str:
        digest = request_digest(request.messages)
        try:
            return self.responses[digest]
        except KeyError:
            preview = request.messages[-1].content[:120].replace("\n", " ")
            raise UnscriptedPromptError(
                f"no scripted response for digest {digest} (user prompt: {preview!r})"
            ) from None


def write_fixture_file(
    path: str | Path,
    responses: dict[str, str],
    prompts: dict[str, str] | None = None,
) -> None:
    """Write a fixture file, optionally with a plaintext prompt sidecar for auditing."""
    path = Path(path)
    payload = {"version": 1, "responses": dict(sorted(responses.items()))}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if prompts:
        sidecar = path.with_suffix(path.suffix + ".prompts.txt")
        blocks = []
        for digest in sorted(prompts):
            blocks.append(f"=== {digest} ===\n{prompts[digest]}\n")
        sidecar.write_text("\n".join(blocks), encoding="utf-8")


class RemoteChatBackend(Backend):
    """POST to a chat-completions endpoint with retries and an in-flight cap."""

    TRANSIENT_STATUS = (429, 500, 502, 503, 504)

    def __init__(self, config: BackendConfig, token_counter: TokenCounter = whitespace_token_count):
        super().__init__(config, token_counter)
        self._slots = threading.Semaphore(max(1, config.max_in_flight))

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        credential = os.environ.get(self.config.credential_env, "")
        if credential:
            headers["Authorization"] = f"Bearer {credential}"
        return headers

    def _complete(self, request: CompletionRequest, max_output_tokens: int) -> str:
        import requests

        body = {
            "model": request.model or self.config.model,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
            "temperature": 0,
            "max_tokens": max_output_tokens,
        }
        last_error: Exception | None = None
        for attempt in range(self.config.retry.max_attempts):
            if attempt:
                time.sleep(self.config.retry.base_backoff * 2 ** (attempt - 1))
            with self._slots:
                try:
                    response = requests.post(
                        self.config.endpoint, json=body, headers=self._headers(), timeout=120
                    )
                except requests.RequestException as exc:
                    last_error = exc
                    logger.warning("transport failure (attempt %d): %s", attempt + 1, exc)
                    continue
            if response.status_code in self.TRANSIENT_STATUS:
                last_error = TransportError(f"status {response.status_code}")
                logger.warning("transient status %d (attempt %d)", response.status_code, attempt + 1)
                continue
            if response.status_code != 200:
                raise TransportError(f"backend returned status {response.status_code}")
            payload = response.json()
            return payload["choices"][0]["message"]["content"]
        raise TransportError(f"retries exhausted: {last_error}")


def build_backend(config: BackendConfig, token_counter: TokenCounter = whitespace_token_count) -> Backend:
    if config.kind == "fixture":
        if config.fixture_file:
            return FixtureBackend.from_file(config.fixture_file, config)
        return FixtureBackend({}, config, token_counter)
    if config.kind == "remote-chat":
        return RemoteChatBackend(config, token_counter)
    raise ValueError(f"unknown backend kind: {config.kind!r}")
