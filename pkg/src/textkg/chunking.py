"""Sliding-window text splitting and the rolling context summary.

Windows are measured in whitespace tokens and advance by (window - overlap).
Chunk boundaries fall on token starts, so no word is ever split and the chunks
reassemble to the exact source text once each leading overlap is removed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .gateway import Backend, whitespace_token_count
from .prompts import TemplateSet, render_messages

TOKEN_PATTERN = re.compile(r"\S+")


@dataclass(frozen=True)
class SplitConfig:
    window_tokens: int = 1200
    overlap_tokens: int = 200
    summary_budget_tokens: int = 512

    def __post_init__(self) -> None:
        if self.window_tokens <= 0:
            raise ValueError("window_tokens must be positive")
        if not 0 <= self.overlap_tokens < self.window_tokens:
            raise ValueError("overlap must satisfy 0 <= overlap < window")

    @property
    def stride(self) -> int:
        return self.window_tokens - self.overlap_tokens


@dataclass
class Chunk:
    index: int
    text: str
    token_count: int
    start_offset: int
    end_offset: int
    token_start: int
    token_end: int
    overlap_token_count: int = 0
    summary: str = field(default="", repr=False)


def split(text: str, config: SplitConfig) -> list[Chunk]:
    """Split text into overlapping windows of whitespace tokens.

    The first chunk starts at character 0 and the last ends at the final
    character; every other boundary sits at the start of the first token
    that falls outside the window.
    """
    spans = [m.span() for m in TOKEN_PATTERN.finditer(text)]
    if not spans:
        return []
    total = len(spans)
    window, stride = config.window_tokens, config.stride
    starts = [0]
    while starts[-1] + window < total:
        starts.append(starts[-1] + stride)
    chunks: list[Chunk] = []
    for i, token_start in enumerate(starts):
        token_end = min(token_start + window, total)
        char_start = 0 if i == 0 else spans[token_start][0]
        char_end = len(text) if token_end == total else spans[token_end][0]
        overlap = 0 if i == 0 else (starts[i - 1] + window) - token_start
        chunks.append(
            Chunk(
                index=i,
                text=text[char_start:char_end],
                token_count=token_end - token_start,
                start_offset=char_start,
                end_offset=char_end,
                token_start=token_start,
                token_end=token_end,
                overlap_token_count=overlap,
            )
        )
    return chunks


def reassemble(chunks: list[Chunk]) -> str:
    """Concatenate chunks with each leading overlap region removed."""
    parts = []
    previous_end = 0
    for chunk in chunks:
        parts.append(chunk.text[previous_end - chunk.start_offset :])
        previous_end = chunk.end_offset
    return "".join(parts)


def rolling_summary(
    previous_summary: str,
    previous_chunk_text: str,
    backend: Backend,
    templates: TemplateSet,
    budget_tokens: int = 512,
) -> str:
    """One summarization call folding the previous chunk into the running summary."""
    messages = render_messages(
        templates.get("summarization"),
        system={"budget": str(budget_tokens)},
        user={"summary": previous_summary or "(none yet)", "text": previous_chunk_text},
    )
    from .gateway import CompletionRequest

    summary = backend.complete(
        CompletionRequest(messages=tuple(messages), max_output_tokens=budget_tokens)
    )
    words = summary.split()
    if len(words) > budget_tokens:
        summary = " ".join(words[:budget_tokens])
    return summary.strip()


def attach_summaries(
    chunks: list[Chunk],
    backend: Backend,
    templates: TemplateSet,
    config: SplitConfig,
) -> list[Chunk]:
    """Fill each chunk's summary from the recurrence; chunk 0 stays empty."""
    for i, chunk in enumerate(chunks):
        if i == 0:
            chunk.summary = ""
        else:
            chunk.summary = rolling_summary(
                chunks[i - 1].summary,
                chunks[i - 1].text,
                backend,
                templates,
                config.summary_budget_tokens,
            )
    return chunks


def document_token_count(text: str) -> int:
    return whitespace_token_count(text)
