"""Helpers for authoring fixture files.

A RecordingBackend wraps a responder callable (the hand-written transcript
rules), records every digest -> response pair it serves, and can dump them
as a fixture file that replays the identical run offline.
"""

from __future__ import annotations

import re
from pathlib import Path

from .gateway import (
    Backend,
    BackendConfig,
    CompletionRequest,
    request_digest,
    write_fixture_file,
)
from .prompts import TASK_IDS, TemplateSet

NUMBERED_ENTRY = re.compile(r"^\s*(\d+)\.\s*(.*?)\s*$")
MARKED_BLOCK = re.compile(r"<<<\n(.*?)\n>>>", re.DOTALL)


class RecordingBackend(Backend):
    def __init__(self, responder, config: BackendConfig | None = None):
        super().__init__(config or BackendConfig(kind="fixture"))
        self.responder = responder
        self.responses: dict[str, str] = {}
        self.prompts: dict[str, str] = {}

    def _complete(self, request: CompletionRequest, max_output_tokens: int) -> str:
        text = self.responder(request)
        digest = request_digest(request.messages)
        previous = self.responses.get(digest)
        if previous is not None and previous != text:
            raise ValueError(f"responder returned two answers for one digest: {digest}")
        self.responses[digest] = text
        self.prompts[digest] = "\n".join(
            f"[{m.role}]\n{m.content}" for m in request.messages
        )
        return text

    def dump(self, path: str | Path) -> None:
        write_fixture_file(path, self.responses, self.prompts)


def task_of(request: CompletionRequest, templates: TemplateSet) -> str:
    """Identify which template produced a request by its system text opening."""
    system = request.messages[0].content
    for task_id in TASK_IDS:
        first_line = templates.get(task_id).system_text.splitlines()[0]
        probe = first_line.split("{", 1)[0]
        if system.startswith(probe):
            return task_id
    raise ValueError("request does not match any known template")


def parse_numbered(block: str) -> list[str]:
    """Recover the labels of a numbered list embedded in a user prompt."""
    labels = []
    for line in block.splitlines():
        match = NUMBERED_ENTRY.match(line)
        if match and int(match.group(1)) == len(labels) + 1:
            labels.append(match.group(2))
    return labels


def user_sections(request: CompletionRequest) -> dict[str, str]:
    """Split a user prompt into its named sections.

    Sections are introduced by a `Name:` line; `<<< ... >>>` blocks are
    returned verbatim without the markers.
    """
    content = request.messages[-1].content
    sections: dict[str, str] = {}
    current = None
    buffer: list[str] = []
    for line in content.splitlines():
        if re.match(r"^[A-Za-z][A-Za-z ]*:$", line.strip()):
            if current is not None:
                sections[current] = "\n".join(buffer).strip()
            current = line.strip()[:-1].lower()
            buffer = []
        else:
            buffer.append(line)
    if current is not None:
        sections[current] = "\n".join(buffer).strip()
    for name, body in sections.items():
        marked = MARKED_BLOCK.search(body + "\n")
        if marked:
            sections[name] = marked.group(1)
        else:
            sections[name] = body.removeprefix("<<<").removesuffix(">>>").strip()
    return sections
