"""Prompt templates loaded from versioned resource files.

Each task has a system text, a user text with named placeholders, and the
name of the line grammar its responses must satisfy. Rendering fails if any
placeholder is left unbound, so prompt drift shows up as an error rather
than a silently malformed request.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass
from importlib import resources

from .gateway import ChatMessage

TASK_IDS = (
    "entity-extraction",
    "mention-recognition",
    "relation-extraction",
    "predicate-description",
    "summarization",
    "cluster-disambiguation",
    "concept-shrinkage",
    "hypernym-generation",
)


@dataclass(frozen=True)
class PromptTemplate:
    task_id: str
    system_text: str
    user_text: str
    grammar: str


class TemplateSet:
    def __init__(self, templates: dict[str, PromptTemplate]):
        self._templates = templates

    def get(self, task_id: str) -> PromptTemplate:
        return self._templates[task_id]

    @classmethod
    def load(cls) -> "TemplateSet":
        templates = {}
        for task_id in TASK_IDS:
            raw = resources.files("textkg.templates").joinpath(f"{task_id}.json")
            doc = json.loads(raw.read_text(encoding="utf-8"))
            templates[task_id] = PromptTemplate(
                task_id=task_id,
                system_text=doc["system"],
                user_text=doc["user"],
                grammar=doc["grammar"],
            )
        return cls(templates)


def _render(text: str, values: dict[str, str]) -> str:
    formatter = string.Formatter()
    needed = {name for _, name, _, _ in formatter.parse(text) if name}
    missing = needed - values.keys()
    if missing:
        raise KeyError(f"unbound placeholders: {sorted(missing)}")
    return text.format(**{k: values[k] for k in needed})


def render_messages(
    template: PromptTemplate,
    system: dict[str, str] | None = None,
    user: dict[str, str] | None = None,
) -> list[ChatMessage]:
    return [
        ChatMessage("system", _render(template.system_text, system or {})),
        ChatMessage("user", _render(template.user_text, user or {})),
    ]


def numbered_list(labels: list[str]) -> str:
    return "\n".join(f"{i + 1}. {label}" for i, label in enumerate(labels))


def validated_completion(
    backend,
    template: PromptTemplate,
    system: dict[str, str] | None = None,
    user: dict[str, str] | None = None,
    reference: list[str] | None = None,
    max_output_tokens: int | None = None,
):
    """Send one rendered request and validate the response against the grammar.

    A fully rejected response is retried once with the identical request;
    callers decide what a still-empty report means for their step.
    """
    from .gateway import CompletionRequest
    from .validation import validate_response

    messages = tuple(render_messages(template, system, user))
    request = CompletionRequest(messages=messages, max_output_tokens=max_output_tokens)
    report = validate_response(backend.complete(request), template.grammar, reference)
    if report.whole_response_rejected:
        report = validate_response(backend.complete(request), template.grammar, reference)
    return report
