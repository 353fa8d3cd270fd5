"""Response validation: anchored line grammars plus numbered-list consistency checks.

Every non-blank line of a model response lands in exactly one bucket,
accepted or rejected; rejection is data, never an exception. Rejection
reasons are limited to "pattern-mismatch" and "consistency-violation".
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

PATTERN_MISMATCH = "pattern-mismatch"
CONSISTENCY_VIOLATION = "consistency-violation"

ENTITY_LINE = re.compile(r"^\s*(\d+)\.\s*([^|]+?)\s*\|\s*([^|]*?)\s*\|\s*(.*?)\s*$")
MENTION_LINE = re.compile(r"^\s*(\d+)\.\s*(.+?)\s*-\s*(yes|no)\s*$", re.IGNORECASE)
RELATION_LINE = re.compile(
    r"^\s*\((\d+)\)\s*([^;]+?)\s*;\s*([^;]+?)\s*;\s*\((\d+)\)\s*([^;]+?)\s*$"
)
DESCRIPTION_LINE = re.compile(r"^\s*(.+?)\s*::\s*(.+?)\s*$")
GROUP_LINE = re.compile(r"^\s*\(\d+\)[^;]+?(?:\s*;\s*\(\d+\)[^;]+?)*\s*$")
GROUP_MEMBER = re.compile(r"^\s*\((\d+)\)\s*(.+?)\s*$")
HYPERNYM_LINE = re.compile(r"^\s*([^|]+?)\s*\|\s*([^|]+?)\s*\|\s*(.+?)\s*$")
SINGLE_LABEL = re.compile(r"^\s*(\S.*?)\s*$")

GRAMMARS = (
    "entity-line",
    "mention-line",
    "relation-line",
    "description-line",
    "group-line",
    "single-label",
    "hypernym-line",
    "free-text",
)


@dataclass(frozen=True)
class ParsedLine:
    raw: str
    fields: dict


@dataclass
class ValidationReport:
    accepted: list[ParsedLine] = field(default_factory=list)
    rejected: list[tuple[str, str]] = field(default_factory=list)

    @property
    def whole_response_rejected(self) -> bool:
        return not self.accepted

    @property
    def total_lines(self) -> int:
        return len(self.accepted) + len(self.rejected)


def _normalize_label(label: str) -> str:
    return " ".join(label.split()).casefold()


def _reference_ok(number: int, label: str, reference: list[str]) -> bool:
    if not 1 <= number <= len(reference):
        return False
    return _normalize_label(reference[number - 1]) == _normalize_label(label)


def _parse_members(text: str) -> list[tuple[int, str]] | None:
    members = []
    for part in text.split(";"):
        m = GROUP_MEMBER.match(part)
        if m is None:
            return None
        members.append((int(m.group(1)), m.group(2)))
    return members


def validate_response(
    raw_text: str,
    grammar: str,
    reference: list[str] | None = None,
) -> ValidationReport:
    """Classify every non-blank response line against an anchored grammar.

    ``reference``, when given, is the numbered label list the prompt carried;
    lines echoing a (number, label) pair that does not match it are rejected
    as consistency violations. For group-shaped grammars, a member already
    claimed by an earlier accepted line also rejects the later line.
    """
    if grammar not in GRAMMARS:
        raise ValueError(f"unknown grammar: {grammar!r}")
    report = ValidationReport()
    claimed: set[int] = set()
    for raw_line in raw_text.splitlines():
        if not raw_line.strip():
            continue
        _classify_line(raw_line, grammar, reference, claimed, report)
    return report


def _classify_line(
    line: str,
    grammar: str,
    reference: list[str] | None,
    claimed: set[int],
    report: ValidationReport,
) -> None:
    if grammar == "free-text":
        report.accepted.append(ParsedLine(line, {"text": line.strip()}))
        return

    if grammar == "entity-line":
        m = ENTITY_LINE.match(line)
        if m is None:
            report.rejected.append((line, PATTERN_MISMATCH))
            return
        types = [t.strip() for t in m.group(4).split(";") if t.strip()]
        report.accepted.append(
            ParsedLine(
                line,
                {
                    "number": int(m.group(1)),
                    "label": m.group(2),
                    "description": m.group(3),
                    "types": types,
                },
            )
        )
        return

    if grammar == "mention-line":
        m = MENTION_LINE.match(line)
        if m is None:
            report.rejected.append((line, PATTERN_MISMATCH))
            return
        number, label = int(m.group(1)), m.group(2)
        if reference is not None and not _reference_ok(number, label, reference):
            report.rejected.append((line, CONSISTENCY_VIOLATION))
            return
        report.accepted.append(
            ParsedLine(
                line,
                {"number": number, "label": label, "answer": m.group(3).lower() == "yes"},
            )
        )
        return

    if grammar == "relation-line":
        m = RELATION_LINE.match(line)
        if m is None:
            report.rejected.append((line, PATTERN_MISMATCH))
            return
        subject_n, subject_label = int(m.group(1)), m.group(2)
        object_n, object_label = int(m.group(4)), m.group(5)
        if reference is not None and not (
            _reference_ok(subject_n, subject_label, reference)
            and _reference_ok(object_n, object_label, reference)
        ):
            report.rejected.append((line, CONSISTENCY_VIOLATION))
            return
        if subject_n == object_n:
            report.rejected.append((line, CONSISTENCY_VIOLATION))
            return
        report.accepted.append(
            ParsedLine(
                line,
                {
                    "subject": subject_n,
                    "subject_label": subject_label,
                    "predicate": m.group(3),
                    "object": object_n,
                    "object_label": object_label,
                },
            )
        )
        return

    if grammar == "description-line":
        m = DESCRIPTION_LINE.match(line)
        if m is None:
            report.rejected.append((line, PATTERN_MISMATCH))
            return
        label = m.group(1)
        if reference is not None and _normalize_label(label) not in {
            _normalize_label(r) for r in reference
        }:
            report.rejected.append((line, CONSISTENCY_VIOLATION))
            return
        report.accepted.append(ParsedLine(line, {"label": label, "description": m.group(2)}))
        return

    if grammar == "group-line":
        if line.strip().casefold() == "none":
            report.accepted.append(ParsedLine(line, {"members": []}))
            return
        if GROUP_LINE.match(line) is None:
            report.rejected.append((line, PATTERN_MISMATCH))
            return
        members = _parse_members(line)
        if members is None:
            report.rejected.append((line, PATTERN_MISMATCH))
            return
        if reference is not None and not all(
            _reference_ok(n, label, reference) for n, label in members
        ):
            report.rejected.append((line, CONSISTENCY_VIOLATION))
            return
        numbers = [n for n, _ in members]
        if len(set(numbers)) != len(numbers) or claimed.intersection(numbers):
            report.rejected.append((line, CONSISTENCY_VIOLATION))
            return
        claimed.update(numbers)
        report.accepted.append(ParsedLine(line, {"members": numbers}))
        return

    if grammar == "hypernym-line":
        m = HYPERNYM_LINE.match(line)
        if m is None:
            report.rejected.append((line, PATTERN_MISMATCH))
            return
        members = _parse_members(m.group(3))
        if members is None:
            report.rejected.append((line, PATTERN_MISMATCH))
            return
        if reference is not None and not all(
            _reference_ok(n, label, reference) for n, label in members
        ):
            report.rejected.append((line, CONSISTENCY_VIOLATION))
            return
        numbers = [n for n, _ in members]
        if len(set(numbers)) != len(numbers) or claimed.intersection(numbers):
            report.rejected.append((line, CONSISTENCY_VIOLATION))
            return
        claimed.update(numbers)
        report.accepted.append(
            ParsedLine(
                line,
                {"hypernym": m.group(1), "relation": m.group(2), "members": numbers},
            )
        )
        return

    if grammar == "single-label":
        m = SINGLE_LABEL.match(line)
        if m is None:
            report.rejected.append((line, PATTERN_MISMATCH))
            return
        report.accepted.append(ParsedLine(line, {"label": m.group(1)}))
        return
