"""Knowledge-graph data model: records, identifiers, and the graph container.

Record ids are content digests, so building the same graph from the same
inputs always yields the same ids and byte-identical exports.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .errors import RecordValidationError, ReferentialIntegrityError

CANDIDATE = "candidate"
RESOLVED = "resolved"
STAGES = (CANDIDATE, RESOLVED)

_SEP = "\x1f"


def _digest(*parts: str) -> str:
    payload = _SEP.join(parts).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()[:16]


def entity_content_id(label: str, description: str, types: list[str]) -> str:
    """Deterministic id of an entity record (label, description, sorted types)."""
    return _digest("entity", label, description, *sorted(types))


def predicate_content_id(label: str) -> str:
    """Deterministic id of a predicate; the description may arrive later."""
    return _digest("predicate", label)


@dataclass(frozen=True, order=True)
class ProvenanceRef:
    """Where a record was extracted: document, chunk, and (for triplets) focus entity."""

    document_id: str
    chunk_index: int
    focus_entity_id: str | None = None

    def __post_init__(self) -> None:
        if self.chunk_index < 0:
            raise RecordValidationError("chunk_index must be non-negative")

    def to_document(self) -> dict:
        doc = {"document_id": self.document_id, "chunk_index": self.chunk_index}
        if self.focus_entity_id is not None:
            doc["focus_entity_id"] = self.focus_entity_id
        return doc

    @classmethod
    def from_document(cls, doc: dict) -> "ProvenanceRef":
        return cls(doc["document_id"], doc["chunk_index"], doc.get("focus_entity_id"))


@dataclass
class EntityRecord:
    label: str
    description: str = ""
    types: list[str] = field(default_factory=list)
    provenance: list[ProvenanceRef] = field(default_factory=list)
    id: str = ""

    def __post_init__(self) -> None:
        self.label = self.label.strip()
        if not self.label:
            raise RecordValidationError("entity label must be non-empty")
        self.types = [t.strip() for t in self.types if t.strip()]
        if not self.id:
            self.id = entity_content_id(self.label, self.description, self.types)


@dataclass
class PredicateRecord:
    label: str
    description: str = ""
    id: str = ""

    def __post_init__(self) -> None:
        self.label = self.label.strip()
        if not self.label:
            raise RecordValidationError("predicate label must be non-empty")
        if not self.id:
            self.id = predicate_content_id(self.label)


@dataclass
class TripletRecord:
    subject: str
    predicate: str
    object: str
    provenance: list[ProvenanceRef] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.subject == self.object:
            raise RecordValidationError("triplet subject and object must differ")

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.subject, self.predicate, self.object)

    @property
    def target_id(self) -> str:
        """Stable id used to address this triplet in annotations and the API."""
        return _digest("triplet", self.subject, self.predicate, self.object)


def _merge_provenance(existing: list[ProvenanceRef], new: list[ProvenanceRef]) -> None:
    seen = set(existing)
    for ref in new:
        if ref not in seen:
            existing.append(ref)
            seen.add(ref)
    existing.sort()


@dataclass(eq=False)
class KnowledgeGraph:
    """Container for one pipeline stage's entities, predicates, and triplets."""

    stage: str = CANDIDATE
    entities: dict[str, EntityRecord] = field(default_factory=dict)
    predicates: dict[str, PredicateRecord] = field(default_factory=dict)
    triplets: list[TripletRecord] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.stage not in STAGES:
            raise RecordValidationError(f"unknown graph stage: {self.stage!r}")

    def __eq__(self, other) -> bool:
        """Content equality; triplet insertion order does not matter."""
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return (
            self.stage == other.stage
            and self.entities == other.entities
            and self.predicates == other.predicates
            and sorted(self.triplets, key=lambda t: t.key)
            == sorted(other.triplets, key=lambda t: t.key)
        )

    def add_entity(self, record: EntityRecord) -> str:
        """Insert a record, or merge provenance into the identical existing one."""
        existing = self.entities.get(record.id)
        if existing is not None:
            _merge_provenance(existing.provenance, record.provenance)
            return existing.id
        self.entities[record.id] = record
        record.provenance.sort()
        return record.id

    def add_predicate(self, record: PredicateRecord) -> str:
        existing = self.predicates.get(record.id)
        if existing is not None:
            if not existing.description and record.description:
                existing.description = record.description
            return existing.id
        self.predicates[record.id] = record
        return record.id

    def add_triplet(self, record: TripletRecord) -> TripletRecord:
        """Insert a triplet; an identical (s, p, o) merges provenance instead."""
        for endpoint in (record.subject, record.object):
            if endpoint not in self.entities:
                raise ReferentialIntegrityError(f"unknown entity id: {endpoint}")
        if record.predicate not in self.predicates:
            raise ReferentialIntegrityError(f"unknown predicate id: {record.predicate}")
        for existing in self.triplets:
            if existing.key == record.key:
                _merge_provenance(existing.provenance, record.provenance)
                return existing
        record.provenance.sort()
        self.triplets.append(record)
        return record

    def find_triplet(self, target_id: str) -> TripletRecord | None:
        for t in self.triplets:
            if t.target_id == target_id:
                return t
        return None

    def validate(self) -> None:
        """Raise if any triplet endpoint or predicate is dangling, or (s,p,o) repeats."""
        seen: set[tuple[str, str, str]] = set()
        for t in self.triplets:
            if t.subject not in self.entities or t.object not in self.entities:
                raise ReferentialIntegrityError(f"dangling endpoint in {t.key}")
            if t.predicate not in self.predicates:
                raise ReferentialIntegrityError(f"dangling predicate in {t.key}")
            if t.key in seen:
                raise ReferentialIntegrityError(f"duplicate triplet {t.key}")
            seen.add(t.key)

    def stats(self) -> dict:
        return {
            "entities": len(self.entities),
            "predicates": len(self.predicates),
            "triplets": len(self.triplets),
        }
