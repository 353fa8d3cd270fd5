"""Annotation data model and extraction-quality metrics.

Human assessors mark each extracted entity, entity-type assignment, and
triplet correct or incorrect; correct items additionally carry a flag for
whether the content came from the model's internal knowledge rather than the
source text. Missed entities recorded per qualifying type supply the false
negatives that make entity recall computable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import AnnotationConflictError, RecordValidationError
from .model import KnowledgeGraph

KIND_ENTITY = "entity"
KIND_ENTITY_TYPE = "entity-type"
KIND_TRIPLET = "triplet"
TARGET_KINDS = (KIND_ENTITY, KIND_ENTITY_TYPE, KIND_TRIPLET)

VERDICT_CORRECT = "correct"
VERDICT_INCORRECT = "incorrect"


@dataclass(frozen=True)
class Annotation:
    target_kind: str
    target_id: str
    verdict: str
    type_label: str | None = None
    inferred: bool | None = None
    assessor: str = ""
    timestamp: str = ""

    def __post_init__(self) -> None:
        if self.target_kind not in TARGET_KINDS:
            raise RecordValidationError(f"unknown target kind: {self.target_kind!r}")
        if self.verdict not in (VERDICT_CORRECT, VERDICT_INCORRECT):
            raise RecordValidationError(f"unknown verdict: {self.verdict!r}")
        if self.inferred is not None and self.verdict != VERDICT_CORRECT:
            raise RecordValidationError("inferred flag only applies to correct verdicts")
        if self.target_kind == KIND_ENTITY_TYPE and not self.type_label:
            raise RecordValidationError("entity-type annotations need a type label")

    @property
    def target_key(self) -> str:
        if self.target_kind == KIND_ENTITY_TYPE:
            return f"{self.target_kind}:{self.target_id}:{self.type_label}"
        return f"{self.target_kind}:{self.target_id}"

    def to_document(self) -> dict:
        doc = {
            "target_kind": self.target_kind,
            "target_id": self.target_id,
            "verdict": self.verdict,
            "assessor": self.assessor,
            "timestamp": self.timestamp,
        }
        if self.type_label is not None:
            doc["type_label"] = self.type_label
        if self.inferred is not None:
            doc["inferred"] = self.inferred
        return doc

    @classmethod
    def from_document(cls, doc: dict) -> "Annotation":
        return cls(
            target_kind=doc["target_kind"],
            target_id=doc["target_id"],
            verdict=doc["verdict"],
            type_label=doc.get("type_label"),
            inferred=doc.get("inferred"),
            assessor=doc.get("assessor", ""),
            timestamp=doc.get("timestamp", ""),
        )


@dataclass
class GroundTruth:
    """Missed entities per document, keyed by qualifying type label."""

    per_document: dict[str, dict[str, list[str]]] = field(default_factory=dict)

    def add(self, document_id: str, type_label: str, labels: list[str]) -> None:
        bucket = self.per_document.setdefault(document_id, {}).setdefault(type_label, [])
        for label in labels:
            if label.strip() and label not in bucket:
                bucket.append(label)

    def missed_pairs(self) -> set[tuple[str, str]]:
        """Distinct (document, case-folded label) pairs across all types."""
        pairs = set()
        for document_id, by_type in self.per_document.items():
            for labels in by_type.values():
                for label in labels:
                    pairs.add((document_id, label.strip().casefold()))
        return pairs

    def to_document(self) -> dict:
        return {d: {t: list(ls) for t, ls in by_type.items()} for d, by_type in self.per_document.items()}

    @classmethod
    def from_document(cls, doc: dict) -> "GroundTruth":
        gt = cls()
        for document_id, by_type in doc.items():
            for type_label, labels in by_type.items():
                gt.add(document_id, type_label, list(labels))
        return gt


def precision(tp: int, fp: int) -> float:
    return tp / (tp + fp) if tp + fp > 0 else 0.0


def recall(tp: int, fn: int) -> float:
    return tp / (tp + fn) if tp + fn > 0 else 0.0


def f1_score(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def inferred_share(from_knowledge: int, truthful_total: int) -> float:
    """Share of correct outputs whose content came from model-internal knowledge."""
    return from_knowledge / truthful_total if truthful_total > 0 else 0.0


@dataclass
class MetricsReport:
    """All metric percentages recompute from the stored counts on access."""

    entity_tp: int = 0
    entity_fp: int = 0
    entity_fn: int = 0
    type_tp: int = 0
    type_fp: int = 0
    triplet_tp: int = 0
    triplet_fp: int = 0
    entity_inferred: int = 0
    triplet_inferred: int = 0
    pending: dict[str, int] = field(default_factory=dict)
    total_targets: dict[str, int] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def entity_precision(self) -> float:
        return precision(self.entity_tp, self.entity_fp)

    @property
    def entity_recall(self) -> float:
        return recall(self.entity_tp, self.entity_fn)

    @property
    def entity_f1(self) -> float:
        return f1_score(self.entity_precision, self.entity_recall)

    @property
    def type_precision(self) -> float:
        return precision(self.type_tp, self.type_fp)

    @property
    def triplet_precision(self) -> float:
        return precision(self.triplet_tp, self.triplet_fp)

    @property
    def entity_inferred_share(self) -> float:
        return inferred_share(self.entity_inferred, self.entity_tp)

    @property
    def triplet_inferred_share(self) -> float:
        return inferred_share(self.triplet_inferred, self.triplet_tp)

    @property
    def completeness(self) -> float:
        total = sum(self.total_targets.values())
        if total == 0:
            return 0.0
        return 1.0 - sum(self.pending.values()) / total

    def percentages(self) -> dict[str, float]:
        return {
            "entity_precision": 100 * self.entity_precision,
            "entity_recall": 100 * self.entity_recall,
            "entity_f1": 100 * self.entity_f1,
            "type_precision": 100 * self.type_precision,
            "triplet_precision": 100 * self.triplet_precision,
            "entity_inferred_share": 100 * self.entity_inferred_share,
            "triplet_inferred_share": 100 * self.triplet_inferred_share,
        }

    def to_document(self) -> dict:
        return {
            "counts": {
                "entity": {"tp": self.entity_tp, "fp": self.entity_fp, "fn": self.entity_fn},
                "entity_type": {"tp": self.type_tp, "fp": self.type_fp},
                "triplet": {"tp": self.triplet_tp, "fp": self.triplet_fp},
                "inferred": {"entity": self.entity_inferred, "triplet": self.triplet_inferred},
            },
            "percentages": {k: round(v, 4) for k, v in self.percentages().items()},
            "pending": dict(self.pending),
            "total_targets": dict(self.total_targets),
            "completeness_pct": round(100 * self.completeness, 4),
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_document(), indent=2, sort_keys=True) + "\n"

    def to_table(self) -> str:
        """Human-readable one-row table, columns in the standard report order."""
        headers = ["P(ent)", "R(ent)", "F1(ent)", "P(type)", "P(rel)", "inf(ent)", "inf(rel)"]
        values = self.percentages()
        row = [
            values["entity_precision"],
            values["entity_recall"],
            values["entity_f1"],
            values["type_precision"],
            values["triplet_precision"],
            values["entity_inferred_share"],
            values["triplet_inferred_share"],
        ]
        cells = [f"{v:8.2f}" for v in row]
        head = "  ".join(f"{h:>8}" for h in headers)
        return f"{head}\n{'  '.join(cells)}\n"


def _adjudicate(records: list[Annotation]) -> tuple[str, bool]:
    """Majority verdict across assessors; ties are conservative.

    A single assessor contradicting themselves is a hard error. The inferred
    flag is decided by majority among the correct-voters that set it.
    """
    by_assessor: dict[str, Annotation] = {}
    for record in records:
        prior = by_assessor.get(record.assessor)
        if prior is not None and prior.verdict != record.verdict:
            raise AnnotationConflictError(
                f"assessor {record.assessor!r} gave conflicting verdicts "
                f"for {record.target_key}"
            )
        by_assessor[record.assessor] = record
    votes = list(by_assessor.values())
    correct = sum(1 for v in votes if v.verdict == VERDICT_CORRECT)
    incorrect = len(votes) - correct
    verdict = VERDICT_CORRECT if correct > incorrect else VERDICT_INCORRECT
    inferred = False
    if verdict == VERDICT_CORRECT:
        flags = [v.inferred for v in votes if v.verdict == VERDICT_CORRECT and v.inferred is not None]
        inferred = bool(flags) and sum(flags) * 2 > len(flags)
    return verdict, inferred


def compute_report(
    graph: KnowledgeGraph,
    annotations: list[Annotation],
    ground_truth: GroundTruth | None = None,
) -> MetricsReport:
    """Aggregate verdicts over a graph's components into a metrics report.

    Components without any verdict are reported pending and excluded from
    the counts; recall and F1 apply to entities only since missed relations
    are not annotated.
    """
    ground_truth = ground_truth or GroundTruth()
    report = MetricsReport()

    entity_targets = {f"{KIND_ENTITY}:{eid}" for eid in graph.entities}
    type_targets = {
        f"{KIND_ENTITY_TYPE}:{eid}:{t}" for eid, e in graph.entities.items() for t in e.types
    }
    triplet_targets = {f"{KIND_TRIPLET}:{t.target_id}" for t in graph.triplets}
    report.total_targets = {
        KIND_ENTITY: len(entity_targets),
        KIND_ENTITY_TYPE: len(type_targets),
        KIND_TRIPLET: len(triplet_targets),
    }

    in_scope = entity_targets | type_targets | triplet_targets
    grouped: dict[str, list[Annotation]] = {}
    for annotation in annotations:
        key = annotation.target_key
        if key not in in_scope:
            report.notes.append(f"annotation for unknown target ignored: {key}")
            continue
        grouped.setdefault(key, []).append(annotation)

    verdicts: dict[str, tuple[str, bool]] = {key: _adjudicate(records) for key, records in grouped.items()}

    for key in entity_targets:
        outcome = verdicts.get(key)
        if outcome is None:
            continue
        if outcome[0] == VERDICT_CORRECT:
            report.entity_tp += 1
            report.entity_inferred += outcome[1]
        else:
            report.entity_fp += 1
    for key in type_targets:
        outcome = verdicts.get(key)
        if outcome is None:
            continue
        if outcome[0] == VERDICT_CORRECT:
            report.type_tp += 1
        else:
            report.type_fp += 1
    for key in triplet_targets:
        outcome = verdicts.get(key)
        if outcome is None:
            continue
        if outcome[0] == VERDICT_CORRECT:
            report.triplet_tp += 1
            report.triplet_inferred += outcome[1]
        else:
            report.triplet_fp += 1

    report.pending = {
        KIND_ENTITY: sum(1 for key in entity_targets if key not in verdicts),
        KIND_ENTITY_TYPE: sum(1 for key in type_targets if key not in verdicts),
        KIND_TRIPLET: sum(1 for key in triplet_targets if key not in verdicts),
    }

    correct_labels = {
        graph.entities[key.split(":", 1)[1]].label.casefold()
        for key in entity_targets
        if verdicts.get(key, ("", False))[0] == VERDICT_CORRECT
    }
    fn = 0
    for document_id, label in sorted(ground_truth.missed_pairs()):
        if label in correct_labels:
            report.notes.append(
                f"ground-truth label duplicates a correct extracted entity, "
                f"excluded from FN: {document_id}/{label}"
            )
            continue
        fn += 1
    report.entity_fn = fn
    return report


def qualifying_types(graph: KnowledgeGraph, document_id: str | None = None) -> list[str]:
    """Type labels with at least two associated entities, the missed-entity scope."""
    counts: dict[str, int] = {}
    names: dict[str, str] = {}
    for entity in graph.entities.values():
        if document_id is not None and not any(
            p.document_id == document_id for p in entity.provenance
        ):
            continue
        for t in entity.types:
            key = t.casefold()
            counts[key] = counts.get(key, 0) + 1
            names.setdefault(key, t)
    return [names[k] for k in sorted(k for k, n in counts.items() if n >= 2)]
