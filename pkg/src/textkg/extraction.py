"""Candidate triplet extraction.

Each document is split into chunks, entities are pulled from every chunk,
and then triplets are extracted one focus entity at a time: take the focus
entity's description as a small excerpt, ask which other entities it
mentions, extract relations restricted to that mentioned subset, and finally
describe each predicate generically. Every response passes the line grammar
and numbered-list consistency checks before anything enters the graph.
"""

from __future__ import annotations

import logging

from .chunking import SplitConfig, attach_summaries, split
from .errors import TokenBudgetError
from .gateway import Backend
from .model import (
    EntityRecord,
    KnowledgeGraph,
    PredicateRecord,
    ProvenanceRef,
    TripletRecord,
)
from .prompts import TemplateSet, numbered_list, validated_completion

logger = logging.getLogger(__name__)

MENTION_BATCH_SIZE = 40

RawTriple = tuple[str, str, str]  # (subject entity id, predicate label, object entity id)


PHRASE_FROM_DESCRIPTION = "description"
PHRASE_FROM_SUMMARY = "focused-summary"


class Extractor:
    def __init__(
        self,
        backend: Backend,
        templates: TemplateSet | None = None,
        split_config: SplitConfig | None = None,
        mention_batch_size: int = MENTION_BATCH_SIZE,
        phrase_selection: str = PHRASE_FROM_DESCRIPTION,
    ):
        if phrase_selection not in (PHRASE_FROM_DESCRIPTION, PHRASE_FROM_SUMMARY):
            raise ValueError(f"unknown phrase selection mode: {phrase_selection!r}")
        self.backend = backend
        self.templates = templates or TemplateSet.load()
        self.split_config = split_config or SplitConfig()
        self.mention_batch_size = mention_batch_size
        self.phrase_selection = phrase_selection

    # -- per-chunk entity extraction ------------------------------------

    def extract_entities(
        self,
        chunk_text: str,
        context_summary: str = "",
        document_id: str = "",
        chunk_index: int = 0,
    ) -> list[EntityRecord]:
        """One call per chunk; returns the records from every accepted line."""
        if not chunk_text.strip():
            return []
        context = ""
        if context_summary.strip():
            context = f"Summary of the preceding text:\n<<<\n{context_summary}\n>>>\n\n"
        try:
            report = validated_completion(
                self.backend,
                self.templates.get("entity-extraction"),
                user={"context": context, "text": chunk_text},
            )
        except TokenBudgetError:
            logger.warning("entity extraction over budget for %s#%d", document_id, chunk_index)
            raise
        if report.whole_response_rejected:
            logger.warning(
                "entity extraction response unusable for %s#%d, chunk skipped",
                document_id,
                chunk_index,
            )
            return []
        self._log_rejections("entity-extraction", report)
        records = []
        for line in report.accepted:
            records.append(
                EntityRecord(
                    label=line.fields["label"],
                    description=line.fields["description"],
                    types=line.fields["types"],
                    provenance=[ProvenanceRef(document_id, chunk_index)],
                )
            )
        return records

    # -- focus-entity steps ----------------------------------------------

    def select_phrase(self, focus: EntityRecord) -> str | None:
        """The focus excerpt is the entity's own description; no model call.

        The focused-summary variant (a query-focused abstractive summary of
        the source text) shares this interface but is not implemented.
        """
        if self.phrase_selection == PHRASE_FROM_SUMMARY:
            raise NotImplementedError("focused-summary phrase selection is a stub")
        description = focus.description.strip()
        if not description:
            logger.info("focus %s has no description, skipped for triplets", focus.label)
            return None
        return description

    def recognize_mentions(
        self,
        focus_id: str,
        excerpt: str,
        entities: list[EntityRecord],
    ) -> list[str]:
        """Ids of entities the excerpt mentions; the focus entity is always included.

        The full entity list is sent in batches as a numbered list; entries
        failing the echo consistency check count as "no".
        """
        mentioned: set[str] = {focus_id}
        for start in range(0, len(entities), self.mention_batch_size):
            batch = entities[start : start + self.mention_batch_size]
            labels = [e.label for e in batch]
            try:
                report = validated_completion(
                    self.backend,
                    self.templates.get("mention-recognition"),
                    user={"entity_list": numbered_list(labels), "text": excerpt},
                    reference=labels,
                )
            except TokenBudgetError:
                logger.warning("mention batch over budget, treated as unanswered")
                continue
            if report.whole_response_rejected:
                logger.warning("mention recognition failed for focus %s", focus_id)
                continue
            self._log_rejections("mention-recognition", report)
            for line in report.accepted:
                if line.fields["answer"]:
                    mentioned.add(batch[line.fields["number"] - 1].id)
        return sorted(mentioned)

    def extract_relations(
        self,
        excerpt: str,
        mentioned: list[EntityRecord],
    ) -> list[RawTriple]:
        """Triples over the mentioned subset; needs at least two candidates."""
        if len(mentioned) < 2:
            return []
        labels = [e.label for e in mentioned]
        try:
            report = validated_completion(
                self.backend,
                self.templates.get("relation-extraction"),
                user={"entity_list": numbered_list(labels), "text": excerpt},
                reference=labels,
            )
        except TokenBudgetError:
            logger.warning("relation extraction over budget, no triples for this focus")
            return []
        self._log_rejections("relation-extraction", report)
        triples: list[RawTriple] = []
        for line in report.accepted:
            triple = (
                mentioned[line.fields["subject"] - 1].id,
                line.fields["predicate"].strip(),
                mentioned[line.fields["object"] - 1].id,
            )
            if triple not in triples:
                triples.append(triple)
        return triples

    def describe_predicates(
        self,
        excerpt: str,
        triples: list[RawTriple],
        labels_by_id: dict[str, str],
    ) -> dict[str, str]:
        """One call per focus context; returns a description per unique predicate."""
        if not triples:
            return {}
        unique_predicates = list(dict.fromkeys(p for _, p, _ in triples))
        triplet_lines = "\n".join(
            f"{labels_by_id[s]}; {p}; {labels_by_id[o]}" for s, p, o in triples
        )
        try:
            report = validated_completion(
                self.backend,
                self.templates.get("predicate-description"),
                user={"triplet_list": triplet_lines, "text": excerpt},
                reference=unique_predicates,
            )
        except TokenBudgetError:
            logger.warning("predicate description over budget; predicates left bare")
            return {}
        self._log_rejections("predicate-description", report)
        descriptions: dict[str, str] = {}
        for line in report.accepted:
            label = line.fields["label"].strip()
            if label not in descriptions:
                descriptions[label] = line.fields["description"].strip()
        return descriptions

    # -- whole document ----------------------------------------------------

    def extract_document(self, document_id: str, text: str) -> KnowledgeGraph:
        """Run the full extraction chain for one document into a candidate fragment."""
        graph = KnowledgeGraph()
        if not text.strip():
            return graph
        chunks = split(text, self.split_config)
        attach_summaries(chunks, self.backend, self.templates, self.split_config)
        for chunk in chunks:
            for record in self.extract_entities(chunk.text, chunk.summary, document_id, chunk.index):
                graph.add_entity(record)

        entities = [graph.entities[i] for i in sorted(graph.entities)]
        labels_by_id = {e.id: e.label for e in entities}
        for focus in entities:
            excerpt = self.select_phrase(focus)
            if excerpt is None:
                continue
            mentioned_ids = self.recognize_mentions(focus.id, excerpt, entities)
            mentioned = [graph.entities[i] for i in mentioned_ids]
            triples = self.extract_relations(excerpt, mentioned)
            if not triples:
                continue
            descriptions = self.describe_predicates(excerpt, triples, labels_by_id)
            chunk_index = focus.provenance[0].chunk_index if focus.provenance else 0
            for subject_id, predicate_label, object_id in triples:
                predicate_id = graph.add_predicate(
                    PredicateRecord(
                        label=predicate_label,
                        description=descriptions.get(predicate_label, ""),
                    )
                )
                graph.add_triplet(
                    TripletRecord(
                        subject=subject_id,
                        predicate=predicate_id,
                        object=object_id,
                        provenance=[ProvenanceRef(document_id, chunk_index, focus.id)],
                    )
                )
        return graph

    @staticmethod
    def _log_rejections(task: str, report) -> None:
        for raw, reason in report.rejected:
            logger.info("rejected %s line (%s): %s", task, reason, raw)


def merge_fragments(fragments: list[KnowledgeGraph]) -> KnowledgeGraph:
    """Merge per-document fragments into one candidate graph, provenance unioned."""
    merged = KnowledgeGraph()
    for fragment in fragments:
        for entity in sorted(fragment.entities.values(), key=lambda e: e.id):
            merged.add_entity(
                EntityRecord(
                    label=entity.label,
                    description=entity.description,
                    types=list(entity.types),
                    provenance=list(entity.provenance),
                )
            )
        for predicate in sorted(fragment.predicates.values(), key=lambda p: p.id):
            merged.add_predicate(
                PredicateRecord(label=predicate.label, description=predicate.description)
            )
        for triplet in sorted(fragment.triplets, key=lambda t: t.key):
            merged.add_triplet(
                TripletRecord(
                    subject=triplet.subject,
                    predicate=triplet.predicate,
                    object=triplet.object,
                    provenance=list(triplet.provenance),
                )
            )
    return merged
