"""Entity and predicate resolution.

Pairwise similarity scores admit edges between co-referent candidates, the
connected components of that graph become clusters, a disambiguation prompt
splits each cluster into groups of truly identical items, and a shrinkage
prompt picks one canonical label per group. Triplets are then rewritten onto
the merged records.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .gateway import Backend
from .model import (
    RESOLVED,
    EntityRecord,
    KnowledgeGraph,
    PredicateRecord,
    ProvenanceRef,
    TripletRecord,
)
from .prompts import TemplateSet, numbered_list, validated_completion
from .similarity import (
    EmbeddingProvider,
    SimilarityWeights,
    Thresholds,
    cosine,
    entity_pair_admitted,
    label_similarity,
    predicate_pair_admitted,
    type_similarity,
)

logger = logging.getLogger(__name__)

CLUSTER_PROMPT_CAP = 30


@dataclass(frozen=True)
class Cluster:
    kind: str  # "entity" | "predicate"
    member_ids: tuple[str, ...]


@dataclass(frozen=True)
class EquivalenceGroup:
    member_ids: tuple[str, ...]
    canonical_label: str


class _DisjointSet:
    def __init__(self, items: Iterable[str]):
        self.parent = {item: item for item in items}

    def find(self, item: str) -> str:
        root = item
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[item] != root:
            self.parent[item], item = root, self.parent[item]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def build_clusters(
    items: list[str],
    admit: Callable[[str, str], bool],
    kind: str = "entity",
) -> list[Cluster]:
    """Connected components over all admitted pairs; singletons allowed.

    Output is canonical: members sorted, clusters ordered by smallest member.
    """
    ds = _DisjointSet(items)
    for i, a in enumerate(items):
        for b in items[i + 1 :]:
            if admit(a, b):
                ds.union(a, b)
    components: dict[str, list[str]] = {}
    for item in items:
        components.setdefault(ds.find(item), []).append(item)
    clusters = [Cluster(kind, tuple(sorted(members))) for members in components.values()]
    clusters.sort(key=lambda c: c.member_ids[0])
    return clusters


class _CachingProvider:
    """Embed each distinct text once per resolution run."""

    def __init__(self, provider: EmbeddingProvider):
        self._provider = provider
        self._cache: dict[str, np.ndarray] = {}
        self.dimension = provider.dimension

    def embed(self, text: str) -> np.ndarray:
        vector = self._cache.get(text)
        if vector is None:
            vector = self._provider.embed(text)
            self._cache[text] = vector
        return vector


class Resolver:
    def __init__(
        self,
        backend: Backend,
        templates: TemplateSet | None = None,
        weights: SimilarityWeights | None = None,
        thresholds: Thresholds | None = None,
        provider: EmbeddingProvider | None = None,
        cluster_prompt_cap: int = CLUSTER_PROMPT_CAP,
    ):
        from .similarity import HashedTrigramEmbedder

        self.backend = backend
        self.templates = templates or TemplateSet.load()
        self.weights = weights or SimilarityWeights()
        self.thresholds = thresholds or Thresholds()
        self.provider = _CachingProvider(provider or HashedTrigramEmbedder())
        self.cluster_prompt_cap = cluster_prompt_cap

    # -- scoring helpers (cached embeddings) -----------------------------

    def _description_sim(self, a: str, b: str) -> float:
        if not a.strip() or not b.strip():
            return 0.0
        return max(0.0, cosine(self.provider.embed(a), self.provider.embed(b)))

    def entity_pair_score(self, i: EntityRecord, j: EntityRecord) -> float:
        return (
            self.weights.entity_label_weight * label_similarity(i.label, j.label)
            + self.weights.entity_description_weight
            * self._description_sim(i.description, j.description)
        )

    def predicate_pair_score(self, i: PredicateRecord, j: PredicateRecord) -> float:
        return (
            self.weights.predicate_label_weight * label_similarity(i.label, j.label)
            + self.weights.predicate_description_weight
            * self._description_sim(i.description, j.description)
        )

    # -- clustering --------------------------------------------------------

    def cluster_entities(self, records: list[EntityRecord]) -> list[Cluster]:
        by_id = {r.id: r for r in records}

        def admit(a: str, b: str) -> bool:
            i, j = by_id[a], by_id[b]
            return entity_pair_admitted(
                self.entity_pair_score(i, j), type_similarity(i, j), self.thresholds
            )

        return build_clusters(sorted(by_id), admit, kind="entity")

    def cluster_predicates(self, records: list[PredicateRecord]) -> list[Cluster]:
        by_id = {r.id: r for r in records}

        def admit(a: str, b: str) -> bool:
            return predicate_pair_admitted(
                self.predicate_pair_score(by_id[a], by_id[b]), self.thresholds
            )

        return build_clusters(sorted(by_id), admit, kind="predicate")

    # -- disambiguation and shrinkage ---------------------------------------

    def _prompt_batches(self, cluster: Cluster, records: dict) -> list[list[str]]:
        """Split oversized clusters for prompting, densest members first."""
        members = list(cluster.member_ids)
        if len(members) <= self.cluster_prompt_cap:
            return [members]
        if cluster.kind == "entity":
            score = lambda a, b: self.entity_pair_score(records[a], records[b])
        else:
            score = lambda a, b: self.predicate_pair_score(records[a], records[b])
        internal = {
            m: sum(score(m, other) for other in members if other != m) for m in members
        }
        ordered = sorted(members, key=lambda m: (-internal[m], m))
        return [
            ordered[i : i + self.cluster_prompt_cap]
            for i in range(0, len(ordered), self.cluster_prompt_cap)
        ]

    def disambiguate_cluster(self, cluster: Cluster, records: dict) -> list[tuple[str, ...]]:
        """Split one cluster into groups of identical items via one prompt per batch."""
        if len(cluster.member_ids) == 1:
            return [cluster.member_ids]
        groups: list[tuple[str, ...]] = []
        for batch in self._prompt_batches(cluster, records):
            labels = [records[m].label for m in batch]
            items = "\n".join(
                f"{n + 1}. {records[m].label} | {getattr(records[m], 'description', '')}"
                for n, m in enumerate(batch)
            )
            report = validated_completion(
                self.backend,
                self.templates.get("cluster-disambiguation"),
                user={"item_list": items},
                reference=labels,
            )
            covered: set[str] = set()
            if report.whole_response_rejected:
                logger.warning("disambiguation failed for %s; members kept apart", labels)
            else:
                for line in report.accepted:
                    member_ids = tuple(sorted(batch[n - 1] for n in line.fields["members"]))
                    if member_ids:
                        groups.append(member_ids)
                        covered.update(member_ids)
            groups.extend((m,) for m in batch if m not in covered)
        groups.sort(key=lambda g: g[0])
        return groups

    def shrink_group(self, member_ids: tuple[str, ...], records: dict) -> str:
        """One canonical label per group; singletons keep their own label, no call."""
        labels = sorted(records[m].label for m in member_ids)
        if len(member_ids) == 1:
            return labels[0]
        report = validated_completion(
            self.backend,
            self.templates.get("concept-shrinkage"),
            user={"item_list": numbered_list(labels)},
        )
        if report.whole_response_rejected:
            fallback = min(labels)
            logger.warning("shrinkage failed for %s; falling back to %r", labels, fallback)
            return fallback
        return report.accepted[0].fields["label"]

    # -- full resolution -----------------------------------------------------

    def resolve(self, graph: KnowledgeGraph) -> tuple[KnowledgeGraph, dict]:
        """Resolve a graph's entities and predicates onto canonical records."""
        report: dict = {"entities": {}, "predicates": {}, "dropped_self_relations": 0}

        entity_records = {e.id: e for e in graph.entities.values()}
        entity_clusters = self.cluster_entities(list(entity_records.values()))
        entity_groups: list[EquivalenceGroup] = []
        for cluster in entity_clusters:
            for member_ids in self.disambiguate_cluster(cluster, entity_records):
                entity_groups.append(
                    EquivalenceGroup(member_ids, self.shrink_group(member_ids, entity_records))
                )

        predicate_records = {p.id: p for p in graph.predicates.values()}
        predicate_clusters = self.cluster_predicates(list(predicate_records.values()))
        predicate_groups: list[EquivalenceGroup] = []
        for cluster in predicate_clusters:
            for member_ids in self.disambiguate_cluster(cluster, predicate_records):
                predicate_groups.append(
                    EquivalenceGroup(member_ids, self.shrink_group(member_ids, predicate_records))
                )

        resolved = KnowledgeGraph(stage=RESOLVED)
        entity_map: dict[str, str] = {}
        for group in entity_groups:
            members = [entity_records[m] for m in group.member_ids]
            merged = EntityRecord(
                label=group.canonical_label,
                description=_longest_description(members),
                types=_merged_types(members),
                provenance=_merged_provenance(members),
            )
            new_id = resolved.add_entity(merged)
            for m in group.member_ids:
                entity_map[m] = new_id

        predicate_map: dict[str, str] = {}
        for group in predicate_groups:
            members = [predicate_records[m] for m in group.member_ids]
            merged = PredicateRecord(
                label=group.canonical_label,
                description=_longest_description(members),
            )
            new_id = resolved.add_predicate(merged)
            for m in group.member_ids:
                predicate_map[m] = new_id

        for triplet in sorted(graph.triplets, key=lambda t: t.key):
            subject = entity_map[triplet.subject]
            obj = entity_map[triplet.object]
            if subject == obj:
                report["dropped_self_relations"] += 1
                logger.info("dropping self-relation after merge: %s", triplet.key)
                continue
            resolved.add_triplet(
                TripletRecord(
                    subject=subject,
                    predicate=predicate_map[triplet.predicate],
                    object=obj,
                    provenance=list(triplet.provenance),
                )
            )

        report["entities"] = _report_side(entity_clusters, entity_groups, entity_map)
        report["predicates"] = _report_side(predicate_clusters, predicate_groups, predicate_map)
        resolved.validate()
        return resolved, report


def _longest_description(members: list) -> str:
    descriptions = [m.description for m in members]
    return max(descriptions, key=lambda d: (len(d), d)) if descriptions else ""


def _merged_types(members: list[EntityRecord]) -> list[str]:
    seen: dict[str, str] = {}
    for member in members:
        for t in member.types:
            seen.setdefault(t.casefold(), t)
    return [seen[k] for k in sorted(seen)]


def _merged_provenance(members: list[EntityRecord]) -> list[ProvenanceRef]:
    refs = {ref for member in members for ref in member.provenance}
    return sorted(refs)


def _report_side(clusters: list[Cluster], groups: list[EquivalenceGroup], mapping: dict) -> dict:
    return {
        "clusters": [list(c.member_ids) for c in clusters],
        "groups": [
            {
                "members": list(g.member_ids),
                "canonical_label": g.canonical_label,
                "resolved_id": mapping[g.member_ids[0]],
            }
            for g in groups
        ],
    }
