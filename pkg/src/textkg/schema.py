"""Bottom-up taxonomy induction over resolved entity types.

Each cluster's deduplicated type labels get a hypernym prompt; the returned
hypernyms are merged across clusters, re-clustered by label similarity, and
fed back into hypernym generation until a single hypernym tops a single
cluster. A level guard attaches a synthetic root if convergence stalls.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from urllib.parse import quote

from .gateway import Backend
from .model import EntityRecord
from .prompts import TemplateSet, numbered_list, validated_completion
from .serialize import BASE_NAMESPACE
from .similarity import Thresholds, label_similarity

logger = logging.getLogger(__name__)

DEFAULT_RELATION = "is type of"
SYNTHETIC_ROOT_LABEL = "entity"
DEFAULT_MAX_LEVELS = 10


@dataclass(frozen=True)
class SchemaNode:
    label: str
    level: int


@dataclass(frozen=True)
class SchemaEdge:
    child: SchemaNode
    parent: SchemaNode
    relation: str = DEFAULT_RELATION

    def __post_init__(self) -> None:
        if self.parent.level != self.child.level + 1:
            raise ValueError("edges must climb exactly one level")


@dataclass
class SchemaGraph:
    nodes: list[SchemaNode] = field(default_factory=list)
    edges: list[SchemaEdge] = field(default_factory=list)
    root: SchemaNode | None = None

    @property
    def levels(self) -> int:
        return 0 if not self.nodes else max(n.level for n in self.nodes) + 1

    def parents(self, node: SchemaNode) -> list[SchemaNode]:
        return [e.parent for e in self.edges if e.child == node]

    def validate(self) -> None:
        """Level discipline, unique labels per level, single root, totality."""
        if not self.nodes:
            if self.root is not None or self.edges:
                raise ValueError("empty schema cannot carry a root or edges")
            return
        per_level: dict[int, set[str]] = {}
        for node in self.nodes:
            key = node.label.casefold()
            if key in per_level.setdefault(node.level, set()):
                raise ValueError(f"duplicate label at level {node.level}: {node.label!r}")
            per_level[node.level].add(key)
        top = max(per_level)
        top_nodes = [n for n in self.nodes if n.level == top]
        if len(top_nodes) != 1 or self.root != top_nodes[0]:
            raise ValueError("schema must have exactly one maximum-level root")
        node_set = set(self.nodes)
        for edge in self.edges:
            if edge.child not in node_set or edge.parent not in node_set:
                raise ValueError("edge references unknown node")
        for node in self.nodes:
            if node != self.root and not self.parents(node):
                raise ValueError(f"non-root node without parent: {node}")

    def to_document(self) -> dict:
        return {
            "root": None if self.root is None else {"label": self.root.label, "level": self.root.level},
            "nodes": [
                {"label": n.label, "level": n.level}
                for n in sorted(self.nodes, key=lambda n: (n.level, n.label.casefold()))
            ],
            "edges": [
                {
                    "child": e.child.label,
                    "child_level": e.child.level,
                    "parent": e.parent.label,
                    "relation": e.relation,
                }
                for e in sorted(
                    self.edges,
                    key=lambda e: (e.child.level, e.child.label.casefold(), e.parent.label.casefold()),
                )
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_document(), indent=2, sort_keys=True) + "\n"

    def to_ntriples(self) -> str:
        lines = []
        for e in sorted(
            self.edges,
            key=lambda e: (e.child.level, e.child.label.casefold(), e.parent.label.casefold()),
        ):
            child = f"<{BASE_NAMESPACE}type/{quote(e.child.label, safe='')}>"
            relation = f"<{BASE_NAMESPACE}relation/{quote(e.relation, safe='')}>"
            parent = f"<{BASE_NAMESPACE}type/{quote(e.parent.label, safe='')}>"
            lines.append(f"{child} {relation} {parent} .")
        return "".join(line + "\n" for line in lines)


@dataclass(frozen=True)
class HypernymEntry:
    label: str
    relation: str
    covered: tuple[str, ...]


def collect_types(clusters: list[list[EntityRecord]]) -> list[list[str]]:
    """Per-cluster type lists, case-fold deduplicated and canonically ordered.

    Clusters whose entities carry no types are dropped.
    """
    result = []
    for cluster in clusters:
        seen: dict[str, str] = {}
        for entity in cluster:
            for t in entity.types:
                seen.setdefault(t.casefold(), t)
        if seen:
            result.append([seen[k] for k in sorted(seen)])
    return result


def generate_hypernyms(
    labels: list[str],
    backend: Backend,
    templates: TemplateSet,
) -> list[HypernymEntry]:
    """One prompt per cluster; uncovered labels lift themselves one level."""
    if not labels:
        raise ValueError("hypernym generation needs at least one type label")
    report = validated_completion(
        backend,
        templates.get("hypernym-generation"),
        user={"item_list": numbered_list(labels)},
        reference=labels,
    )
    entries: list[HypernymEntry] = []
    covered: set[str] = set()
    if report.whole_response_rejected:
        logger.warning("hypernym generation failed for %s; labels self-lift", labels)
    else:
        for line in report.accepted:
            members = tuple(labels[n - 1] for n in sorted(line.fields["members"]))
            entries.append(
                HypernymEntry(
                    label=line.fields["hypernym"].strip(),
                    relation=line.fields["relation"].strip() or DEFAULT_RELATION,
                    covered=members,
                )
            )
            covered.update(members)
    for label in labels:
        if label not in covered:
            entries.append(HypernymEntry(label=label, relation=DEFAULT_RELATION, covered=(label,)))
    return entries


def agglomerate(
    entries: list[HypernymEntry],
    thresholds: Thresholds | None = None,
) -> tuple[list[str], list[list[str]]]:
    """Dedup hypernym labels across clusters, then re-cluster them by label similarity.

    Hypernyms carry no descriptions, so the pair admission collapses to the
    label term alone at the high merge threshold.
    """
    if not entries:
        raise ValueError("agglomeration needs at least one hypernym entry")
    thresholds = thresholds or Thresholds()
    seen: dict[str, str] = {}
    for entry in entries:
        seen.setdefault(entry.label.casefold(), entry.label)
    unique = [seen[k] for k in sorted(seen)]

    from .resolution import build_clusters

    def admit(a: str, b: str) -> bool:
        return label_similarity(a, b) >= thresholds.entity_high

    clusters = build_clusters(unique, admit, kind="entity")
    return unique, [list(c.member_ids) for c in clusters]


def infer_schema(
    per_cluster_types: list[list[str]],
    backend: Backend,
    templates: TemplateSet,
    thresholds: Thresholds | None = None,
    max_levels: int = DEFAULT_MAX_LEVELS,
) -> SchemaGraph:
    """Iterate hypernym generation and agglomeration until a single root emerges."""
    if max_levels < 1:
        raise ValueError("max_levels must be >= 1")
    clusters = [labels for labels in per_cluster_types if labels]
    if not clusters:
        return SchemaGraph()

    graph = SchemaGraph()
    nodes_by_level: dict[int, dict[str, SchemaNode]] = {0: {}}
    for cluster in clusters:
        for label in cluster:
            nodes_by_level[0].setdefault(label.casefold(), SchemaNode(label, 0))
    graph.nodes.extend(nodes_by_level[0].values())

    level = 0
    edge_seen: set[tuple] = set()
    while True:
        entries: list[HypernymEntry] = []
        for cluster in clusters:
            entries.extend(generate_hypernyms(cluster, backend, templates))

        next_level = level + 1
        nodes_by_level[next_level] = {}
        for entry in entries:
            parent = nodes_by_level[next_level].setdefault(
                entry.label.casefold(), SchemaNode(entry.label, next_level)
            )
            for child_label in entry.covered:
                child = nodes_by_level[level][child_label.casefold()]
                key = (child.label.casefold(), child.level, parent.label.casefold(), entry.relation)
                if key not in edge_seen:
                    edge_seen.add(key)
                    graph.edges.append(SchemaEdge(child, parent, entry.relation))
        graph.nodes.extend(nodes_by_level[next_level].values())

        unique, next_clusters = agglomerate(entries, thresholds)
        level = next_level
        if len(unique) == 1 and len(next_clusters) == 1:
            graph.root = next(iter(nodes_by_level[level].values()))
            break
        if level >= max_levels - 1:
            root = SchemaNode(SYNTHETIC_ROOT_LABEL, level + 1)
            graph.nodes.append(root)
            for node in nodes_by_level[level].values():
                graph.edges.append(SchemaEdge(node, root, DEFAULT_RELATION))
            graph.root = root
            logger.warning("level guard tripped; synthetic root attached at level %d", root.level)
            break
        clusters = next_clusters

    graph.validate()
    return graph
