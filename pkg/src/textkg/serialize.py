"""Graph serialization: a lossless JSON document format and an N-Triples rendering.

Both exports sort records by id so equal graphs always serialize to equal bytes.
"""

from __future__ import annotations

import json
from urllib.parse import quote

from .model import (
    EntityRecord,
    KnowledgeGraph,
    PredicateRecord,
    ProvenanceRef,
    TripletRecord,
)

BASE_NAMESPACE = "http://example.org/kg/"

FORMAT_DOCUMENT = "doc"
FORMAT_NTRIPLES = "ntriples"


def graph_to_document(graph: KnowledgeGraph) -> dict:
    graph.validate()
    return {
        "stage": graph.stage,
        "entities": [
            {
                "id": e.id,
                "label": e.label,
                "description": e.description,
                "types": list(e.types),
                "provenance": [p.to_document() for p in e.provenance],
            }
            for e in sorted(graph.entities.values(), key=lambda e: e.id)
        ],
        "predicates": [
            {"id": p.id, "label": p.label, "description": p.description}
            for p in sorted(graph.predicates.values(), key=lambda p: p.id)
        ],
        "triplets": [
            {
                "subject": t.subject,
                "predicate": t.predicate,
                "object": t.object,
                "provenance": [p.to_document() for p in t.provenance],
            }
            for t in sorted(graph.triplets, key=lambda t: t.key)
        ],
    }


def document_to_graph(doc: dict) -> KnowledgeGraph:
    graph = KnowledgeGraph(stage=doc["stage"])
    for e in doc["entities"]:
        graph.add_entity(
            EntityRecord(
                label=e["label"],
                description=e["description"],
                types=list(e["types"]),
                provenance=[ProvenanceRef.from_document(p) for p in e["provenance"]],
                id=e["id"],
            )
        )
    for p in doc["predicates"]:
        graph.add_predicate(
            PredicateRecord(label=p["label"], description=p["description"], id=p["id"])
        )
    for t in doc["triplets"]:
        graph.add_triplet(
            TripletRecord(
                subject=t["subject"],
                predicate=t["predicate"],
                object=t["object"],
                provenance=[ProvenanceRef.from_document(p) for p in t["provenance"]],
            )
        )
    return graph


def _iri(kind: str, label: str) -> str:
    return f"<{BASE_NAMESPACE}{kind}/{quote(label, safe='')}>"


def graph_to_ntriples(graph: KnowledgeGraph) -> str:
    """One `<s> <p> <o> .` line per triplet, label-encoded, sorted by id."""
    graph.validate()
    lines = []
    for t in sorted(graph.triplets, key=lambda t: t.key):
        s = _iri("entity", graph.entities[t.subject].label)
        p = _iri("predicate", graph.predicates[t.predicate].label)
        o = _iri("entity", graph.entities[t.object].label)
        lines.append(f"{s} {p} {o} .")
    return "".join(line + "\n" for line in lines)


def export_graph(graph: KnowledgeGraph, format: str) -> bytes:
    if format == FORMAT_DOCUMENT:
        doc = graph_to_document(graph)
        return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")
    if format == FORMAT_NTRIPLES:
        return graph_to_ntriples(graph).encode("utf-8")
    raise ValueError(f"unknown export format: {format!r}")


def import_graph(data: bytes) -> KnowledgeGraph:
    return document_to_graph(json.loads(data.decode("utf-8")))
