#!/usr/bin/env python3
"""Entity resolution mechanics: similarity scores, thresholds, and clusters.

Shows how the weighted label/description score admits pairs, how admitted
pairs chain into clusters, and how a scripted disambiguation prompt splits a
cluster of related-but-different vehicles into co-referent groups.
"""

import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from textkg.authoring import RecordingBackend, parse_numbered, task_of, user_sections
from textkg.model import EntityRecord
from textkg.prompts import TemplateSet
from textkg.resolution import Resolver
from textkg.similarity import (
    HashedTrigramEmbedder,
    SimilarityWeights,
    Thresholds,
    entity_pair_admitted,
    label_similarity,
)

weights = SimilarityWeights()
thresholds = Thresholds()
provider = HashedTrigramEmbedder()

print("label similarity is normalized edit distance:")
for a, b in [("car", "car"), ("car", "cat"), ("motorcycle", "motorbike"), ("", "abc")]:
    print(f"  {a!r:14} vs {b!r:14} -> {label_similarity(a, b):.4f}")

print("\npair admission: high score alone, or mid score plus related types")
for score, type_score in [(0.91, 0.0), (0.8, 0.3), (0.8, 0.2), (0.69, 1.0)]:
    verdict = entity_pair_admitted(score, type_score, thresholds)
    print(f"  score={score:.2f} type-match={type_score:.2f} -> {verdict}")

# Seven rental options from a brochure: all "a means of transport", so the
# description term is 1.0 for every pair and the label term decides chaining.
labels = ["car", "automobile", "motorcycle", "motorbike", "motorcar", "bicycle", "bike"]
records = {
    r.id: r
    for r in (
        EntityRecord(label=l, description="A means of transport", types=["Vehicle"])
        for l in labels
    )
}

SYNONYMS = [{"car", "motorcar", "automobile"}, {"motorcycle", "motorbike"}, {"bicycle", "bike"}]


def scripted_model(request):
    templates = TemplateSet.load()
    task = task_of(request, templates)
    sections = user_sections(request)
    if task == "cluster-disambiguation":
        entries = parse_numbered(sections["items"])
        names = [e.split(" | ")[0] for e in entries]
        lines = []
        for synonym_set in SYNONYMS:
            members = [(i, n) for i, n in enumerate(names, 1) if n in synonym_set]
            if len(members) > 1:
                lines.append("; ".join(f"({i}) {n}" for i, n in members))
        return "\n".join(lines) or "none"
    if task == "concept-shrinkage":
        names = parse_numbered(sections["labels"])
        return min(names, key=len)
    raise AssertionError(task)


resolver = Resolver(RecordingBackend(scripted_model), provider=provider)
clusters = resolver.cluster_entities(list(records.values()))
print(f"\n{len(labels)} vehicle mentions form {len(clusters)} cluster(s):")
for cluster in clusters:
    print("  cluster:", sorted(records[m].label for m in cluster.member_ids))

groups = resolver.disambiguate_cluster(clusters[0], records)
print("\ndisambiguation splits the cluster into co-referent groups:")
for group in groups:
    canonical = resolver.shrink_group(group, records)
    members = sorted(records[m].label for m in group)
    print(f"  {members} -> canonical label {canonical!r}")
