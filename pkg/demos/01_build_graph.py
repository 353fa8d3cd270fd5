#!/usr/bin/env python3
"""Build a knowledge graph from the bundled corpus, entirely offline.

The fixture backend replays scripted model responses keyed by prompt digest,
so the run is deterministic and needs no credentials. Swap the backend kind
to "remote-chat" (and set TEXTKG_API_KEY) to run against a live endpoint.
"""

import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from textkg.gateway import BackendConfig
from textkg.pipeline import Pipeline, PipelineConfig
from textkg.serialize import document_to_graph

config = PipelineConfig()
config.input_dir = REPO / "fixtures" / "corpus"
config.out_dir = Path(tempfile.mkdtemp(prefix="textkg-demo-"))
config.backend = BackendConfig(
    kind="fixture", fixture_file=str(REPO / "fixtures" / "golden_fixture.json")
)

pipeline = Pipeline(config)
artifacts = pipeline.run()
print(f"artifacts in {config.out_dir}/stages, {pipeline.backend.calls_made} model calls\n")

candidate = document_to_graph(pipeline.load_payload("extract"))
resolved = document_to_graph(pipeline.load_payload("resolve"))
print(f"candidate graph: {candidate.stats()}")
print(f"resolved graph:  {resolved.stats()}\n")

print("resolved entities:")
for entity in sorted(resolved.entities.values(), key=lambda e: e.label.lower()):
    print(f"  {entity.label:28} {entity.types}")

print("\ntriplets:")
for triplet in resolved.triplets:
    subject = resolved.entities[triplet.subject].label
    predicate = resolved.predicates[triplet.predicate].label
    obj = resolved.entities[triplet.object].label
    print(f"  {subject} -- {predicate} --> {obj}")

print("\nN-Triples rendering:")
print(pipeline.export("ntriples").decode(), end="")

# rerunning is free: every stage is cached by content digests
again = Pipeline(config)
again.run()
print(f"\nimmediate rerun made {again.backend.calls_made} model calls (cache hit)")
