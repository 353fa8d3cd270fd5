#!/usr/bin/env python3
"""Author the golden fixture file and freeze the golden pipeline artifacts.

The transcript below is the hand-written "model": entity lines per document,
a substring rule for mentions, and lookup tables for relations, predicate
descriptions, cluster partitions, canonical labels, and hypernyms. Running
this script replays the real pipeline against those rules with a recording
backend, dumps every digest-keyed response to fixtures/golden_fixture.json,
re-runs the pipeline from the frozen fixture for verification, and copies
the resulting artifacts into tests/golden/.
"""

from __future__ import annotations

import json
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from textkg.authoring import RecordingBackend, parse_numbered, task_of, user_sections
from textkg.gateway import BackendConfig, FixtureBackend
from textkg.pipeline import Pipeline, PipelineConfig
from textkg.prompts import TemplateSet
from textkg.resolution import Resolver
from textkg.serialize import document_to_graph

FIXTURES = REPO / "fixtures"
GOLDEN = REPO / "tests" / "golden"

# --- the authored transcript -------------------------------------------------

VEHICLE_DESC = "A means of transport used to travel around the island"

ENTITY_LINES = {
    # marker substring of the chunk -> scripted entity-extraction response
    "Bastione di Santa Croce": "\n".join(
        [
            "1. Cagliari | The capital city of Sardinia, offering history, art, seashores, parks, and fine cuisine | City; Tourist Destination",
            "2. Bastione di Santa Croce | A panoramic terrace in Cagliari, offering a romantic view of the sunset | Tourist Attraction; Landmark",
            "3. Marina District | A historic quarter of Cagliari near the port, known for its restaurants | District; Tourist Destination",
        ]
    ),
    "motorcar": "\n".join(
        [
            "1. Cagliari | The capital city of Sardinia, offering a lively base for exploring the island | City",
            f"2. car | {VEHICLE_DESC} | Vehicle",
            f"3. automobile | {VEHICLE_DESC} | Vehicle",
            f"4. motorcycle | {VEHICLE_DESC} | Vehicle",
            f"5. motorbike | {VEHICLE_DESC} | Vehicle",
            f"6. motorcar | {VEHICLE_DESC} | Vehicle",
            f"7. bicycle | {VEHICLE_DESC} | Vehicle",
            f"8. bike | {VEHICLE_DESC} | Vehicle",
        ]
    ),
    "Sardinian cuisine": (
        "1. Sardinian cuisine | The traditional cooking of Sardinia, moving from garden and "
        "farmyard to the open sea | legumes; green vegetables; poultry; pork; fish; crustacean"
    ),
}

RELATIONS = [
    ("Cagliari", "has landmark", "Bastione di Santa Croce"),
    ("Marina District", "is located in", "Cagliari"),
]

PREDICATE_DESCRIPTIONS = {
    "has landmark": "Expresses a relationship between a place and a landmark located in it",
    "is located in": "Expresses that a place lies within a larger place that contains it",
}

EQUAL_LABEL_SETS = [
    {"car", "motorcar", "automobile"},
    {"motorcycle", "motorbike"},
    {"bicycle", "bike"},
]

CANONICAL_LABELS = {
    ("Cagliari", "Cagliari"): "Cagliari",
    ("automobile", "car", "motorcar"): "car",
    ("motorbike", "motorcycle"): "motorbike",
    ("bicycle", "bike"): "bike",
}

HYPERNYMS = {
    "vehicle": "transportation",
    "city": "place",
    "tourist destination": "place",
    "tourist attraction": "place",
    "landmark": "place",
    "district": "place",
    "legumes": "vegetables",
    "green vegetables": "vegetables",
    "pork": "meat",
    "poultry": "meat",
    "fish": "seafood",
    "crustacean": "seafood",
    "transportation": "concept",
    "place": "concept",
    "vegetables": "food",
    "meat": "food",
    "seafood": "food",
    "concept": "thing",
    "food": "thing",
}


def partition_items(labels: list[str]) -> list[list[int]]:
    """Identical labels group together, then the synonym sets; 1-based indexes."""
    groups: list[list[int]] = []
    used: set[int] = set()
    by_fold: dict[str, list[int]] = {}
    for index, label in enumerate(labels, 1):
        by_fold.setdefault(label.casefold(), []).append(index)
    for indexes in by_fold.values():
        if len(indexes) > 1:
            groups.append(indexes)
            used.update(indexes)
    for synonyms in EQUAL_LABEL_SETS:
        members = [
            i for i, l in enumerate(labels, 1) if i not in used and l.casefold() in synonyms
        ]
        if len(members) > 1:
            groups.append(members)
            used.update(members)
    return groups


def make_responder(templates: TemplateSet):
    def responder(request):
        task = task_of(request, templates)
        sections = user_sections(request)

        if task == "entity-extraction":
            text = sections["text"]
            for marker, response in ENTITY_LINES.items():
                if marker in text:
                    return response
            raise AssertionError(f"no entity table for chunk: {text[:60]!r}")

        if task == "mention-recognition":
            labels = parse_numbered(sections["entities"])
            text = sections["text"].casefold()
            return "\n".join(
                f"{n}. {label} - {'yes' if label.casefold() in text else 'no'}"
                for n, label in enumerate(labels, 1)
            )

        if task == "relation-extraction":
            labels = parse_numbered(sections["entities"])
            lines = []
            for subject, predicate, obj in RELATIONS:
                if subject in labels and obj in labels:
                    lines.append(
                        f"({labels.index(subject) + 1}) {subject}; {predicate}; "
                        f"({labels.index(obj) + 1}) {obj}"
                    )
            if not lines:
                raise AssertionError(f"unexpected relation prompt over {labels}")
            return "\n".join(lines)

        if task == "predicate-description":
            predicates = []
            for line in sections["triplets"].splitlines():
                parts = [p.strip() for p in line.split(";")]
                if len(parts) == 3 and parts[1] not in predicates:
                    predicates.append(parts[1])
            return "\n".join(f"{p} :: {PREDICATE_DESCRIPTIONS[p]}" for p in predicates)

        if task == "cluster-disambiguation":
            entries = parse_numbered(sections["items"])
            labels = [e.split(" | ")[0] for e in entries]
            groups = partition_items(labels)
            if not groups:
                return "none"
            return "\n".join(
                "; ".join(f"({i}) {labels[i - 1]}" for i in group) for group in groups
            )

        if task == "concept-shrinkage":
            labels = tuple(sorted(parse_numbered(sections["labels"])))
            return CANONICAL_LABELS[labels]

        if task == "hypernym-generation":
            labels = parse_numbered(sections["types"])
            by_parent: dict[str, list[int]] = {}
            for index, label in enumerate(labels, 1):
                by_parent.setdefault(HYPERNYMS[label.casefold()], []).append(index)
            return "\n".join(
                f"{parent} | is type of | "
                + "; ".join(f"({i}) {labels[i - 1]}" for i in indexes)
                for parent, indexes in sorted(by_parent.items())
            )

        raise AssertionError(f"unhandled task: {task}")

    return responder


def build_config(out_dir: Path, fixture_file: str = "") -> PipelineConfig:
    config = PipelineConfig()
    config.input_dir = FIXTURES / "corpus"
    config.out_dir = out_dir
    config.backend = BackendConfig(kind="fixture", fixture_file=fixture_file)
    return config


def check(condition: bool, message: str) -> None:
    if not condition:
        raise SystemExit(f"golden corpus drifted: {message}")


def verify(pipeline: Pipeline) -> None:
    candidate = document_to_graph(pipeline.load_payload("extract"))
    resolved = document_to_graph(pipeline.load_payload("resolve"))
    schema = pipeline.load_payload("schema")
    report = json.loads(
        (pipeline.config.out_dir / "stages" / "resolution_report.json").read_text()
    )

    check(len(candidate.entities) == 12, f"candidate entities {len(candidate.entities)}")
    check(len(candidate.triplets) == 2, f"candidate triplets {len(candidate.triplets)}")
    check(len(resolved.entities) == 7, f"resolved entities {len(resolved.entities)}")
    check(len(resolved.triplets) == 2, f"resolved triplets {len(resolved.triplets)}")

    labels = {
        (
            resolved.entities[t.subject].label,
            resolved.predicates[t.predicate].label,
            resolved.entities[t.object].label,
        )
        for t in resolved.triplets
    }
    check(("Cagliari", "has landmark", "Bastione di Santa Croce") in labels, f"{labels}")

    vehicle_groups = [
        g
        for g in report["entities"]["groups"]
        if g["canonical_label"] in {"car", "motorbike", "bike"}
    ]
    check(len(vehicle_groups) == 3, f"vehicle groups {len(vehicle_groups)}")
    check(
        sum(len(g["members"]) for g in vehicle_groups) == 7,
        "vehicle groups do not cover the seven mentions",
    )
    check(schema["root"]["label"] == "thing", f"schema root {schema['root']}")
    check(len(schema["nodes"]) == 20, f"schema nodes {len(schema['nodes'])}")


def main() -> None:
    templates = TemplateSet.load()
    GOLDEN.mkdir(parents=True, exist_ok=True)

    with tempfile.TemporaryDirectory() as tmp:
        # pass 1: record the transcript through a real pipeline run
        recording = RecordingBackend(make_responder(templates))
        pipeline = Pipeline(build_config(Path(tmp) / "record"))
        pipeline.backend = recording
        pipeline.run()

        # extra transcript: re-resolving the resolved graph must be answerable
        resolved = document_to_graph(pipeline.load_payload("resolve"))
        resolver = Resolver(recording, templates, provider=pipeline.provider)
        resolver.resolve(resolved)

        recording.dump(FIXTURES / "golden_fixture.json")
        print(f"recorded {len(recording.responses)} scripted responses")

        # pass 2: replay from the frozen fixture and freeze the artifacts
        replay = Pipeline(
            build_config(Path(tmp) / "replay", str(FIXTURES / "golden_fixture.json"))
        )
        replay.run()
        verify(replay)
        check(
            isinstance(replay.backend, FixtureBackend),
            "replay must use the fixture backend",
        )

        stages = Path(tmp) / "replay" / "stages"
        for name in (
            "ingest.json",
            "extract.json",
            "resolve.json",
            "resolution_report.json",
            "schema.json",
            "schema.nt",
            "metrics.json",
        ):
            shutil.copyfile(stages / name, GOLDEN / name)
        print(f"froze golden artifacts in {GOLDEN}")


if __name__ == "__main__":
    main()
