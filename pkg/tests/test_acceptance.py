"""Acceptance suite: one test per release criterion, at pinned tolerances.

Each test carries the `acceptance` marker; the conftest terminal hook prints
one PASS/FAIL line per criterion at the end of the run.
"""

import json
import random
import socket
import string
import time
from contextlib import contextmanager

import numpy as np
import pytest

from textkg.authoring import RecordingBackend, parse_numbered, task_of, user_sections
from textkg.chunking import SplitConfig, reassemble, split
from textkg.evaluation import Annotation, GroundTruth, compute_report, f1_score
from textkg.gateway import BackendConfig
from textkg.model import EntityRecord, KnowledgeGraph, PredicateRecord, ProvenanceRef
from textkg.pipeline import Pipeline, PipelineConfig
from textkg.resolution import build_clusters
from textkg.schema import SchemaNode, infer_schema
from textkg.serialize import document_to_graph
from textkg.similarity import (
    SimilarityWeights,
    Thresholds,
    entity_pair_admitted,
    entity_score,
    label_similarity,
    levenshtein,
    predicate_score,
)
from textkg.validation import CONSISTENCY_VIOLATION, GRAMMARS, PATTERN_MISMATCH, validate_response

from conftest import FIXTURES_DIR, GOLDEN_DIR

CORPUS = FIXTURES_DIR / "corpus"
FIXTURE_FILE = FIXTURES_DIR / "golden_fixture.json"

WEIGHTS = SimilarityWeights()
THRESHOLDS = Thresholds()


def oracle_levenshtein(a: str, b: str) -> int:
    m, n = len(a), len(b)
    table = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        table[i][0] = i
    for j in range(n + 1):
        table[0][j] = j
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            table[i][j] = min(
                table[i - 1][j] + 1, table[i][j - 1] + 1, table[i - 1][j - 1] + cost
            )
    return table[m][n]


def golden_config(out_dir) -> PipelineConfig:
    config = PipelineConfig()
    config.input_dir = CORPUS
    config.out_dir = out_dir
    config.backend = BackendConfig(kind="fixture", fixture_file=str(FIXTURE_FILE))
    return config


@contextmanager
def no_network():
    """Any attempt to open a socket fails the enclosed block."""

    def forbidden(*args, **kwargs):
        raise AssertionError("network access attempted during an offline run")

    original_socket, original_connect = socket.socket, socket.create_connection
    socket.socket, socket.create_connection = forbidden, forbidden
    try:
        yield
    finally:
        socket.socket, socket.create_connection = original_socket, original_connect


@pytest.mark.acceptance("metric arithmetic vs reported scores")
def test_metric_arithmetic():
    started = time.monotonic()

    assert f1_score(0.9882, 0.9318) == pytest.approx(0.9592, abs=1e-4)

    graph = KnowledgeGraph()
    ids = []
    for i in range(761):
        ids.append(
            graph.add_entity(
                EntityRecord(
                    label=f"Entity {i:04d}",
                    description="a described thing",
                    provenance=[ProvenanceRef("doc", 0)],
                )
            )
        )
    annotations = [
        Annotation("entity", eid, "correct" if n < 752 else "incorrect", assessor="a1")
        for n, eid in enumerate(sorted(ids))
    ]
    ground_truth = GroundTruth()
    ground_truth.add("doc", "Place", [f"missed {i}" for i in range(55)])
    report = compute_report(graph, annotations, ground_truth)
    assert (report.entity_tp, report.entity_fp, report.entity_fn) == (752, 9, 55)
    values = report.percentages()
    assert values["entity_precision"] == pytest.approx(98.82, abs=0.01)
    assert values["entity_recall"] == pytest.approx(93.18, abs=0.01)
    assert values["entity_f1"] == pytest.approx(95.92, abs=0.01)

    assert time.monotonic() - started < 1.0


@pytest.mark.acceptance("similarity scores match independent oracles")
def test_similarity_oracle():
    started = time.monotonic()
    rng = random.Random(271828)
    alphabet = string.ascii_lowercase + " -'"

    for _ in range(1000):
        a = "".join(rng.choices(alphabet, k=rng.randint(0, 40)))
        b = "".join(rng.choices(alphabet, k=rng.randint(0, 40)))
        assert levenshtein(a, b) == oracle_levenshtein(a, b)
        folded_a, folded_b = a.strip().casefold(), b.strip().casefold()
        longest = max(len(folded_a), len(folded_b))
        expected = 1.0 if longest == 0 else 1.0 - oracle_levenshtein(folded_a, folded_b) / longest
        assert label_similarity(a, b) == pytest.approx(expected, abs=1e-12)

    class VectorProvider:
        dimension = 4

        def __init__(self):
            self.table = {}

        def embed(self, text):
            return self.table[text]

    provider = VectorProvider()
    for n in range(200):
        i = EntityRecord(label="".join(rng.choices(alphabet, k=8)), description=f"di{n}")
        j = EntityRecord(label="".join(rng.choices(alphabet, k=8)), description=f"dj{n}")
        vi = np.array([rng.uniform(-1, 1) for _ in range(4)])
        vj = np.array([rng.uniform(-1, 1) for _ in range(4)])
        provider.table = {f"di{n}": vi, f"dj{n}": vj}
        cos = float(np.dot(vi, vj) / (np.linalg.norm(vi) * np.linalg.norm(vj)))
        description_term = max(0.0, cos)
        label_term = label_similarity(i.label, j.label)
        expected_entity = 0.35 * label_term + 0.65 * description_term
        expected_predicate = 0.25 * label_term + 0.75 * description_term
        assert entity_score(i, j, WEIGHTS, provider) == pytest.approx(
            expected_entity, abs=1e-12
        )
        pi = PredicateRecord(label=i.label, description=f"di{n}")
        pj = PredicateRecord(label=j.label, description=f"dj{n}")
        assert predicate_score(pi, pj, WEIGHTS, provider) == pytest.approx(
            expected_predicate, abs=1e-12
        )

    assert time.monotonic() - started < 5.0


@pytest.mark.acceptance("threshold boundary truth table")
def test_threshold_boundaries():
    table = {
        (0.69, 0.25): False,
        (0.69, 0.26): False,
        (0.70, 0.25): False,
        (0.70, 0.26): False,
        (0.71, 0.25): False,
        (0.71, 0.26): True,
        (0.80, 0.25): False,
        (0.80, 0.26): True,
        (0.90, 0.25): True,
        (0.90, 0.26): True,
        (0.91, 0.25): True,
        (0.91, 0.26): True,
    }
    for (score, type_score), expected in table.items():
        assert entity_pair_admitted(score, type_score, THRESHOLDS) is expected, (
            score,
            type_score,
        )


@pytest.mark.acceptance("clustering equals brute-force closure")
def test_clustering_oracle():
    started = time.monotonic()
    rng = random.Random(1618)

    def naive_closure(items, pairs):
        neighbors = {item: {item} for item in items}
        for a, b in pairs:
            neighbors[a].add(b)
            neighbors[b].add(a)
        components, remaining = [], set(items)
        while remaining:
            component = {min(remaining)}
            changed = True
            while changed:
                changed = False
                for item in list(component):
                    fresh = neighbors[item] - component
                    if fresh:
                        component.update(fresh)
                        changed = True
            components.append(tuple(sorted(component)))
            remaining -= component
        return sorted(components)

    for _ in range(100):
        n = rng.randint(1, 200)
        items = [f"n{i:03d}" for i in range(n)]
        pairs = set()
        for _ in range(rng.randint(0, 3 * n)):
            a, b = rng.sample(items, 2)
            pairs.add((a, b))
        clusters = build_clusters(items, lambda x, y: (x, y) in pairs or (y, x) in pairs)
        assert sorted(c.member_ids for c in clusters) == naive_closure(items, pairs)

    assert time.monotonic() - started < 10.0


@pytest.mark.acceptance("chunker coverage, offsets, and window bounds")
def test_chunker_properties():
    chunks = split(" ".join(f"tok{i}" for i in range(1000)), SplitConfig(400, 100))
    assert [(c.token_start, c.token_end) for c in chunks] == [
        (0, 400),
        (300, 700),
        (600, 1000),
    ]

    rng = random.Random(6174)
    separators = [" ", "  ", "\n", "\t", " \n"]
    for _ in range(500):
        n_tokens = rng.randint(1, 150)
        text = "".join(
            f"w{i}" * rng.randint(1, 2) + rng.choice(separators) for i in range(n_tokens)
        )
        if rng.random() < 0.25:
            text = rng.choice(separators) + text
        window = rng.randint(1, 50)
        overlap = rng.randint(0, window - 1)
        chunks = split(text, SplitConfig(window, overlap))
        assert reassemble(chunks) == text
        starts = [c.start_offset for c in chunks]
        ends = [c.end_offset for c in chunks]
        assert starts == sorted(set(starts))
        assert ends == sorted(set(ends))
        assert all(c.token_count <= window for c in chunks)


@pytest.mark.acceptance("validator rejects malformed and inconsistent lines")
def test_validator_suite():
    # well-formed fixture lines parse
    entity = validate_response(
        "1. Cagliari | The capital of Sardinia | City; Tourist Destination", "entity-line"
    )
    assert entity.accepted[0].fields["types"] == ["City", "Tourist Destination"]
    relation = validate_response(
        "(1) Cagliari; has landmark; (2) Bastione di Santa Croce",
        "relation-line",
        ["Cagliari", "Bastione di Santa Croce"],
    )
    assert relation.accepted[0].fields["predicate"] == "has landmark"

    # every malformed or inconsistent example is rejected with its stated reason
    cases = [
        ("Cagliari is a city", "entity-line", None, PATTERN_MISMATCH),
        ("2. Marina District - yes", "mention-line", ["Cagliari", "Cagliari2"], CONSISTENCY_VIOLATION),
        ("3. Cagliari - yes", "mention-line", ["A", "B", "Marina District"], CONSISTENCY_VIOLATION),
        (
            "(1) Cagliari; has landmark; (3) Ghost",
            "relation-line",
            ["Cagliari", "Bastione di Santa Croce"],
            CONSISTENCY_VIOLATION,
        ),
        ("no delimiters here", "relation-line", ["A", "B"], PATTERN_MISMATCH),
        ("(9) tram", "group-line", ["car", "automobile"], CONSISTENCY_VIOLATION),
    ]
    for line, grammar, reference, reason in cases:
        report = validate_response(line, grammar, reference)
        assert report.rejected == [(line, reason)], (line, grammar)

    # exhaustive classification under fuzzing
    rng = random.Random(8128)
    alphabet = string.ascii_letters + string.digits + " .|;()-:"
    for grammar in GRAMMARS:
        for _ in range(60):
            text = "\n".join(
                "".join(rng.choices(alphabet, k=rng.randint(0, 50)))
                for _ in range(rng.randint(0, 10))
            )
            report = validate_response(text, grammar, ["alpha", "beta"])
            non_blank = [l for l in text.splitlines() if l.strip()]
            assert report.total_lines == len(non_blank)


@pytest.mark.acceptance("golden end-to-end run is byte-stable and offline")
def test_golden_end_to_end(tmp_path):
    started = time.monotonic()
    artifact_names = ("extract.json", "resolve.json", "schema.json")
    runs = []
    with no_network():
        for n in range(5):
            out = tmp_path / f"run{n}"
            pipeline = Pipeline(golden_config(out))
            pipeline.run()
            runs.append(
                {name: (out / "stages" / name).read_bytes() for name in artifact_names}
            )
    for name in artifact_names:
        assert all(run[name] == runs[0][name] for run in runs), name
        assert runs[0][name] == (GOLDEN_DIR / name).read_bytes(), name

    resolved = document_to_graph(json.loads(runs[0]["resolve.json"]))
    spo = {
        (
            resolved.entities[t.subject].label,
            resolved.predicates[t.predicate].label,
            resolved.entities[t.object].label,
        )
        for t in resolved.triplets
    }
    assert ("Cagliari", "has landmark", "Bastione di Santa Croce") in spo

    report = json.loads((tmp_path / "run0" / "stages" / "resolution_report.json").read_text())
    vehicle_cluster = max(report["entities"]["clusters"], key=len)
    assert len(vehicle_cluster) == 7
    vehicle_groups = [
        g for g in report["entities"]["groups"] if set(g["members"]) <= set(vehicle_cluster)
    ]
    assert len(vehicle_groups) == 3
    assert sorted(g["canonical_label"] for g in vehicle_groups) == ["bike", "car", "motorbike"]

    assert time.monotonic() - started < 30.0


@pytest.mark.acceptance("schema invariants on the food-types fixture")
def test_schema_invariants(templates):
    parents = {
        "legumes": "vegetables",
        "green vegetables": "vegetables",
        "pork": "meat",
        "poultry": "meat",
        "fish": "seafood",
        "crustacean": "seafood",
        "vegetables": "food",
        "meat": "food",
        "seafood": "food",
    }

    def responder(request):
        assert task_of(request, templates) == "hypernym-generation"
        labels = parse_numbered(user_sections(request)["types"])
        by_parent = {}
        for index, label in enumerate(labels, 1):
            by_parent.setdefault(parents[label.casefold()], []).append(index)
        return "\n".join(
            f"{parent} | is type of | " + "; ".join(f"({i}) {labels[i - 1]}" for i in indexes)
            for parent, indexes in sorted(by_parent.items())
        )

    food_types = ["crustacean", "fish", "green vegetables", "legumes", "pork", "poultry"]
    schema = infer_schema([food_types], RecordingBackend(responder), templates)
    schema.validate()  # acyclicity, level discipline, single root, totality
    edges = {(e.child.label, e.parent.label) for e in schema.edges}
    assert {("legumes", "vegetables"), ("green vegetables", "vegetables")} <= edges
    assert {("pork", "meat"), ("poultry", "meat")} <= edges
    assert {("fish", "seafood"), ("crustacean", "seafood")} <= edges
    assert schema.root == SchemaNode("food", 2)

    # per-level reachability of the root from every leaf
    for node in schema.nodes:
        current = {node}
        while schema.root not in current:
            current = {e.parent for e in schema.edges if e.child in current}
            assert current, f"{node} cannot reach the root"

    # guard trip: oscillating hypernyms get a synthetic root
    oscillating = {"a": "b", "b": "a"}

    def flip(request):
        labels = parse_numbered(user_sections(request)["types"])
        return "\n".join(
            f"{oscillating[label.casefold()]} | is type of | ({i}) {label}"
            for i, label in enumerate(labels, 1)
        )

    guarded = infer_schema([["a"], ["b"]], RecordingBackend(flip), templates, max_levels=4)
    guarded.validate()
    assert guarded.root is not None and guarded.root.label == "entity"
    assert guarded.levels <= 5


@pytest.mark.acceptance("stage cache: rerun makes zero model calls")
def test_cache_contract(tmp_path):
    out = tmp_path / "out"
    warm = Pipeline(golden_config(out))
    warm.run()
    assert warm.backend.calls_made > 0
    cold = Pipeline(golden_config(out))
    cold.run()
    assert cold.backend.calls_made == 0
