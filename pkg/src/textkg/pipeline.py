"""Pipeline orchestration: ingestion, staged runs with a content-addressed
cache, and artifact export.

Each stage's cache key digests the corpus, the effective configuration, the
fixture file, and the upstream stage key, so a rerun with nothing changed
rebuilds nothing and makes zero model calls. Payloads are written to a
temporary file and renamed before the stage's meta marker appears, so a
crash never leaves a partial artifact that looks complete.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .chunking import SplitConfig
from .errors import StageError
from .evaluation import Annotation, GroundTruth, compute_report
from .extraction import Extractor, merge_fragments
from .gateway import BackendConfig, RetryPolicy, build_backend, whitespace_token_count
from .prompts import TemplateSet
from .resolution import Resolver
from .schema import DEFAULT_MAX_LEVELS, collect_types, infer_schema
from .serialize import export_graph, graph_to_document, document_to_graph, graph_to_ntriples
from .similarity import (
    HashedTrigramEmbedder,
    RemoteEmbeddingProvider,
    SimilarityWeights,
    Thresholds,
)

logger = logging.getLogger(__name__)

STAGE_ORDER = ("ingest", "extract", "resolve", "schema", "metrics")


@dataclass
class PipelineConfig:
    input_dir: Path = Path("corpus")
    out_dir: Path = Path("out")
    backend: BackendConfig = field(default_factory=BackendConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    weights: SimilarityWeights = field(default_factory=SimilarityWeights)
    thresholds: Thresholds = field(default_factory=Thresholds)
    embedding_kind: str = "deterministic-stub"  # | "remote-endpoint"
    embedding_endpoint: str = ""
    embedding_model: str = ""
    embedding_dimension: int = 128
    max_schema_levels: int = DEFAULT_MAX_LEVELS
    cluster_prompt_cap: int = 30
    parallelism: int = 1
    annotations_file: Path | None = None

    def annotations_path(self) -> Path:
        return self.annotations_file or (self.out_dir / "annotations.json")

    def settings_digest(self) -> str:
        """Digest of every setting that influences artifact content."""
        settings = {
            "backend": {
                "kind": self.backend.kind,
                "model": self.backend.model,
                "token_limit": self.backend.token_limit,
            },
            "split": [
                self.split.window_tokens,
                self.split.overlap_tokens,
                self.split.summary_budget_tokens,
            ],
            "weights": [
                self.weights.entity_label_weight,
                self.weights.entity_description_weight,
                self.weights.predicate_label_weight,
                self.weights.predicate_description_weight,
            ],
            "thresholds": [
                self.thresholds.entity_high,
                self.thresholds.entity_low,
                self.thresholds.type_gate,
                self.thresholds.predicate_min,
            ],
            "embedding": [self.embedding_kind, self.embedding_model, self.embedding_dimension],
            "max_schema_levels": self.max_schema_levels,
            "cluster_prompt_cap": self.cluster_prompt_cap,
        }
        return hashlib.sha256(json.dumps(settings, sort_keys=True).encode()).hexdigest()

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise StageError(f"config file not found: {path}")
        config = cls()

        def get(section: str, key: str, fallback):
            if not parser.has_option(section, key):
                return fallback
            raw = parser.get(section, key)
            if isinstance(fallback, bool):
                return raw.strip().lower() in ("1", "true", "yes")
            if isinstance(fallback, int):
                return int(raw)
            if isinstance(fallback, float):
                return float(raw)
            return raw

        config.input_dir = Path(get("paths", "input_dir", str(config.input_dir)))
        config.out_dir = Path(get("paths", "out_dir", str(config.out_dir)))
        annotations = get("paths", "annotations_file", "")
        config.annotations_file = Path(annotations) if annotations else None
        config.backend = BackendConfig(
            kind=get("backend", "kind", "fixture"),
            endpoint=get("backend", "endpoint", ""),
            credential_env=get("backend", "credential_env", "TEXTKG_API_KEY"),
            model=get("backend", "model", "default"),
            token_limit=get("backend", "token_limit", 4096),
            retry=RetryPolicy(
                max_attempts=get("backend", "max_attempts", 3),
                base_backoff=get("backend", "base_backoff", 1.0),
            ),
            max_in_flight=get("backend", "max_in_flight", 1),
            fixture_file=get("backend", "fixture_file", ""),
        )
        config.split = SplitConfig(
            window_tokens=get("split", "window_tokens", 1200),
            overlap_tokens=get("split", "overlap_tokens", 200),
            summary_budget_tokens=get("split", "summary_budget_tokens", 512),
        )
        config.weights = SimilarityWeights(
            entity_label_weight=get("resolution", "entity_label_weight", 0.35),
            entity_description_weight=get("resolution", "entity_description_weight", 0.65),
            predicate_label_weight=get("resolution", "predicate_label_weight", 0.25),
            predicate_description_weight=get("resolution", "predicate_description_weight", 0.75),
        )
        config.thresholds = Thresholds(
            entity_high=get("resolution", "entity_high", 0.9),
            entity_low=get("resolution", "entity_low", 0.7),
            type_gate=get("resolution", "type_gate", 0.25),
            predicate_min=get("resolution", "predicate_min", 0.8),
        )
        config.embedding_kind = get("resolution", "embedding_provider", "deterministic-stub")
        config.embedding_endpoint = get("resolution", "embedding_endpoint", "")
        config.embedding_model = get("resolution", "embedding_model", "")
        config.embedding_dimension = get("resolution", "embedding_dimension", 128)
        config.cluster_prompt_cap = get("resolution", "cluster_prompt_cap", 30)
        config.max_schema_levels = get("schema", "max_levels", DEFAULT_MAX_LEVELS)
        config.parallelism = get("run", "parallelism", 1)
        return config


@dataclass(frozen=True)
class StageArtifact:
    stage: str
    content_digest: str
    payload_path: Path


def _sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _write_atomic(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def ingest(input_dir: Path) -> dict:
    """Scan a directory of UTF-8 text files into a corpus manifest."""
    if not input_dir.is_dir():
        raise StageError(f"input directory does not exist: {input_dir}")
    documents = []
    skipped = []
    for file in sorted(input_dir.iterdir()):
        if not file.is_file():
            continue
        data = file.read_bytes()
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            skipped.append({"file": file.name, "reason": f"not UTF-8: {exc}"})
            continue
        documents.append(
            {
                "id": file.stem,
                "file": file.name,
                "digest": _sha256_bytes(data),
                "token_count": whitespace_token_count(text),
            }
        )
    if not documents:
        raise StageError(f"no readable UTF-8 documents in {input_dir}")
    ids = [d["id"] for d in documents]
    if len(set(ids)) != len(ids):
        raise StageError("duplicate document ids (file stems must be unique)")
    return {"documents": documents, "skipped": skipped}


class Pipeline:
    def __init__(self, config: PipelineConfig):
        self.config = config
        self.templates = TemplateSet.load()
        self.backend = build_backend(config.backend)
        if config.embedding_kind == "remote-endpoint":
            self.provider = RemoteEmbeddingProvider(
                config.embedding_endpoint,
                config.embedding_model,
                config.backend.credential_env,
                config.embedding_dimension,
            )
        else:
            self.provider = HashedTrigramEmbedder(config.embedding_dimension)

    # -- digests ----------------------------------------------------------

    def corpus_digest(self) -> str:
        manifest = ingest(self.config.input_dir)
        key = json.dumps(
            [(d["id"], d["digest"]) for d in manifest["documents"]], sort_keys=True
        )
        return _sha256_bytes(key.encode())

    def fixture_digest(self) -> str:
        path = self.config.backend.fixture_file
        if path and Path(path).is_file():
            return _sha256_bytes(Path(path).read_bytes())
        return ""

    def _stage_key(self, stage: str, upstream_key: str, extra: str = "") -> str:
        material = "|".join(
            [
                stage,
                self.corpus_digest(),
                self.config.settings_digest(),
                self.fixture_digest(),
                upstream_key,
                extra,
            ]
        )
        return _sha256_bytes(material.encode())

    # -- stage storage ------------------------------------------------------

    def _stages_dir(self) -> Path:
        return self.config.out_dir / "stages"

    def _meta_path(self, stage: str) -> Path:
        return self._stages_dir() / f"{stage}.meta.json"

    def _payload_path(self, stage: str) -> Path:
        return self._stages_dir() / f"{stage}.json"

    def _load_meta(self, stage: str) -> dict | None:
        try:
            return json.loads(self._meta_path(stage).read_text(encoding="utf-8"))
        except (FileNotFoundError, json.JSONDecodeError):
            return None

    def _is_fresh(self, stage: str, key: str) -> bool:
        meta = self._load_meta(stage)
        if meta is None or meta.get("key") != key:
            return False
        payload = self._payload_path(stage)
        if not payload.is_file():
            return False
        return _sha256_bytes(payload.read_bytes()) == meta.get("payload_digest")

    def _store(self, stage: str, key: str, payload: bytes, aux: dict[str, bytes] | None = None) -> StageArtifact:
        payload_path = self._payload_path(stage)
        _write_atomic(payload_path, payload)
        for name, data in (aux or {}).items():
            _write_atomic(self._stages_dir() / name, data)
        meta = {
            "stage": stage,
            "key": key,
            "payload": payload_path.name,
            "payload_digest": _sha256_bytes(payload),
            "aux": sorted((aux or {}).keys()),
        }
        _write_atomic(self._meta_path(stage), json.dumps(meta, indent=2).encode())
        return StageArtifact(stage, meta["payload_digest"], payload_path)

    def _artifact(self, stage: str) -> StageArtifact:
        meta = self._load_meta(stage)
        if meta is None:
            raise StageError(f"stage artifact missing: {stage}")
        return StageArtifact(stage, meta["payload_digest"], self._payload_path(stage))

    def load_payload(self, stage: str) -> dict:
        return json.loads(self._payload_path(stage).read_text(encoding="utf-8"))

    # -- stage bodies ---------------------------------------------------------

    def _run_ingest(self) -> bytes:
        return (json.dumps(ingest(self.config.input_dir), indent=2, sort_keys=True) + "\n").encode()

    def _run_extract(self) -> bytes:
        manifest = self.load_payload("ingest")
        extractor = Extractor(self.backend, self.templates, self.config.split)

        def one(doc: dict):
            text = (self.config.input_dir / doc["file"]).read_text(encoding="utf-8")
            return extractor.extract_document(doc["id"], text)

        documents = manifest["documents"]
        if self.config.parallelism > 1:
            with ThreadPoolExecutor(max_workers=self.config.parallelism) as pool:
                fragments = list(pool.map(one, documents))
        else:
            fragments = [one(doc) for doc in documents]
        graph = merge_fragments(fragments)
        return export_graph(graph, "doc")

    def _run_resolve(self) -> tuple[bytes, dict[str, bytes]]:
        graph = document_to_graph(self.load_payload("extract"))
        resolver = Resolver(
            self.backend,
            self.templates,
            self.config.weights,
            self.config.thresholds,
            self.provider,
            self.config.cluster_prompt_cap,
        )
        resolved, report = resolver.resolve(graph)
        aux = {
            "resolution_report.json": (
                json.dumps(report, indent=2, sort_keys=True) + "\n"
            ).encode()
        }
        return export_graph(resolved, "doc"), aux

    def _run_schema(self) -> tuple[bytes, dict[str, bytes]]:
        resolved = document_to_graph(self.load_payload("resolve"))
        resolver = Resolver(
            self.backend,
            self.templates,
            self.config.weights,
            self.config.thresholds,
            self.provider,
            self.config.cluster_prompt_cap,
        )
        records = sorted(resolved.entities.values(), key=lambda e: e.id)
        clusters = resolver.cluster_entities(records)
        grouped = [[resolved.entities[m] for m in c.member_ids] for c in clusters]
        schema = infer_schema(
            collect_types(grouped),
            self.backend,
            self.templates,
            self.config.thresholds,
            self.config.max_schema_levels,
        )
        return schema.to_json().encode(), {"schema.nt": schema.to_ntriples().encode()}

    def _run_metrics(self) -> bytes:
        graph = document_to_graph(self.load_payload("extract"))
        annotations, ground_truth = load_annotation_store(self.config.annotations_path())
        report = compute_report(graph, annotations, ground_truth)
        return report.to_json().encode()

    def _annotations_digest(self) -> str:
        path = self.config.annotations_path()
        return _sha256_bytes(path.read_bytes()) if path.is_file() else ""

    # -- run ---------------------------------------------------------------------

    def run(self, stages: list[str] | None = None) -> dict[str, StageArtifact]:
        requested = list(stages) if stages else list(STAGE_ORDER)
        for stage in requested:
            if stage not in STAGE_ORDER:
                raise StageError(f"unknown stage: {stage}")
        last_needed = max(STAGE_ORDER.index(s) for s in requested)

        artifacts: dict[str, StageArtifact] = {}
        upstream_key = ""
        for stage in STAGE_ORDER[: last_needed + 1]:
            extra = self._annotations_digest() if stage == "metrics" else ""
            key = self._stage_key(stage, upstream_key, extra)
            if self._is_fresh(stage, key):
                logger.info("stage %s: cache hit", stage)
                artifacts[stage] = self._artifact(stage)
                upstream_key = key
                continue
            logger.info("stage %s: building", stage)
            try:
                if stage == "ingest":
                    payload, aux = self._run_ingest(), None
                elif stage == "extract":
                    payload, aux = self._run_extract(), None
                elif stage == "resolve":
                    payload, aux = self._run_resolve()
                elif stage == "schema":
                    payload, aux = self._run_schema()
                else:
                    payload, aux = self._run_metrics(), None
            except StageError:
                raise
            except Exception as exc:
                raise StageError(f"stage {stage} failed: {exc}") from exc
            artifacts[stage] = self._store(stage, key, payload, aux)
            upstream_key = key
        return artifacts

    # -- export -------------------------------------------------------------------

    def export(self, format: str, stage: str | None = None) -> bytes:
        if stage is None:
            stage = "resolve" if self._load_meta("resolve") else "extract"
        graph = document_to_graph(self.load_payload(stage))
        if format == "ntriples":
            return graph_to_ntriples(graph).encode()
        return (json.dumps(graph_to_document(graph), indent=2, sort_keys=True) + "\n").encode()


def load_annotation_store(path: Path) -> tuple[list[Annotation], GroundTruth]:
    """Read the annotation file, tolerating its absence."""
    if not path.is_file():
        return [], GroundTruth()
    doc = json.loads(path.read_text(encoding="utf-8"))
    annotations = [
        Annotation.from_document(record)
        for records in doc.get("annotations", {}).values()
        for record in records
    ]
    return annotations, GroundTruth.from_document(doc.get("ground_truth", {}))


def save_annotation_store(
    path: Path, annotations: list[Annotation], ground_truth: GroundTruth
) -> None:
    """Write the annotation file atomically, records keyed by target."""
    keyed: dict[str, list[dict]] = {}
    for annotation in annotations:
        keyed.setdefault(annotation.target_key, []).append(annotation.to_document())
    doc = {
        "version": 1,
        "annotations": {k: keyed[k] for k in sorted(keyed)},
        "ground_truth": ground_truth.to_document(),
    }
    _write_atomic(path, (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode())
