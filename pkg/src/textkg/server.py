"""Embedded HTTP API serving the review workflow and its static frontend.

All payloads are JSON. Annotation writes are serialized under one lock and
persisted atomically; metrics are recomputed from the stored annotations on
every request, so the API is always the single source of metric truth.
"""

from __future__ import annotations

import json
import logging
import threading
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import urlparse

from .chunking import split
from .errors import RecordValidationError, StageError
from .evaluation import (
    KIND_ENTITY,
    KIND_ENTITY_TYPE,
    KIND_TRIPLET,
    Annotation,
    compute_report,
    qualifying_types,
)
from .model import KnowledgeGraph
from .pipeline import Pipeline, PipelineConfig, load_annotation_store, save_annotation_store
from .serialize import document_to_graph

logger = logging.getLogger(__name__)

STATIC_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
}


class ReviewService:
    """State shared by all request handler threads."""

    def __init__(self, config: PipelineConfig, static_dir: Path | None = None):
        self.config = config
        self.pipeline = Pipeline(config)
        if self.pipeline._load_meta("extract") is None:
            raise StageError("extract artifact missing; run the extract stage first")
        self.graph: KnowledgeGraph = document_to_graph(self.pipeline.load_payload("extract"))
        self.manifest = self.pipeline.load_payload("ingest")
        self.static_dir = static_dir
        self.lock = threading.Lock()
        annotations, ground_truth = load_annotation_store(config.annotations_path())
        self.annotations = annotations
        self.ground_truth = ground_truth
        self._texts: dict[str, str] = {}

    # -- data helpers -----------------------------------------------------

    def document_text(self, document_id: str) -> str | None:
        if document_id in self._texts:
            return self._texts[document_id]
        for doc in self.manifest["documents"]:
            if doc["id"] == document_id:
                text = (self.config.input_dir / doc["file"]).read_text(encoding="utf-8")
                self._texts[document_id] = text
                return text
        return None

    def excerpt(self, document_id: str, chunk_index: int) -> str:
        text = self.document_text(document_id)
        if text is None:
            return ""
        chunks = split(text, self.config.split)
        if 0 <= chunk_index < len(chunks):
            return chunks[chunk_index].text
        return ""

    def _verdict_state(self) -> dict[str, list[dict]]:
        state: dict[str, list[dict]] = {}
        for a in self.annotations:
            state.setdefault(a.target_key, []).append(a.to_document())
        return state

    def documents_payload(self) -> list[dict]:
        payload = []
        for doc in self.manifest["documents"]:
            entity_ids = [
                e.id
                for e in self.graph.entities.values()
                if any(p.document_id == doc["id"] for p in e.provenance)
            ]
            triplet_ids = [
                t.target_id
                for t in self.graph.triplets
                if any(p.document_id == doc["id"] for p in t.provenance)
            ]
            payload.append(
                {
                    "id": doc["id"],
                    "token_count": doc["token_count"],
                    "entities": len(entity_ids),
                    "triplets": len(triplet_ids),
                }
            )
        return payload

    def components_payload(self, document_id: str) -> dict | None:
        if self.document_text(document_id) is None:
            return None
        verdicts = self._verdict_state()
        entities = []
        for e in sorted(self.graph.entities.values(), key=lambda e: e.id):
            refs = [p for p in e.provenance if p.document_id == document_id]
            if not refs:
                continue
            entities.append(
                {
                    "id": e.id,
                    "label": e.label,
                    "description": e.description,
                    "types": list(e.types),
                    "provenance": [p.to_document() for p in refs],
                    "excerpt": self.excerpt(document_id, refs[0].chunk_index),
                    "annotations": verdicts.get(f"{KIND_ENTITY}:{e.id}", []),
                    "type_annotations": {
                        t: verdicts.get(f"{KIND_ENTITY_TYPE}:{e.id}:{t}", []) for t in e.types
                    },
                }
            )
        triplets = []
        for t in sorted(self.graph.triplets, key=lambda t: t.key):
            refs = [p for p in t.provenance if p.document_id == document_id]
            if not refs:
                continue
            predicate = self.graph.predicates[t.predicate]
            triplets.append(
                {
                    "id": t.target_id,
                    "subject": self.graph.entities[t.subject].label,
                    "predicate": predicate.label,
                    "predicate_description": predicate.description,
                    "object": self.graph.entities[t.object].label,
                    "provenance": [p.to_document() for p in refs],
                    "excerpt": self.excerpt(document_id, refs[0].chunk_index),
                    "annotations": verdicts.get(f"{KIND_TRIPLET}:{t.target_id}", []),
                }
            )
        return {
            "document_id": document_id,
            "entities": entities,
            "triplets": triplets,
            "qualifying_types": qualifying_types(self.graph, document_id),
        }

    def metrics_payload(self) -> dict:
        with self.lock:
            report = compute_report(self.graph, self.annotations, self.ground_truth)
        return report.to_document()

    # -- writes ----------------------------------------------------------

    def add_annotation(self, body: dict) -> tuple[int, dict]:
        try:
            annotation = Annotation(
                target_kind=body.get("target_kind", ""),
                target_id=body.get("target_id", ""),
                verdict=body.get("verdict", ""),
                type_label=body.get("type_label"),
                inferred=body.get("inferred"),
                assessor=body.get("assessor", "anonymous"),
                timestamp=datetime.now(timezone.utc).isoformat(),
            )
        except RecordValidationError as exc:
            return 400, {"error": str(exc)}
        if not self._target_exists(annotation):
            return 404, {"error": f"unknown target: {annotation.target_key}"}
        with self.lock:
            self.annotations.append(annotation)
            save_annotation_store(
                self.config.annotations_path(), self.annotations, self.ground_truth
            )
        return 200, {"status": "ok", "target_key": annotation.target_key}

    def add_ground_truth(self, body: dict) -> tuple[int, dict]:
        document_id = body.get("document_id", "")
        type_label = body.get("type_label", "")
        labels = body.get("labels", [])
        if self.document_text(document_id) is None:
            return 404, {"error": f"unknown document: {document_id}"}
        allowed = {t.casefold() for t in qualifying_types(self.graph, document_id)}
        if type_label.casefold() not in allowed:
            return 400, {"error": f"type {type_label!r} does not qualify (needs >= 2 entities)"}
        if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
            return 400, {"error": "labels must be a list of strings"}
        with self.lock:
            self.ground_truth.add(document_id, type_label, labels)
            save_annotation_store(
                self.config.annotations_path(), self.annotations, self.ground_truth
            )
        return 200, {"status": "ok"}

    def _target_exists(self, annotation: Annotation) -> bool:
        if annotation.target_kind == KIND_ENTITY:
            return annotation.target_id in self.graph.entities
        if annotation.target_kind == KIND_ENTITY_TYPE:
            entity = self.graph.entities.get(annotation.target_id)
            return entity is not None and annotation.type_label in entity.types
        return self.graph.find_triplet(annotation.target_id) is not None


class _Handler(BaseHTTPRequestHandler):
    service: ReviewService  # assigned by make_server

    def log_message(self, format: str, *args) -> None:
        logger.debug("http: " + format, *args)

    def _send_json(self, status: int, payload) -> None:
        data = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _read_body(self) -> dict | None:
        length = int(self.headers.get("Content-Length", 0))
        try:
            return json.loads(self.rfile.read(length).decode("utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError):
            return None

    def do_GET(self) -> None:  # noqa: N802 (http.server naming)
        path = urlparse(self.path).path
        service = self.service
        if path == "/api/documents":
            self._send_json(200, service.documents_payload())
            return
        if path.startswith("/api/documents/") and path.endswith("/components"):
            document_id = path[len("/api/documents/") : -len("/components")]
            payload = service.components_payload(document_id)
            if payload is None:
                self._send_json(404, {"error": f"unknown document: {document_id}"})
            else:
                self._send_json(200, payload)
            return
        if path == "/api/graph":
            self._send_json(200, service.pipeline.load_payload("extract"))
            return
        if path == "/api/schema":
            if service.pipeline._load_meta("schema") is None:
                self._send_json(404, {"error": "schema artifact missing"})
            else:
                self._send_json(200, service.pipeline.load_payload("schema"))
            return
        if path == "/api/metrics":
            self._send_json(200, service.metrics_payload())
            return
        self._serve_static(path)

    def do_POST(self) -> None:  # noqa: N802
        path = urlparse(self.path).path
        body = self._read_body()
        if body is None:
            self._send_json(400, {"error": "request body must be JSON"})
            return
        if path == "/api/annotations":
            status, payload = self.service.add_annotation(body)
            self._send_json(status, payload)
            return
        if path == "/api/ground-truth":
            status, payload = self.service.add_ground_truth(body)
            self._send_json(status, payload)
            return
        self._send_json(404, {"error": f"unknown endpoint: {path}"})

    def _serve_static(self, path: str) -> None:
        root = self.service.static_dir
        if root is None:
            self._send_json(404, {"error": f"unknown endpoint: {path}"})
            return
        relative = path.lstrip("/") or "index.html"
        target = (root / relative).resolve()
        if not str(target).startswith(str(root.resolve())) or not target.is_file():
            self._send_json(404, {"error": f"not found: {path}"})
            return
        data = target.read_bytes()
        self.send_response(200)
        self.send_header(
            "Content-Type", STATIC_TYPES.get(target.suffix, "application/octet-stream")
        )
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)


def make_server(
    config: PipelineConfig, port: int, static_dir: Path | None = None
) -> ThreadingHTTPServer:
    service = ReviewService(config, static_dir)
    handler = type("BoundHandler", (_Handler,), {"service": service})
    try:
        return ThreadingHTTPServer(("127.0.0.1", port), handler)
    except OSError as exc:
        raise StageError(f"cannot bind port {port}: {exc}") from exc


def serve(config: PipelineConfig, port: int, static_dir: Path | None = None) -> None:
    server = make_server(config, port, static_dir)
    logger.info("review service listening on http://127.0.0.1:%d", port)
    try:
        server.serve_forever()
    finally:
        server.server_close()
