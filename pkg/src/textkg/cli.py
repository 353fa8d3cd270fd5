"""Command line entry point.

Exit codes: 0 success, 1 usage error, 2 stage failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import TextKGError
from .pipeline import (
    STAGE_ORDER,
    Pipeline,
    PipelineConfig,
    ingest,
    load_annotation_store,
)
from .evaluation import compute_report
from .serialize import document_to_graph


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="textkg", description="Text-to-knowledge-graph pipeline")
    parser.add_argument("--config", help="INI config file")
    parser.add_argument("--input-dir", help="directory of UTF-8 .txt documents")
    parser.add_argument("--out-dir", help="artifact output directory")
    parser.add_argument("--backend", choices=["remote", "fixture"], help="LLM backend kind")
    parser.add_argument("--fixture-file", help="scripted-response fixture file")
    parser.add_argument("-v", "--verbose", action="store_true")

    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("ingest", help="scan the input directory into a manifest")

    run = commands.add_parser("run", help="run pipeline stages")
    run.add_argument("--stages", nargs="+", choices=list(STAGE_ORDER), help="stages to build")

    commands.add_parser("evaluate", help="compute metrics from the annotation file")

    serve = commands.add_parser("serve", help="serve the review UI and API")
    serve.add_argument("--port", type=int, default=8749)
    serve.add_argument("--ui-dir", help="static frontend directory")

    export = commands.add_parser("export", help="export the graph")
    export.add_argument("--format", choices=["ntriples", "doc"], default="doc")
    export.add_argument("--stage", choices=["extract", "resolve"], default=None)
    export.add_argument("--output", help="write to a file instead of stdout")
    return parser


def _load_config(args: argparse.Namespace) -> PipelineConfig:
    config = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    if args.input_dir:
        config.input_dir = Path(args.input_dir)
    if args.out_dir:
        config.out_dir = Path(args.out_dir)
    if args.backend:
        kind = "remote-chat" if args.backend == "remote" else "fixture"
        config.backend = config.backend.__class__(
            **{**config.backend.__dict__, "kind": kind}
        )
    if args.fixture_file:
        config.backend = config.backend.__class__(
            **{**config.backend.__dict__, "fixture_file": args.fixture_file}
        )
    return config


def _run_log_handler(config: PipelineConfig) -> logging.Handler:
    config.out_dir.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(config.out_dir / "run.log", encoding="utf-8")
    handler.setLevel(logging.INFO)
    handler.setFormatter(logging.Formatter("%(asctime)s %(name)s %(levelname)s %(message)s"))
    return handler


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)

    try:
        config = _load_config(args)

        if args.command == "ingest":
            manifest = ingest(config.input_dir)
            print(f"{len(manifest['documents'])} documents, {len(manifest['skipped'])} skipped")
            for doc in manifest["documents"]:
                print(f"  {doc['id']}: {doc['token_count']} tokens")
            return 0

        if args.command == "run":
            logging.getLogger("textkg").addHandler(_run_log_handler(config))
            pipeline = Pipeline(config)
            artifacts = pipeline.run(args.stages)
            for stage, artifact in artifacts.items():
                print(f"{stage}: {artifact.payload_path} ({artifact.content_digest[:12]})")
            print(f"model calls: {pipeline.backend.calls_made}")
            return 0

        if args.command == "evaluate":
            pipeline = Pipeline(config)
            graph = document_to_graph(pipeline.load_payload("extract"))
            annotations, ground_truth = load_annotation_store(config.annotations_path())
            report = compute_report(graph, annotations, ground_truth)
            print(report.to_table())
            pending = sum(report.pending.values())
            print(f"pending verdicts: {pending} (completeness {100 * report.completeness:.1f}%)")
            (config.out_dir / "stages").mkdir(parents=True, exist_ok=True)
            (config.out_dir / "stages" / "metrics.json").write_text(report.to_json())
            return 0

        if args.command == "serve":
            from .server import serve as run_server

            static = Path(args.ui_dir) if args.ui_dir else _default_ui_dir()
            run_server(config, args.port, static)
            return 0

        if args.command == "export":
            pipeline = Pipeline(config)
            data = pipeline.export(args.format, args.stage)
            if args.output:
                Path(args.output).write_bytes(data)
            else:
                sys.stdout.write(data.decode("utf-8"))
            return 0

        return 1
    except TextKGError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _default_ui_dir() -> Path | None:
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist" / "static"
    return candidate if candidate.is_dir() else None


if __name__ == "__main__":
    sys.exit(main())
