"""Command-line surface: annotate, merge, evaluate, bench.

Exit codes are a stable contract: 0 success, 1 data/config error, 2 usage
error. Every output file is accompanied by a ``<output>.manifest.json``
recording the command, tool and schema versions, a timestamp, and SHA-256
hashes of all inputs, configs, and outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from functools import partial
from pathlib import Path

from clinassert import __version__, SCHEMA_VERSION
from clinassert import resources
from clinassert.contextual import contextual_annotate, load_rules
from clinassert.corpus import (
    iter_chunks,
    read_annotations,
    read_chunks,
    read_documents,
    write_annotations,
)
from clinassert.errors import AlignmentError, ClinassertError, ParseError
from clinassert.evaluation import (
    UnmappedPolicy,
    bench,
    load_label_map,
    map_labels,
    match_spans,
    score,
)
from clinassert.merger import load_pipeline, run_pipeline
from clinassert.negex import load_negex_cues, negex_annotate
from clinassert.text import align_chunk, split_sentences, tokenize
from clinassert.types import ABSENT, CANONICAL_LABELS


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def _write_manifest(out_path, command: str, inputs, configs, outputs) -> None:
    manifest = {
        "command": command,
        "tool_version": __version__,
        "schema_version": SCHEMA_VERSION,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "inputs": {str(p): _sha256(p) for p in inputs},
        "configs": {str(p): _sha256(p) for p in configs},
        "outputs": {str(p): _sha256(p) for p in outputs},
    }
    manifest_path = Path(str(out_path) + ".manifest.json")
    manifest_path.write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _check_exists(*paths) -> None:
    for path in paths:
        if path is not None and not Path(path).exists():
            raise ParseError("file not found", path=path)


def _annotate_doc(payload, engine: str, config, chunks_path=None):
    doc, chunk_rows = payload
    tokens = tokenize(doc)
    sentences = split_sentences(doc, tokens)
    aligned = []
    for line_no, chunk in chunk_rows:
        try:
            aligned.append(align_chunk(doc, tokens, chunk))
        except AlignmentError as exc:
            raise AlignmentError(f"{chunks_path}:{line_no}: {exc}") from exc
    if engine == "negex":
        return negex_annotate(doc, sentences, tokens, aligned, config)
    return contextual_annotate(doc, sentences, tokens, aligned, config)


def _load_engine(engine: str, rule_paths):
    if engine == "negex":
        paths = rule_paths or [resources.negex_cues_path()]
        if len(paths) > 1:
            raise ParseError("negex takes a single cue file", path=paths[1])
        _check_exists(*paths)
        return load_negex_cues(paths[0]), list(paths)
    paths = rule_paths or resources.contextual_rules_paths()
    if not paths:
        raise ParseError("no contextual rule files found", path=resources.data_dir())
    _check_exists(*paths)
    return load_rules(paths), list(paths)


def _group_rows_by_doc(docs, chunks_path):
    grouped: dict[str, list[tuple[int, object]]] = {doc.doc_id: [] for doc in docs}
    for line_no, chunk in iter_chunks(chunks_path):
        if chunk.doc_id not in grouped:
            raise ParseError(f"unknown doc_id {chunk.doc_id!r}", path=chunks_path, line=line_no)
        grouped[chunk.doc_id].append((line_no, chunk))
    return grouped


def cmd_annotate(args) -> int:
    _check_exists(args.corpus, args.chunks)
    config, config_paths = _load_engine(args.engine, args.rules)
    docs = read_documents(args.corpus)
    grouped = _group_rows_by_doc(docs, args.chunks)
    payloads = [(doc, grouped[doc.doc_id]) for doc in docs if grouped[doc.doc_id]]
    worker = partial(_annotate_doc, engine=args.engine, config=config, chunks_path=args.chunks)
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            per_doc = list(pool.map(worker, payloads))
    else:
        per_doc = [worker(p) for p in payloads]
    annotations = [ann for doc_anns in per_doc for ann in doc_anns]
    if args.emit_absent_only:
        annotations = [ann for ann in annotations if ann.label == ABSENT]
    write_annotations(args.out, annotations)
    _write_manifest(
        args.out, "annotate", [args.corpus, args.chunks], config_paths, [args.out]
    )
    return 0


def cmd_merge(args) -> int:
    _check_exists(args.pipeline)
    pipeline = load_pipeline(args.pipeline)
    streams = {}
    stream_paths = []
    for name, path in args.stream:
        _check_exists(path)
        streams[name] = read_annotations(path)
        stream_paths.append(path)
    referenced = {
        inp
        for stage in pipeline.stages
        for inp in stage.config.inputs
        if inp not in {s.name for s in pipeline.stages}
    }
    for extra in sorted(set(streams) - referenced):
        print(f"warning: stream {extra!r} is not referenced by the pipeline", file=sys.stderr)
    merged = run_pipeline(streams, pipeline)
    write_annotations(args.out, merged)
    _write_manifest(args.out, "merge", stream_paths, [args.pipeline], [args.out])
    return 0


def cmd_evaluate(args) -> int:
    _check_exists(args.gold, args.pred, args.label_map)
    gold = read_chunks(args.gold, require_label=True)
    pred = read_annotations(args.pred)
    config_paths = []
    if args.label_map:
        label_map = load_label_map(args.label_map, unmapped_policy=UnmappedPolicy(args.unmapped))
        pred = map_labels(pred, label_map)
        config_paths.append(args.label_map)
    results = match_spans(gold, pred)
    if args.all_classes:
        classes = sorted(CANONICAL_LABELS)
    elif args.classes:
        classes = [c.strip() for c in args.classes.split(",") if c.strip()]
    else:
        classes = sorted({ann.label for ann in pred})
    report = score(
        results,
        classes,
        include_unmatched_as_miss=args.strict_miss,
        predicted_rows=len(pred),
    )
    print(report.format_table())
    if args.report:
        Path(args.report).write_text(
            json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        _write_manifest(
            args.report, "evaluate", [args.gold, args.pred], config_paths, [args.report]
        )
    return 0


def cmd_bench(args) -> int:
    _check_exists(args.corpus, args.chunks)
    config, _ = _load_engine(args.engine, args.rules)
    docs = read_documents(args.corpus)
    grouped = _group_rows_by_doc(docs, args.chunks)
    payloads = [(doc, grouped[doc.doc_id]) for doc in docs if grouped[doc.doc_id]]
    total_chunks = sum(len(rows) for _, rows in payloads)
    if total_chunks == 0:
        raise ParseError("empty corpus: no chunks to annotate", path=args.chunks)
    worker = partial(_annotate_doc, engine=args.engine, config=config, chunks_path=args.chunks)

    def runner(items) -> int:
        for item in items:
            worker(item)
        return total_chunks

    stats = bench(runner, payloads, args.reps)
    print(
        f"{args.engine}: {stats.seconds_per_100_mean:.3f} s per 100 rows "
        f"(std {stats.seconds_per_100_std:.3f}, n={stats.repetitions}, "
        f"rows={stats.rows}) on {stats.hardware}"
    )
    return 0


def _stream_arg(value: str) -> tuple[str, str]:
    name, sep, path = value.partition("=")
    if not sep or not name or not path:
        raise argparse.ArgumentTypeError(f"expected NAME=PATH, got {value!r}")
    return name, path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clinassert",
        description="Assertion status detection for clinical text.",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"clinassert {__version__} (schema {SCHEMA_VERSION})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_annotate = sub.add_parser("annotate", help="run a rule engine over a corpus")
    p_annotate.add_argument("--engine", choices=["negex", "contextual"], required=True)
    p_annotate.add_argument(
        "--rules",
        action="append",
        default=None,
        help="cue/rule file; repeatable for contextual (default: bundled files)",
    )
    p_annotate.add_argument("--corpus", required=True, help="documents JSONL")
    p_annotate.add_argument("--chunks", required=True, help="chunks JSONL")
    p_annotate.add_argument("--out", required=True, help="output annotations JSONL")
    p_annotate.add_argument(
        "--emit-absent-only",
        action="store_true",
        help="write only rows labeled absent",
    )
    p_annotate.add_argument("--workers", type=int, default=1, help="per-document parallelism")
    p_annotate.set_defaults(func=cmd_annotate)

    p_merge = sub.add_parser("merge", help="run a merger pipeline over annotation streams")
    p_merge.add_argument("--pipeline", required=True, help="pipeline config JSON")
    p_merge.add_argument(
        "--stream",
        action="append",
        type=_stream_arg,
        required=True,
        metavar="NAME=PATH",
        help="named annotation stream; repeatable",
    )
    p_merge.add_argument("--out", required=True)
    p_merge.set_defaults(func=cmd_merge)

    p_eval = sub.add_parser("evaluate", help="score predictions against gold chunks")
    p_eval.add_argument("--gold", required=True, help="gold chunks JSONL (with labels)")
    p_eval.add_argument("--pred", required=True, help="predicted annotations JSONL")
    p_eval.add_argument("--label-map", default=None, help="raw-to-canonical label map JSON")
    p_eval.add_argument(
        "--unmapped", choices=["drop", "error"], default="drop",
        help="policy for raw labels missing from the map",
    )
    p_eval.add_argument("--classes", default=None, help="comma-separated class list")
    p_eval.add_argument(
        "--all-classes", action="store_true", help="score all six canonical classes"
    )
    p_eval.add_argument(
        "--strict-miss",
        action="store_true",
        help="count unmatched gold rows as false negatives",
    )
    p_eval.add_argument("--report", default=None, help="write machine-readable JSON report")
    p_eval.set_defaults(func=cmd_evaluate)

    p_bench = sub.add_parser("bench", help="measure annotation latency per 100 rows")
    p_bench.add_argument("--engine", choices=["negex", "contextual"], required=True)
    p_bench.add_argument("--rules", action="append", default=None)
    p_bench.add_argument("--corpus", required=True)
    p_bench.add_argument("--chunks", required=True)
    p_bench.add_argument("--reps", type=int, default=3)
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "bench" and args.reps < 3:
        parser.error("--reps must be >= 3")
    if args.command == "annotate" and args.workers < 1:
        parser.error("--workers must be >= 1")
    try:
        return args.func(args)
    except ClinassertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
