from __future__ import annotations

import pytest

from clinassert import Annotation, Chunk, Document, ParseError
from clinassert.corpus import (
    read_annotations,
    read_chunks,
    read_documents,
    write_annotations,
    write_chunks,
    write_documents,
)


def test_documents_roundtrip(tmp_path):
    docs = [Document("a", "first text"), Document("b", "second text")]
    path = tmp_path / "docs.jsonl"
    write_documents(path, docs)
    assert read_documents(path) == docs


def test_duplicate_doc_id(tmp_path):
    path = tmp_path / "docs.jsonl"
    path.write_text('{"doc_id": "a", "text": "x"}\n{"doc_id": "a", "text": "y"}\n')
    with pytest.raises(ParseError) as exc:
        read_documents(path)
    assert exc.value.line == 2


def test_bad_json_reports_line(tmp_path):
    path = tmp_path / "docs.jsonl"
    path.write_text('{"doc_id": "a", "text": "x"}\nnot-json\n')
    with pytest.raises(ParseError) as exc:
        read_documents(path)
    assert exc.value.line == 2


def test_missing_field(tmp_path):
    path = tmp_path / "chunks.jsonl"
    path.write_text('{"doc_id": "a", "text": "x", "begin": 0}\n')
    with pytest.raises(ParseError, match="'end'"):
        read_chunks(path)


def test_chunks_roundtrip(tmp_path):
    chunks = [
        Chunk("a", "pain", 3, 7, label="absent"),
        Chunk("a", "fever", 10, 15, token_begin=2, token_end=2),
    ]
    path = tmp_path / "chunks.jsonl"
    write_chunks(path, chunks)
    assert read_chunks(path) == chunks


def test_require_label(tmp_path):
    path = tmp_path / "chunks.jsonl"
    path.write_text('{"doc_id": "a", "text": "x", "begin": 0, "end": 1}\n')
    with pytest.raises(ParseError, match="label"):
        read_chunks(path, require_label=True)


def test_annotations_roundtrip(tmp_path):
    anns = [
        Annotation(Chunk("a", "pain", 3, 7), "absent", 0.9, "contextual"),
        Annotation(Chunk("b", "fever", 0, 5, token_begin=0, token_end=0), "present", 1.0, "negex"),
    ]
    path = tmp_path / "anns.jsonl"
    write_annotations(path, anns)
    assert read_annotations(path) == anns


def test_annotation_defaults(tmp_path):
    path = tmp_path / "azure.jsonl"
    path.write_text('{"doc_id": "a", "text": "x", "begin": 0, "end": 1, "label": "Negative"}\n')
    (ann,) = read_annotations(path)
    assert ann.confidence == 1.0
    assert ann.source == "azure"


def test_annotation_bad_confidence(tmp_path):
    path = tmp_path / "anns.jsonl"
    path.write_text(
        '{"doc_id": "a", "text": "x", "begin": 0, "end": 1, "label": "absent", '
        '"confidence": 1.5, "source": "s"}\n'
    )
    with pytest.raises(ParseError, match="confidence"):
        read_annotations(path)


def test_unknown_keys_ignored(tmp_path):
    path = tmp_path / "anns.jsonl"
    path.write_text(
        '{"doc_id": "a", "text": "x", "begin": 0, "end": 1, "label": "absent", '
        '"source": "s", "extra": {"nested": true}}\n'
    )
    (ann,) = read_annotations(path)
    assert ann.label == "absent"


def test_output_is_lf_terminated(tmp_path):
    path = tmp_path / "anns.jsonl"
    write_annotations(path, [Annotation(Chunk("a", "x", 0, 1), "present", 1.0, "s")])
    raw = path.read_bytes()
    assert raw.endswith(b"\n")
    assert b"\r" not in raw
