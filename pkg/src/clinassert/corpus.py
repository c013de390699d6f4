"""JSON-lines readers and writers for documents, chunks, and annotations.

One schema family, UTF-8, LF-terminated:

- documents:   {"doc_id", "text"}
- chunks/gold: {"doc_id", "text", "begin", "end"} + optional "label",
               "token_begin"/"token_end"
- annotations: chunk fields + "label", "confidence", "source"

Unknown keys are ignored so externally produced streams (cloud APIs, ML
model exports) can carry extra metadata.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Iterator

from clinassert.errors import ParseError
from clinassert.types import Annotation, Chunk, Document


def iter_jsonl(path) -> Iterator[tuple[int, dict]]:
    """Yield (line_number, object) for each non-blank line; 1-based lines."""
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON ({exc.msg})", path=path, line=line_no) from exc
            if not isinstance(obj, dict):
                raise ParseError("expected a JSON object", path=path, line=line_no)
            yield line_no, obj


def _require(obj: dict, key: str, kind, path, line_no: int):
    if key not in obj:
        raise ParseError(f"missing field {key!r}", path=path, line=line_no)
    value = obj[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ParseError(
            f"field {key!r} must be {kind.__name__}, got {type(value).__name__}",
            path=path,
            line=line_no,
        )
    return value


def read_documents(path) -> list[Document]:
    docs: list[Document] = []
    seen: dict[str, int] = {}
    for line_no, obj in iter_jsonl(path):
        doc_id = _require(obj, "doc_id", str, path, line_no)
        text = _require(obj, "text", str, path, line_no)
        if doc_id in seen:
            raise ParseError(
                f"duplicate doc_id {doc_id!r} (first seen at line {seen[doc_id]})",
                path=path,
                line=line_no,
            )
        seen[doc_id] = line_no
        try:
            docs.append(Document(doc_id=doc_id, text=text))
        except ValueError as exc:
            raise ParseError(str(exc), path=path, line=line_no) from exc
    return docs


def _chunk_from_obj(obj: dict, path, line_no: int) -> Chunk:
    doc_id = _require(obj, "doc_id", str, path, line_no)
    text = _require(obj, "text", str, path, line_no)
    begin = _require(obj, "begin", int, path, line_no)
    end = _require(obj, "end", int, path, line_no)
    token_begin = obj.get("token_begin")
    token_end = obj.get("token_end")
    label = obj.get("label")
    if label is not None and not isinstance(label, str):
        raise ParseError("field 'label' must be a string", path=path, line=line_no)
    try:
        return Chunk(
            doc_id=doc_id,
            text=text,
            begin=begin,
            end=end,
            token_begin=token_begin,
            token_end=token_end,
            label=label,
        )
    except ValueError as exc:
        raise ParseError(str(exc), path=path, line=line_no) from exc


def iter_chunks(path, require_label: bool = False) -> Iterator[tuple[int, Chunk]]:
    for line_no, obj in iter_jsonl(path):
        chunk = _chunk_from_obj(obj, path, line_no)
        if require_label and chunk.label is None:
            raise ParseError("gold row is missing a label", path=path, line=line_no)
        yield line_no, chunk


def read_chunks(path, require_label: bool = False) -> list[Chunk]:
    return [chunk for _, chunk in iter_chunks(path, require_label=require_label)]


def iter_annotations(path) -> Iterator[tuple[int, Annotation]]:
    default_source = Path(path).stem
    for line_no, obj in iter_jsonl(path):
        # The label belongs to the annotation, not to the carrier chunk.
        chunk = _chunk_from_obj({**obj, "label": None}, path, line_no)
        label = _require(obj, "label", str, path, line_no)
        confidence = obj.get("confidence", 1.0)
        if isinstance(confidence, int) and not isinstance(confidence, bool):
            confidence = float(confidence)
        if not isinstance(confidence, float):
            raise ParseError("field 'confidence' must be a number", path=path, line=line_no)
        source = obj.get("source", default_source)
        try:
            yield line_no, Annotation(chunk=chunk, label=label, confidence=confidence, source=source)
        except ValueError as exc:
            raise ParseError(str(exc), path=path, line=line_no) from exc


def read_annotations(path) -> list[Annotation]:
    return [ann for _, ann in iter_annotations(path)]


def annotation_to_obj(ann: Annotation) -> dict:
    obj: dict = {
        "doc_id": ann.chunk.doc_id,
        "text": ann.chunk.text,
        "begin": ann.chunk.begin,
        "end": ann.chunk.end,
    }
    if ann.chunk.token_begin is not None:
        obj["token_begin"] = ann.chunk.token_begin
        obj["token_end"] = ann.chunk.token_end
    obj["label"] = ann.label
    obj["confidence"] = ann.confidence
    obj["source"] = ann.source
    return obj


def write_annotations(path, annotations: Iterable[Annotation]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for ann in annotations:
            handle.write(json.dumps(annotation_to_obj(ann), ensure_ascii=False) + "\n")


def write_documents(path, docs: Iterable[Document]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for doc in docs:
            handle.write(
                json.dumps({"doc_id": doc.doc_id, "text": doc.text}, ensure_ascii=False) + "\n"
            )


def write_chunks(path, chunks: Iterable[Chunk]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for chunk in chunks:
            obj: dict = {
                "doc_id": chunk.doc_id,
                "text": chunk.text,
                "begin": chunk.begin,
                "end": chunk.end,
            }
            if chunk.token_begin is not None:
                obj["token_begin"] = chunk.token_begin
                obj["token_end"] = chunk.token_end
            if chunk.label is not None:
                obj["label"] = chunk.label
            handle.write(json.dumps(obj, ensure_ascii=False) + "\n")
