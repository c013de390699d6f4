#!/usr/bin/env python3
"""Regenerate the committed test fixtures and the bundled synthetic corpus.

Everything here is deterministic: rerunning the script reproduces the same
bytes. Run from the repository root:

    python scripts/make_fixtures.py
"""

from __future__ import annotations

import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"
DATA = ROOT / "src" / "clinassert" / "data"

# Six reference sentences covering every assertion category, with one
# pre-extracted target chunk each.
SENTENCES = [
    ("Overnight, the patient became hypoxic, dropping to the 80 's.", "hypoxic", "present"),
    ("He gets short of breath with one flight of stairs.", "short of breath", "conditional"),
    (
        "Small stroke, nearly recovered, likely embolic from carotid artery.",
        "embolic from carotid artery",
        "possible",
    ),
    (
        "There was no evidence of diarrhea during medical Lawrence Memorial Hospital stay.",
        "diarrhea",
        "absent",
    ),
    ("Mother suffer MI in her 50 's, died at age 59.", "MI", "associated_with_someone_else"),
    (
        "Hydrocodone 5 mg with Tylenol , one to two tablets every four hours p.r.n. pain .",
        "pain",
        "hypothetical",
    ),
]


def write_jsonl(path: Path, rows: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for row in rows:
            handle.write(json.dumps(row, ensure_ascii=False) + "\n")


def make_reference_corpus() -> None:
    docs, chunks = [], []
    for i, (text, target, label) in enumerate(SENTENCES):
        doc_id = f"ref-{i:02d}"
        begin = text.index(target)
        docs.append({"doc_id": doc_id, "text": text})
        chunks.append(
            {
                "doc_id": doc_id,
                "text": target,
                "begin": begin,
                "end": begin + len(target),
                "label": label,
            }
        )
    write_jsonl(FIXTURES / "reference_docs.jsonl", docs)
    write_jsonl(FIXTURES / "reference_chunks.jsonl", chunks)


def make_match_fixture() -> None:
    # 2594 single-chunk documents; the prediction stream produces 1443 exact
    # spans, 535 overlapping-but-unequal spans, and leaves 616 rows
    # unmatched (1978 predictions in total).
    gold, pred = [], []
    counts = [("full", 1443), ("partial", 535), ("none", 616)]
    row = 0
    for kind, n in counts:
        for _ in range(n):
            doc_id = f"m-{row:04d}"
            gold.append(
                {"doc_id": doc_id, "text": "finding", "begin": 0, "end": 7, "label": "absent"}
            )
            if kind == "full":
                pred.append(
                    {
                        "doc_id": doc_id,
                        "text": "finding",
                        "begin": 0,
                        "end": 7,
                        "label": "absent",
                        "confidence": 1.0,
                        "source": "negex",
                    }
                )
            elif kind == "partial":
                pred.append(
                    {
                        "doc_id": doc_id,
                        "text": "ding now",
                        "begin": 3,
                        "end": 11,
                        "label": "absent",
                        "confidence": 1.0,
                        "source": "negex",
                    }
                )
            row += 1
    write_jsonl(FIXTURES / "match_gold.jsonl", gold)
    write_jsonl(FIXTURES / "match_pred.jsonl", pred)


def make_pipeline_fixture() -> None:
    text = "He denies chest pain. She gets dizziness with exertion. Brother had asthma."
    doc_id = "synthetic-1"

    def span(target: str) -> tuple[int, int]:
        begin = text.index(target)
        return begin, begin + len(target)

    c1, c2, c3 = span("chest pain"), span("dizziness"), span("asthma")

    def ann(chunk, target, label, confidence, source):
        return {
            "doc_id": doc_id,
            "text": target,
            "begin": chunk[0],
            "end": chunk[1],
            "label": label,
            "confidence": confidence,
            "source": source,
        }

    streams_dir = FIXTURES / "streams"
    write_jsonl(streams_dir / "pipeline_doc.jsonl", [{"doc_id": doc_id, "text": text}])
    write_jsonl(
        streams_dir / "fewshot.jsonl",
        [
            ann(c1, "chest pain", "absent", 0.94, "fewshot"),
            ann(c2, "dizziness", "present", 0.8, "fewshot"),
            ann(c3, "asthma", "hypothetical", 0.7, "fewshot"),
        ],
    )
    write_jsonl(
        streams_dir / "dl.jsonl",
        [
            ann(c1, "chest pain", "absent", 0.9, "dl"),
            ann(c2, "dizziness", "conditional", 0.85, "dl"),
            ann(c3, "asthma", "associated_with_someone_else", 0.88, "dl"),
        ],
    )
    write_jsonl(streams_dir / "contextual_possible.jsonl", [])
    write_jsonl(
        streams_dir / "contextual_conditional.jsonl",
        [ann(c2, "dizziness", "conditional", 0.9, "contextual")],
    )
    # Hand-traced final output: chest pain keeps the lone whitelisted vote,
    # asthma resolves a 1-1 tie by confidence, dizziness wins by majority
    # with the highest-confidence annotation of the modal label selected.
    write_jsonl(
        FIXTURES / "merged_expected.jsonl",
        [
            ann(c1, "chest pain", "absent", 0.94, "merger:final"),
            ann(c3, "asthma", "associated_with_someone_else", 0.88, "merger:final"),
            ann(c2, "dizziness", "conditional", 0.9, "merger:final"),
        ],
    )


TEMPLATES = [
    ("The patient denies {} and remains stable today.", "absent"),
    ("There was no evidence of {} on repeat examination.", "absent"),
    ("Imaging shows likely {} given the overall findings.", "possible"),
    ("He develops {} with exertion during daily activity.", "conditional"),
    ("Mother had {} at an early age per family report.", "associated_with_someone_else"),
    ("The patient has {} and tolerates the regimen well.", "present"),
    ("Exam reveals {} consistent with prior documentation.", "present"),
    ("She reports {} improving slowly over the past week.", "present"),
]

FINDINGS = [
    "chest pain", "shortness of breath", "fever", "cough", "nausea", "headache",
    "dizziness", "edema", "rash", "fatigue", "vomiting", "diarrhea", "wheezing",
    "palpitations", "syncope", "anemia", "hypertension", "hyperlipidemia",
    "pneumonia", "cellulitis",
]


def make_synthetic_corpus(n_docs: int, sentences_per_doc: int, seed: int):
    rng = random.Random(seed)
    docs, chunks = [], []
    for d in range(n_docs):
        doc_id = f"syn-{d:04d}"
        parts = []
        offset = 0
        doc_chunks = []
        for _ in range(sentences_per_doc):
            template, _ = rng.choice(TEMPLATES)
            finding = rng.choice(FINDINGS)
            sentence = template.format(finding)
            begin = offset + sentence.index(finding)
            doc_chunks.append(
                {
                    "doc_id": doc_id,
                    "text": finding,
                    "begin": begin,
                    "end": begin + len(finding),
                }
            )
            parts.append(sentence)
            offset += len(sentence) + 1
        docs.append({"doc_id": doc_id, "text": " ".join(parts)})
        chunks.extend(doc_chunks)
    return docs, chunks


def main() -> None:
    make_reference_corpus()
    make_match_fixture()
    make_pipeline_fixture()
    docs, chunks = make_synthetic_corpus(n_docs=100, sentences_per_doc=5, seed=20240501)
    write_jsonl(DATA / "synthetic_docs_500.jsonl", docs)
    write_jsonl(DATA / "synthetic_chunks_500.jsonl", chunks)
    print("fixtures written")


if __name__ == "__main__":
    main()
