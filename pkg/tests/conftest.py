from __future__ import annotations

import random
from pathlib import Path

import pytest

from clinassert import (
    Chunk,
    Document,
    align_chunk,
    load_negex_cues,
    load_rules,
    split_sentences,
    tokenize,
)
from clinassert import resources
from clinassert.corpus import read_chunks, read_documents

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def reference_docs():
    return read_documents(FIXTURES / "reference_docs.jsonl")


@pytest.fixture(scope="session")
def reference_chunks():
    return read_chunks(FIXTURES / "reference_chunks.jsonl", require_label=True)


@pytest.fixture(scope="session")
def negex_config():
    return load_negex_cues(resources.negex_cues_path())


@pytest.fixture(scope="session")
def bundled_rules():
    return load_rules(resources.contextual_rules_paths())


def prepare(doc: Document):
    tokens = tokenize(doc)
    sentences = split_sentences(doc, tokens)
    return tokens, sentences


def aligned_chunk(doc: Document, tokens, target: str, occurrence: int = 0) -> Chunk:
    begin = -1
    for _ in range(occurrence + 1):
        begin = doc.text.index(target, begin + 1)
    return align_chunk(
        doc, tokens, Chunk(doc.doc_id, target, begin, begin + len(target))
    )


# Template corpus used for throughput and larger-scale tests. Deterministic
# for a given seed.
_TEMPLATES = [
    "The patient denies {} and remains stable today.",
    "There was no evidence of {} on repeat examination.",
    "Imaging shows likely {} given the overall findings.",
    "He develops {} with exertion during daily activity.",
    "Mother had {} at an early age per family report.",
    "The patient has {} and tolerates the regimen well.",
    "Exam reveals {} consistent with prior documentation.",
    "She reports {} improving slowly over the past week.",
]

_FINDINGS = [
    "chest pain", "shortness of breath", "fever", "cough", "nausea", "headache",
    "dizziness", "edema", "rash", "fatigue", "vomiting", "diarrhea", "wheezing",
    "palpitations", "syncope", "anemia", "hypertension", "hyperlipidemia",
    "pneumonia", "cellulitis",
]


def build_template_corpus(n_docs: int, sentences_per_doc: int, seed: int):
    rng = random.Random(seed)
    docs: list[Document] = []
    chunks: list[Chunk] = []
    for d in range(n_docs):
        doc_id = f"gen-{d:05d}"
        parts: list[str] = []
        offset = 0
        spans: list[tuple[str, int]] = []
        for _ in range(sentences_per_doc):
            template = rng.choice(_TEMPLATES)
            finding = rng.choice(_FINDINGS)
            sentence = template.format(finding)
            spans.append((finding, offset + sentence.index(finding)))
            parts.append(sentence)
            offset += len(sentence) + 1
        doc = Document(doc_id, " ".join(parts))
        docs.append(doc)
        for finding, begin in spans:
            chunks.append(Chunk(doc_id, finding, begin, begin + len(finding)))
    return docs, chunks
