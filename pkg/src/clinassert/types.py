"""Core domain types shared across the toolkit.

Assertion labels are plain strings. Six canonical categories describe how a
clinical entity relates to the patient; anything else is treated as a raw
external label that must pass through a label map before scoring.
"""

from __future__ import annotations

from dataclasses import dataclass

PRESENT = "present"
ABSENT = "absent"
POSSIBLE = "possible"
CONDITIONAL = "conditional"
HYPOTHETICAL = "hypothetical"
ASSOCIATED_WITH_SOMEONE_ELSE = "associated_with_someone_else"

CANONICAL_LABELS = frozenset(
    {
        PRESENT,
        ABSENT,
        POSSIBLE,
        CONDITIONAL,
        HYPOTHETICAL,
        ASSOCIATED_WITH_SOMEONE_ELSE,
    }
)


def is_canonical(label: str) -> bool:
    return label in CANONICAL_LABELS


@dataclass(frozen=True)
class Document:
    """A raw text unit identified by a corpus-unique id."""

    doc_id: str
    text: str

    def __post_init__(self):
        if not self.doc_id:
            raise ValueError("doc_id must be nonempty")


@dataclass(frozen=True, slots=True)
class Token:
    """One token with exact character offsets into the document text.

    ``begin`` is inclusive, ``end`` exclusive; ``document.text[begin:end]``
    always equals ``surface``.
    """

    index: int
    begin: int
    end: int
    surface: str

    def __post_init__(self):
        if not 0 <= self.begin < self.end:
            raise ValueError(f"invalid token span ({self.begin}, {self.end})")


@dataclass(frozen=True, slots=True)
class Sentence:
    """A sentence as both a character span and an inclusive token range."""

    index: int
    token_begin: int
    token_end: int
    begin: int
    end: int

    def __post_init__(self):
        if self.token_begin > self.token_end:
            raise ValueError("sentence token range is empty")


@dataclass(frozen=True)
class Chunk:
    """A target entity span to be assertion-labeled.

    Character offsets come from the upstream extractor; token offsets are
    filled by alignment. ``label`` is only populated on gold-standard rows.
    """

    doc_id: str
    text: str
    begin: int
    end: int
    token_begin: int | None = None
    token_end: int | None = None
    label: str | None = None

    def __post_init__(self):
        if not self.doc_id:
            raise ValueError("chunk doc_id must be nonempty")
        if self.begin < 0 or self.begin > self.end:
            raise ValueError(f"invalid chunk span ({self.begin}, {self.end})")
        if (self.token_begin is None) != (self.token_end is None):
            raise ValueError("token_begin and token_end must be set together")
        if self.token_begin is not None and self.token_begin > self.token_end:
            raise ValueError("chunk token range is empty")

    @property
    def aligned(self) -> bool:
        return self.token_begin is not None


@dataclass(frozen=True)
class Annotation:
    """One labeled chunk emitted by an annotator or merger stage."""

    chunk: Chunk
    label: str
    confidence: float
    source: str

    def __post_init__(self):
        if not self.label:
            raise ValueError("annotation label must be nonempty")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")
        if not self.source:
            raise ValueError("annotation source must be nonempty")
