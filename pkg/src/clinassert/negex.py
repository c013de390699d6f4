"""NegEx-style negation detection over aligned entity chunks.

Cue phrases are literal token sequences of four kinds: pre-negation cues
project a scope forward, post-negation cues backward, pseudo-negation cues
absorb lookalike phrases so they cannot trigger ("no increase"), and
termination cues ("but") clip a scope mid-sentence. A chunk inside an
unclipped scope is labeled absent; every other chunk is labeled present.

Matching is case-insensitive over case-folded token sequences, with
longest-match-wins at each position: when "no increase" (pseudo) and "no"
(pre-negation) both match, the longer phrase consumes the tokens and the
shorter one never fires.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from clinassert.corpus import iter_jsonl
from clinassert.errors import AlignmentError, ConfigError, ParseError
from clinassert.phrases import PhraseTrie
from clinassert.text import tokenize
from clinassert.types import ABSENT, PRESENT, Annotation, Chunk, Document, Sentence, Token

SOURCE_NAME = "negex"
DEFAULT_MAX_SCOPE = 5


class CueKind(str, Enum):
    PRE_NEG = "PRE_NEG"
    POST_NEG = "POST_NEG"
    PSEUDO_NEG = "PSEUDO_NEG"
    TERMINATION = "TERMINATION"


@dataclass(frozen=True)
class NegexCue:
    """One cue phrase; stored case-folded."""

    phrase: str
    kind: CueKind

    def __post_init__(self):
        if not self.phrase.strip():
            raise ValueError("cue phrase must be nonempty")
        object.__setattr__(self, "phrase", self.phrase.casefold())


@dataclass(frozen=True)
class NegexConfig:
    """Compiled cue inventory plus scope settings.

    ``max_scope`` is the maximum token distance between a cue and a chunk;
    ``sentence_bounded`` keeps scopes from crossing sentence boundaries.
    """

    cues: tuple[NegexCue, ...]
    max_scope: int = DEFAULT_MAX_SCOPE
    sentence_bounded: bool = True
    _trie: PhraseTrie = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.max_scope < 1:
            raise ValueError(f"max_scope must be >= 1, got {self.max_scope}")
        trie = PhraseTrie()
        for cue in self.cues:
            words = tuple(t.surface for t in tokenize(Document(doc_id="cue", text=cue.phrase)))
            trie.add(words, cue.kind)
        object.__setattr__(self, "_trie", trie)


def load_negex_cues(path, max_scope: int = DEFAULT_MAX_SCOPE, sentence_bounded: bool = True) -> NegexConfig:
    """Load and validate a cue inventory from a JSON-lines file.

    Each line is {"phrase": str, "kind": "PRE_NEG"|"POST_NEG"|"PSEUDO_NEG"|
    "TERMINATION"}. Duplicate phrases (case-folded) are rejected.
    """
    cues: list[NegexCue] = []
    seen: dict[str, int] = {}
    for line_no, obj in iter_jsonl(path):
        phrase = obj.get("phrase")
        if not isinstance(phrase, str) or not phrase.strip():
            raise ParseError("field 'phrase' must be a nonempty string", path=path, line=line_no)
        kind_raw = obj.get("kind")
        try:
            kind = CueKind(kind_raw)
        except ValueError:
            raise ParseError(
                f"unknown cue kind {kind_raw!r} (expected one of "
                f"{', '.join(k.value for k in CueKind)})",
                path=path,
                line=line_no,
            ) from None
        folded = phrase.casefold()
        if folded in seen:
            raise ParseError(
                f"duplicate cue phrase {phrase!r} (first seen at line {seen[folded]})",
                path=path,
                line=line_no,
            )
        seen[folded] = line_no
        cues.append(NegexCue(phrase=folded, kind=kind))
    return NegexConfig(cues=tuple(cues), max_scope=max_scope, sentence_bounded=sentence_bounded)


def _terminated(terms: list[tuple[int, int, int]], span_idx: int, left: int, right: int) -> bool:
    # Any termination cue with a token strictly between left and right.
    return any(si == span_idx and first < right and last > left for si, first, last in terms)


def negex_annotate(
    doc: Document,
    sentences: list[Sentence],
    tokens: list[Token],
    chunks: list[Chunk],
    config: NegexConfig,
) -> list[Annotation]:
    """Label every chunk absent or present.

    A chunk is absent iff it lies within the scope of a non-pseudo negation
    cue: pre-negation scope extends forward and post-negation backward, up
    to ``max_scope`` tokens, clipped at the sentence boundary (when
    sentence_bounded) and at any termination cue. Distances count tokens
    between the nearest cue token and the nearest chunk token. Output is one
    annotation per chunk with confidence 1.0 and source "negex".
    """
    if not config.cues:
        raise ConfigError("negex cue list is empty")
    words = [t.surface.casefold() for t in tokens]
    if config.sentence_bounded:
        spans = [(s.token_begin, s.token_end) for s in sentences]
    else:
        spans = [(0, len(tokens) - 1)] if tokens else []

    pre: list[tuple[int, int, int]] = []
    post: list[tuple[int, int, int]] = []
    terms: list[tuple[int, int, int]] = []
    span_of_token: dict[int, int] = {}
    for span_idx, (lo, hi) in enumerate(spans):
        for t in range(lo, hi + 1):
            span_of_token[t] = span_idx
        for first, last, kinds in config._trie.scan_longest(words, lo, hi + 1):
            kind = kinds[0]
            if kind is CueKind.PRE_NEG:
                pre.append((span_idx, first, last))
            elif kind is CueKind.POST_NEG:
                post.append((span_idx, first, last))
            elif kind is CueKind.TERMINATION:
                terms.append((span_idx, first, last))
            # PSEUDO_NEG matches consume their tokens and trigger nothing.

    annotations: list[Annotation] = []
    for chunk in chunks:
        if not chunk.aligned:
            raise AlignmentError(
                f"chunk {chunk.text!r} at ({chunk.begin}, {chunk.end}) in doc "
                f"{chunk.doc_id!r} is not aligned to tokens"
            )
        chunk_span = span_of_token.get(chunk.token_begin)
        label = PRESENT
        if chunk_span is not None:
            for span_idx, _, last in pre:
                if span_idx != chunk_span:
                    continue
                distance = chunk.token_begin - last
                if 1 <= distance <= config.max_scope and not _terminated(
                    terms, span_idx, last, chunk.token_begin
                ):
                    label = ABSENT
                    break
            if label is PRESENT:
                for span_idx, first, _ in post:
                    if span_idx != chunk_span:
                        continue
                    distance = first - chunk.token_end
                    if 1 <= distance <= config.max_scope and not _terminated(
                        terms, span_idx, chunk.token_end, first
                    ):
                        label = ABSENT
                        break
        annotations.append(
            Annotation(chunk=chunk, label=label, confidence=1.0, source=SOURCE_NAME)
        )
    return annotations
