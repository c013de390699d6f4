"""Sentence segmentation, tokenization, and chunk-to-token alignment.

Tokens carry exact character offsets into the source text, so the token
stream can always be mapped back to the original string (re-inserting the
original gap characters between surfaces reconstructs the document exactly).
Offsets are Unicode scalar-value indices, never bytes.

Both the tokenizer and the sentence splitter are deterministic and
configuration-light: whitespace plus punctuation peeling for tokens, and a
period/question/exclamation boundary rule for sentences, with a clinical
abbreviation exception list ("p.r.n.", "b.i.d.", "dr.") shared by both.
"""

from __future__ import annotations

import re
import string
from dataclasses import replace
from functools import lru_cache

from clinassert.errors import AlignmentError
from clinassert.resources import abbreviations_path
from clinassert.types import Chunk, Document, Sentence, Token

_WORD_RE = re.compile(r"\S+")
_PUNCT = frozenset(string.punctuation)
_BOUNDARY_CHARS = frozenset(".?!")


@lru_cache(maxsize=8)
def _load_abbreviations(path_str: str) -> frozenset[str]:
    out = set()
    with open(path_str, encoding="utf-8") as handle:
        for raw in handle:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            out.add(line.casefold())
    return frozenset(out)


def default_abbreviations() -> frozenset[str]:
    """The bundled abbreviation exception list, loaded once."""
    return _load_abbreviations(str(abbreviations_path()))


def _split_word(word: str, abbreviations: frozenset[str]) -> list[tuple[int, str]]:
    """Break one whitespace-delimited word into (offset, piece) tokens.

    Leading and trailing punctuation peel off one character at a time;
    internal punctuation stays put ("h/o", "x-ray", "2-3"). Peeling stops
    early when the remaining core is a known abbreviation ("p.r.n.").
    """
    if word.casefold() in abbreviations:
        return [(0, word)]
    pieces: list[tuple[int, str]] = []
    left = 0
    right = len(word)
    while left < right and word[left] in _PUNCT:
        pieces.append((left, word[left]))
        left += 1
    tail: list[tuple[int, str]] = []
    while right > left and word[right - 1] in _PUNCT:
        if word[left:right].casefold() in abbreviations:
            break
        tail.append((right - 1, word[right - 1]))
        right -= 1
    if left < right:
        pieces.append((left, word[left:right]))
    pieces.extend(reversed(tail))
    return pieces


def tokenize(doc: Document, abbreviations: frozenset[str] | None = None) -> list[Token]:
    """Split document text into offset-anchored tokens.

    The gap-preserving concatenation of the returned surfaces equals the
    original text exactly; empty text yields an empty list.
    """
    abbrevs = default_abbreviations() if abbreviations is None else abbreviations
    tokens: list[Token] = []
    for match in _WORD_RE.finditer(doc.text):
        for rel, piece in _split_word(match.group(), abbrevs):
            begin = match.start() + rel
            tokens.append(
                Token(index=len(tokens), begin=begin, end=begin + len(piece), surface=piece)
            )
    return tokens


def _word_ending_at(text: str, i: int) -> str:
    start = i
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    return text[start : i + 1].casefold()


def _trim(text: str, begin: int, end: int) -> tuple[int, int]:
    while begin < end and text[begin].isspace():
        begin += 1
    while end > begin and text[end - 1].isspace():
        end -= 1
    return begin, end


def split_sentences(
    doc: Document,
    tokens: list[Token] | None = None,
    abbreviations: frozenset[str] | None = None,
) -> list[Sentence]:
    """Segment a document into sentences covering all non-whitespace text.

    A boundary is a ``.``, ``?`` or ``!`` followed by whitespace and an
    uppercase letter, unless the word ending at a period is on the
    abbreviation list. Every token falls inside exactly one sentence.
    """
    abbrevs = default_abbreviations() if abbreviations is None else abbreviations
    if tokens is None:
        tokens = tokenize(doc, abbrevs)
    text = doc.text
    n = len(text)
    cuts: list[int] = []
    for i, ch in enumerate(text):
        if ch not in _BOUNDARY_CHARS:
            continue
        j = i + 1
        if j >= n or not text[j].isspace():
            continue
        k = j
        while k < n and text[k].isspace():
            k += 1
        if k >= n or not text[k].isupper():
            continue
        if ch == "." and _word_ending_at(text, i) in abbrevs:
            continue
        cuts.append(i + 1)

    sentences: list[Sentence] = []
    tok_i = 0
    start = 0
    for cut in cuts + [n]:
        seg_begin, seg_end = _trim(text, start, cut)
        start = cut
        if seg_begin >= seg_end:
            continue
        first = tok_i
        while tok_i < len(tokens) and tokens[tok_i].begin < seg_end:
            tok_i += 1
        if tok_i == first:
            continue
        sentences.append(
            Sentence(
                index=len(sentences),
                token_begin=first,
                token_end=tok_i - 1,
                begin=seg_begin,
                end=seg_end,
            )
        )
    return sentences


def _normalize_ws(text: str) -> str:
    return " ".join(text.split())


def align_chunk(doc: Document, tokens: list[Token], chunk: Chunk) -> Chunk:
    """Resolve a chunk's character span to the covering token index range.

    ``token_begin`` is the first token ending past ``chunk.begin`` and
    ``token_end`` the last token starting before ``chunk.end``. Raises
    AlignmentError for degenerate or out-of-bounds spans, spans that fall
    entirely inside inter-token whitespace, and chunks whose text disagrees
    with the covered token surfaces (a sign of corrupt input offsets).
    Realigning an already-aligned chunk returns identical indices.
    """
    if chunk.begin >= chunk.end:
        raise AlignmentError(
            f"degenerate chunk span ({chunk.begin}, {chunk.end}) in doc {chunk.doc_id!r}"
        )
    if chunk.end > len(doc.text):
        raise AlignmentError(
            f"chunk span ({chunk.begin}, {chunk.end}) exceeds document "
            f"{chunk.doc_id!r} length {len(doc.text)}"
        )
    token_begin = None
    token_end = None
    for tok in tokens:
        if token_begin is None and tok.end > chunk.begin:
            token_begin = tok.index
        if tok.begin < chunk.end:
            token_end = tok.index
    if token_begin is None or token_end is None or token_begin > token_end:
        raise AlignmentError(
            f"chunk span ({chunk.begin}, {chunk.end}) in doc {chunk.doc_id!r} "
            "covers no tokens"
        )
    covered = doc.text[tokens[token_begin].begin : tokens[token_end].end]
    if _normalize_ws(covered) != _normalize_ws(chunk.text):
        raise AlignmentError(
            f"chunk text {chunk.text!r} disagrees with covered tokens "
            f"{covered!r} in doc {chunk.doc_id!r} at ({chunk.begin}, {chunk.end})"
        )
    return replace(chunk, token_begin=token_begin, token_end=token_end)
