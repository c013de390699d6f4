"""Contextual assertion rules: cue lexicons, regex patterns, exception
phrases, and token-scope windows evaluated in priority order.

Each rule carries a target label and fires for a chunk when a prefix cue
ends within ``scope_before`` tokens to the left, a suffix cue starts within
``scope_after`` tokens to the right, or a regex pattern matches the sentence
near the chunk — unless an exception cue overlaps the triggering span.
Chunks with no firing rule receive no annotation at all: the engine is a
partial annotator and leaves undecided chunks to downstream merging.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field

from clinassert.corpus import iter_jsonl
from clinassert.errors import AlignmentError, ParseError, PatternError
from clinassert.phrases import PhraseTrie
from clinassert.text import tokenize
from clinassert.types import Annotation, Chunk, Document, Sentence, Token

SOURCE_NAME = "contextual"

# Default scope window: 9 tokens to the left, 15 to the right of the chunk.
DEFAULT_SCOPE_BEFORE = 9
DEFAULT_SCOPE_AFTER = 15
DEFAULT_CONFIDENCE = 0.9

_ANCHORS = ("pre", "post", "any")


@dataclass(frozen=True)
class RegexPattern:
    """A sentence-level regex trigger with a positional anchor.

    "pre" requires the match to start at or before the chunk, "post" to end
    at or after it, "any" puts no positional constraint. In all cases the
    gap between match and chunk (zero when they overlap) must stay within
    ``scope_after`` characters.
    """

    pattern: str
    anchor: str = "any"

    def __post_init__(self):
        if self.anchor not in _ANCHORS:
            raise ValueError(f"anchor must be one of {_ANCHORS}, got {self.anchor!r}")


@dataclass(frozen=True)
class ContextualRule:
    label: str
    prefix_cues: tuple[str, ...] = ()
    suffix_cues: tuple[str, ...] = ()
    regex_patterns: tuple[RegexPattern, ...] = ()
    exception_cues: tuple[str, ...] = ()
    scope_before: int = DEFAULT_SCOPE_BEFORE
    scope_after: int = DEFAULT_SCOPE_AFTER
    case_sensitive: bool = False
    priority: int = 0
    confidence: float = DEFAULT_CONFIDENCE

    def __post_init__(self):
        if not self.label:
            raise ValueError("rule label must be nonempty")
        if not (self.prefix_cues or self.suffix_cues or self.regex_patterns):
            raise ValueError(
                f"rule for label {self.label!r} needs at least one prefix cue, "
                "suffix cue, or regex pattern"
            )
        if self.scope_before < 0 or self.scope_after < 0:
            raise ValueError("scope windows must be >= 0")
        if not 0.0 < self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside (0, 1]")


class _RuleMatcher:
    """Compiled cue tries and regexes for one rule set."""

    __slots__ = ("order", "fold_trie", "raw_trie", "regexes")

    def __init__(self, rules: tuple[ContextualRule, ...]):
        self.order = sorted(range(len(rules)), key=lambda i: (-rules[i].priority, i))
        self.fold_trie = PhraseTrie()
        self.raw_trie = PhraseTrie()
        self.regexes: list[list[tuple[re.Pattern, str]]] = []
        for idx, rule in enumerate(rules):
            trie = self.raw_trie if rule.case_sensitive else self.fold_trie
            for role, phrases in (
                ("prefix", rule.prefix_cues),
                ("suffix", rule.suffix_cues),
                ("exception", rule.exception_cues),
            ):
                for phrase in phrases:
                    words = tuple(
                        t.surface for t in tokenize(Document(doc_id="cue", text=phrase))
                    )
                    if not rule.case_sensitive:
                        words = tuple(w.casefold() for w in words)
                    trie.add(words, (idx, role))
            flags = 0 if rule.case_sensitive else re.IGNORECASE
            compiled = []
            for pat in rule.regex_patterns:
                try:
                    compiled.append((re.compile(pat.pattern, flags), pat.anchor))
                except re.error as exc:
                    raise PatternError(str(exc.msg), pat.pattern, exc.pos) from exc
            self.regexes.append(compiled)


@dataclass(frozen=True)
class RuleSet:
    """An immutable, compiled collection of contextual rules.

    Priorities must be unique within each label; across labels, equal
    priorities fall back to file order, so evaluation is fully
    deterministic.
    """

    rules: tuple[ContextualRule, ...]
    default_scope_before: int = DEFAULT_SCOPE_BEFORE
    default_scope_after: int = DEFAULT_SCOPE_AFTER
    _matcher: _RuleMatcher = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        seen: dict[tuple[str, int], int] = {}
        for idx, rule in enumerate(self.rules):
            key = (rule.label, rule.priority)
            if key in seen:
                raise ValueError(
                    f"duplicate priority {rule.priority} for label {rule.label!r} "
                    f"(rules {seen[key]} and {idx})"
                )
            seen[key] = idx
        object.__setattr__(self, "_matcher", _RuleMatcher(self.rules))


def _parse_regex_entry(entry, path, line_no: int) -> RegexPattern:
    if isinstance(entry, str):
        pattern, anchor = entry, "any"
    elif isinstance(entry, dict):
        pattern = entry.get("pattern")
        anchor = entry.get("anchor", "any")
    else:
        raise ParseError("regex entry must be a string or an object", path=path, line=line_no)
    if not isinstance(pattern, str) or not pattern:
        raise ParseError("regex entry is missing a nonempty 'pattern'", path=path, line=line_no)
    if anchor not in _ANCHORS:
        raise ParseError(
            f"regex anchor must be one of {_ANCHORS}, got {anchor!r}", path=path, line=line_no
        )
    try:
        re.compile(pattern)
    except re.error as exc:
        raise PatternError(str(exc.msg), pattern, exc.pos) from exc
    return RegexPattern(pattern=pattern, anchor=anchor)


def _phrase_list(obj: dict, key: str, path, line_no: int) -> tuple[str, ...]:
    value = obj.get(key, [])
    if not isinstance(value, list) or not all(isinstance(p, str) and p.strip() for p in value):
        raise ParseError(f"field {key!r} must be a list of nonempty strings", path=path, line=line_no)
    return tuple(value)


def load_rules(
    paths,
    default_scope_before: int = DEFAULT_SCOPE_BEFORE,
    default_scope_after: int = DEFAULT_SCOPE_AFTER,
) -> RuleSet:
    """Compile one rule set from one or more JSON-lines rule files."""
    rules: list[ContextualRule] = []
    for path in paths:
        for line_no, obj in iter_jsonl(path):
            label = obj.get("label")
            if not isinstance(label, str) or not label:
                raise ParseError("field 'label' must be a nonempty string", path=path, line=line_no)
            regex_entries = obj.get("regex_patterns", [])
            if not isinstance(regex_entries, list):
                raise ParseError("field 'regex_patterns' must be a list", path=path, line=line_no)
            patterns = tuple(_parse_regex_entry(e, path, line_no) for e in regex_entries)
            try:
                rules.append(
                    ContextualRule(
                        label=label,
                        prefix_cues=_phrase_list(obj, "prefix_cues", path, line_no),
                        suffix_cues=_phrase_list(obj, "suffix_cues", path, line_no),
                        regex_patterns=patterns,
                        exception_cues=_phrase_list(obj, "exception_cues", path, line_no),
                        scope_before=obj.get("scope_before", default_scope_before),
                        scope_after=obj.get("scope_after", default_scope_after),
                        case_sensitive=obj.get("case_sensitive", False),
                        priority=obj.get("priority", 0),
                        confidence=obj.get("confidence", DEFAULT_CONFIDENCE),
                    )
                )
            except ValueError as exc:
                raise ParseError(str(exc), path=path, line=line_no) from exc
    if not rules:
        raise ParseError("no rules", path=paths[0] if paths else None)
    try:
        return RuleSet(
            rules=tuple(rules),
            default_scope_before=default_scope_before,
            default_scope_after=default_scope_after,
        )
    except ValueError as exc:
        raise ParseError(str(exc), path=paths[0] if paths else None) from exc


def compile_rules(path, **kwargs) -> RuleSet:
    """Compile a rule set from a single JSON-lines rule file."""
    return load_rules([path], **kwargs)


def _char_gap(begin_a: int, end_a: int, begin_b: int, end_b: int) -> int:
    if begin_a < end_b and begin_b < end_a:
        return 0
    if begin_a >= end_b:
        return begin_a - end_b
    return begin_b - end_a


def contextual_annotate(
    doc: Document,
    sentences: list[Sentence],
    tokens: list[Token],
    chunks: list[Chunk],
    rules: RuleSet,
) -> list[Annotation]:
    """Annotate chunks with the highest-priority firing rule, if any.

    Rules are evaluated in descending priority; the first firing rule
    assigns (label, rule confidence, source "contextual"). Cues only count
    inside the chunk's sentence and inside the rule's scope window, and a
    firing is suppressed when an exception cue of the same rule overlaps the
    triggering span. Chunks with no firing rule are skipped.
    """
    matcher = rules._matcher
    if not rules.rules or not chunks:
        for chunk in chunks:
            if not chunk.aligned:
                raise AlignmentError(
                    f"chunk {chunk.text!r} in doc {chunk.doc_id!r} is not aligned to tokens"
                )
        return []

    words_fold = [t.surface.casefold() for t in tokens]
    words_raw = [t.surface for t in tokens]
    cue_hits: dict[tuple[int, int, str], list[tuple[int, int]]] = defaultdict(list)
    regex_hits: dict[tuple[int, int], list[tuple[int, int, str]]] = defaultdict(list)
    sent_of_token: dict[int, int] = {}
    for sent in sentences:
        lo, hi = sent.token_begin, sent.token_end + 1
        for t in range(lo, hi):
            sent_of_token[t] = sent.index
        for first, last, (rule_idx, role) in matcher.fold_trie.iter_matches(words_fold, lo, hi):
            cue_hits[(sent.index, rule_idx, role)].append((first, last))
        for first, last, (rule_idx, role) in matcher.raw_trie.iter_matches(words_raw, lo, hi):
            cue_hits[(sent.index, rule_idx, role)].append((first, last))
        sent_text = doc.text[sent.begin : sent.end]
        for rule_idx, compiled in enumerate(matcher.regexes):
            for regex, anchor in compiled:
                for m in regex.finditer(sent_text):
                    regex_hits[(sent.index, rule_idx)].append(
                        (sent.begin + m.start(), sent.begin + m.end(), anchor)
                    )

    out: list[Annotation] = []
    for chunk in chunks:
        if not chunk.aligned:
            raise AlignmentError(
                f"chunk {chunk.text!r} in doc {chunk.doc_id!r} is not aligned to tokens"
            )
        sent_idx = sent_of_token.get(chunk.token_begin)
        if sent_idx is None:
            continue
        for rule_idx in matcher.order:
            rule = rules.rules[rule_idx]
            if _fires(rule, rule_idx, chunk, sent_idx, tokens, cue_hits, regex_hits):
                out.append(
                    Annotation(
                        chunk=chunk,
                        label=rule.label,
                        confidence=rule.confidence,
                        source=SOURCE_NAME,
                    )
                )
                break
    return out


def _fires(rule, rule_idx, chunk, sent_idx, tokens, cue_hits, regex_hits) -> bool:
    exceptions = [
        (tokens[f].begin, tokens[l].end)
        for f, l in cue_hits.get((sent_idx, rule_idx, "exception"), ())
    ]

    def blocked(begin: int, end: int) -> bool:
        return any(xb < end and begin < xe for xb, xe in exceptions)

    for first, last in cue_hits.get((sent_idx, rule_idx, "prefix"), ()):
        distance = chunk.token_begin - last
        if 1 <= distance <= rule.scope_before and not blocked(
            tokens[first].begin, tokens[last].end
        ):
            return True
    for first, last in cue_hits.get((sent_idx, rule_idx, "suffix"), ()):
        distance = first - chunk.token_end
        if 1 <= distance <= rule.scope_after and not blocked(
            tokens[first].begin, tokens[last].end
        ):
            return True
    for begin, end, anchor in regex_hits.get((sent_idx, rule_idx), ()):
        if anchor == "pre" and begin > chunk.begin:
            continue
        if anchor == "post" and end < chunk.end:
            continue
        gap = _char_gap(begin, end, chunk.begin, chunk.end)
        if gap <= rule.scope_after and not blocked(begin, end):
            return True
    return False
