"""Token-phrase trie used by the cue matchers.

Nodes are plain dicts keyed by token string; the ``None`` key holds the
payload list for phrases ending at that node. Callers decide whether the
token sequence they scan is case-folded or raw.
"""

from __future__ import annotations

from typing import Any, Iterator, Sequence

_LEAF = None


class PhraseTrie:
    __slots__ = ("_root",)

    def __init__(self) -> None:
        self._root: dict = {}

    def add(self, phrase: Sequence[str], payload: Any) -> None:
        if not phrase:
            raise ValueError("empty phrase")
        node = self._root
        for word in phrase:
            node = node.setdefault(word, {})
        node.setdefault(_LEAF, []).append(payload)

    def __contains__(self, phrase: Sequence[str]) -> bool:
        node = self._root
        for word in phrase:
            node = node.get(word)
            if node is None:
                return False
        return _LEAF in node

    def iter_matches(
        self, words: Sequence[str], start: int = 0, end: int | None = None
    ) -> Iterator[tuple[int, int, Any]]:
        """Yield (first, last, payload) for every phrase occurrence.

        All matches at all positions are reported, including nested and
        overlapping ones; ``last`` is inclusive.
        """
        if end is None:
            end = len(words)
        root = self._root
        for i in range(start, end):
            node = root
            j = i
            while j < end:
                node = node.get(words[j])
                if node is None:
                    break
                if _LEAF in node:
                    for payload in node[_LEAF]:
                        yield i, j, payload
                j += 1

    def scan_longest(
        self, words: Sequence[str], start: int = 0, end: int | None = None
    ) -> list[tuple[int, int, list]]:
        """Left-to-right longest-match scan that consumes matched tokens.

        At each position the longest matching phrase wins; its tokens are
        consumed, so shorter phrases nested inside it never match.
        """
        if end is None:
            end = len(words)
        root = self._root
        out: list[tuple[int, int, list]] = []
        i = start
        while i < end:
            node = root
            best: tuple[int, list] | None = None
            j = i
            while j < end:
                node = node.get(words[j])
                if node is None:
                    break
                if _LEAF in node:
                    best = (j, node[_LEAF])
                j += 1
            if best is None:
                i += 1
            else:
                last, payloads = best
                out.append((i, last, payloads))
                i = last + 1
        return out
