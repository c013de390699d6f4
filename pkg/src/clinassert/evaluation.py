"""Span matching against gold chunks, label mapping, per-class metrics,
and latency measurement.

Gold rows are matched to predictions by character-span overlap: FULL for an
identical span, PARTIAL for a nonempty but unequal intersection, NONE when
no prediction intersects. Per-class precision/recall/F1 and the
support-weighted F1 are computed with exact rational arithmetic; rounding
happens only at formatting time.
"""

from __future__ import annotations

import json
import os
import platform
import statistics
import time
from collections import Counter
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from clinassert.errors import EmptyEvalError, ParseError, UnmappedLabelError
from clinassert.types import Annotation, CANONICAL_LABELS, Chunk


class UnmappedPolicy(Enum):
    DROP = "drop"
    ERROR = "error"


@dataclass(frozen=True)
class LabelMap:
    """Maps raw external labels (case-folded keys) to canonical labels."""

    entries: tuple[tuple[str, str], ...]
    unmapped_policy: UnmappedPolicy = UnmappedPolicy.DROP

    def __post_init__(self):
        object.__setattr__(self, "_index", dict(self.entries))

    @classmethod
    def from_dict(
        cls, entries: Mapping[str, str], unmapped_policy: UnmappedPolicy = UnmappedPolicy.DROP
    ) -> "LabelMap":
        folded: dict[str, str] = {}
        for raw, canonical in entries.items():
            if canonical not in CANONICAL_LABELS:
                raise ValueError(
                    f"mapping target {canonical!r} for {raw!r} is not a canonical label"
                )
            key = raw.casefold()
            if key in folded and folded[key] != canonical:
                raise ValueError(
                    f"raw labels colliding on {key!r} map to different canonical labels"
                )
            folded[key] = canonical
        return cls(entries=tuple(sorted(folded.items())), unmapped_policy=unmapped_policy)

    def lookup(self, raw: str) -> str | None:
        return self._index.get(raw.casefold())


def load_label_map(path, unmapped_policy: UnmappedPolicy = UnmappedPolicy.DROP) -> LabelMap:
    """Load a {raw: canonical} JSON object file."""
    with open(path, encoding="utf-8") as handle:
        try:
            obj = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON ({exc.msg})", path=path, line=exc.lineno) from exc
    if not isinstance(obj, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in obj.items()
    ):
        raise ParseError("label map must be a JSON object of strings", path=path)
    try:
        return LabelMap.from_dict(obj, unmapped_policy=unmapped_policy)
    except ValueError as exc:
        raise ParseError(str(exc), path=path) from exc


def map_labels(annotations: Iterable[Annotation], label_map: LabelMap) -> list[Annotation]:
    """Replace raw labels with canonical ones.

    Labels already canonical (after case folding) pass through unless the
    map explicitly remaps them, which also supports class aliasing such as
    folding conditional into hypothetical. Unmapped raw labels are dropped
    or raised per the map's policy. Applying the same map twice is a no-op
    as long as mapping targets are fixed points.
    """
    out: list[Annotation] = []
    for ann in annotations:
        mapped = label_map.lookup(ann.label)
        if mapped is not None:
            out.append(ann if ann.label == mapped else replace(ann, label=mapped))
            continue
        folded = ann.label.casefold()
        if folded in CANONICAL_LABELS:
            out.append(ann if ann.label == folded else replace(ann, label=folded))
        elif label_map.unmapped_policy is UnmappedPolicy.DROP:
            continue
        else:
            raise UnmappedLabelError(f"no mapping for raw label {ann.label!r}")
    return out


class MatchCategory(Enum):
    FULL = "full"
    PARTIAL = "partial"
    NONE = "none"


@dataclass(frozen=True)
class MatchResult:
    gold: Chunk
    pred: Annotation | None
    category: MatchCategory


def match_spans(gold: Sequence[Chunk], pred: Sequence[Annotation]) -> list[MatchResult]:
    """Classify every gold chunk as FULL, PARTIAL, or NONE.

    When several predictions overlap one gold chunk, the largest
    intersection wins, ties going to the leftmost prediction begin. Each
    prediction matches at most one gold chunk. Results come back in the
    input order of the gold list and always partition it.
    """
    preds_by_doc: dict[str, list[tuple[int, Annotation]]] = {}
    for idx, ann in enumerate(pred):
        preds_by_doc.setdefault(ann.chunk.doc_id, []).append((idx, ann))
    gold_by_doc: dict[str, list[int]] = {}
    for idx, chunk in enumerate(gold):
        gold_by_doc.setdefault(chunk.doc_id, []).append(idx)

    results: list[MatchResult | None] = [None] * len(gold)
    for doc_id, gold_indices in gold_by_doc.items():
        candidates = preds_by_doc.get(doc_id, [])
        used: set[int] = set()
        for gi in sorted(gold_indices, key=lambda i: (gold[i].begin, gold[i].end, i)):
            g = gold[gi]
            best_key = None
            best: tuple[int, Annotation] | None = None
            for pj, ann in candidates:
                if pj in used:
                    continue
                inter = min(g.end, ann.chunk.end) - max(g.begin, ann.chunk.begin)
                if inter <= 0:
                    continue
                key = (-inter, ann.chunk.begin, ann.chunk.end, pj)
                if best_key is None or key < best_key:
                    best_key = key
                    best = (pj, ann)
            if best is None:
                results[gi] = MatchResult(gold=g, pred=None, category=MatchCategory.NONE)
            else:
                pj, ann = best
                used.add(pj)
                category = (
                    MatchCategory.FULL
                    if ann.chunk.begin == g.begin and ann.chunk.end == g.end
                    else MatchCategory.PARTIAL
                )
                results[gi] = MatchResult(gold=g, pred=ann, category=category)
    return results  # type: ignore[return-value]


@dataclass(frozen=True)
class ClassMetrics:
    precision: Fraction
    recall: Fraction
    f1: Fraction
    support: int


@dataclass(frozen=True)
class MatchCounts:
    full: int
    partial: int
    none: int
    predicted_rows: int
    total_rows: int


@dataclass(frozen=True)
class LatencyStats:
    seconds_per_100_mean: float
    seconds_per_100_std: float
    repetitions: int
    rows: int
    hardware: str
    parallel: bool = False


@dataclass(frozen=True)
class EvalReport:
    per_class: dict[str, ClassMetrics]
    weighted_f1: Fraction
    match_counts: MatchCounts
    latency: LatencyStats | None = None

    def to_json_dict(self) -> dict:
        counts = self.match_counts
        out: dict = {
            "per_class": {
                label: {
                    "precision": round(float(m.precision), 6),
                    "recall": round(float(m.recall), 6),
                    "f1": round(float(m.f1), 6),
                    "support": m.support,
                }
                for label, m in sorted(self.per_class.items())
            },
            "weighted_f1": round(float(self.weighted_f1), 6),
            "match_counts": {
                "full": counts.full,
                "partial": counts.partial,
                "none": counts.none,
                "predicted_rows": counts.predicted_rows,
                "total_rows": counts.total_rows,
            },
            "latency": None,
        }
        if self.latency is not None:
            out["latency"] = {
                "seconds_per_100_mean": round(self.latency.seconds_per_100_mean, 6),
                "seconds_per_100_std": round(self.latency.seconds_per_100_std, 6),
                "repetitions": self.latency.repetitions,
                "rows": self.latency.rows,
                "hardware": self.latency.hardware,
                "parallel": self.latency.parallel,
            }
        return out

    def format_table(self) -> str:
        width = max([len("weighted avg")] + [len(label) for label in self.per_class])
        lines = [f"{'class':<{width}}  precision  recall  f1     support"]
        for label in sorted(self.per_class):
            m = self.per_class[label]
            lines.append(
                f"{label:<{width}}  "
                f"{float(m.precision):<9.3f}  {float(m.recall):<6.3f}  "
                f"{float(m.f1):<5.3f}  {m.support}"
            )
        total_support = sum(m.support for m in self.per_class.values())
        lines.append(
            f"{'weighted avg':<{width}}  {'-':<9}  {'-':<6}  "
            f"{float(self.weighted_f1):<5.3f}  {total_support}"
        )
        counts = self.match_counts
        total = counts.total_rows

        def pct(n: int) -> str:
            return f"{100.0 * n / total:.2f}%" if total else "0.00%"

        lines.append("")
        lines.append(
            f"matches: full {counts.full} ({pct(counts.full)}), "
            f"partial {counts.partial} ({pct(counts.partial)}), "
            f"none {counts.none} ({pct(counts.none)}), "
            f"predicted rows {counts.predicted_rows}, total rows {total}"
        )
        if self.latency is not None:
            lat = self.latency
            lines.append(
                f"latency: {lat.seconds_per_100_mean:.3f} s per 100 rows "
                f"(std {lat.seconds_per_100_std:.3f}, n={lat.repetitions}) on {lat.hardware}"
            )
        return "\n".join(lines)


def score(
    results: Sequence[MatchResult],
    classes: Iterable[str],
    include_unmatched_as_miss: bool = False,
    predicted_rows: int | None = None,
    latency: LatencyStats | None = None,
) -> EvalReport:
    """Score matched gold/prediction pairs over the given class set.

    Confusion counts run over FULL and PARTIAL pairs whose gold label lies
    in ``classes``; gold rows with no matching prediction count as false
    negatives only when ``include_unmatched_as_miss`` is set, and are
    excluded otherwise. Classes with zero predictions get precision 0 by
    convention. The weighted F1 is the support-weighted mean of per-class
    F1 over the evaluated classes; all arithmetic is exact rational until
    formatting.
    """
    class_set = frozenset(classes)
    full = sum(1 for r in results if r.category is MatchCategory.FULL)
    partial = sum(1 for r in results if r.category is MatchCategory.PARTIAL)
    none = sum(1 for r in results if r.category is MatchCategory.NONE)
    if predicted_rows is None:
        predicted_rows = sum(1 for r in results if r.pred is not None)
    counts = MatchCounts(
        full=full, partial=partial, none=none, predicted_rows=predicted_rows,
        total_rows=len(results),
    )

    tp: Counter[str] = Counter()
    fp: Counter[str] = Counter()
    fn: Counter[str] = Counter()
    support: Counter[str] = Counter()
    for r in results:
        gold_label = r.gold.label
        if gold_label is None:
            raise ValueError(
                f"gold chunk {r.gold.text!r} in doc {r.gold.doc_id!r} has no label"
            )
        if gold_label not in class_set:
            continue
        if r.category is MatchCategory.NONE:
            if include_unmatched_as_miss:
                support[gold_label] += 1
                fn[gold_label] += 1
            continue
        support[gold_label] += 1
        pred_label = r.pred.label
        if pred_label == gold_label:
            tp[gold_label] += 1
        else:
            fn[gold_label] += 1
            if pred_label in class_set:
                fp[pred_label] += 1

    total_support = sum(support.values())
    if total_support == 0:
        raise EmptyEvalError(
            f"no gold rows in evaluated classes {sorted(class_set)}"
        )
    per_class: dict[str, ClassMetrics] = {}
    for label in sorted(class_set):
        denom_p = tp[label] + fp[label]
        denom_r = tp[label] + fn[label]
        precision = Fraction(tp[label], denom_p) if denom_p else Fraction(0)
        recall = Fraction(tp[label], denom_r) if denom_r else Fraction(0)
        f1 = (
            2 * precision * recall / (precision + recall)
            if precision + recall
            else Fraction(0)
        )
        per_class[label] = ClassMetrics(
            precision=precision, recall=recall, f1=f1, support=support[label]
        )
    weighted = (
        sum((m.f1 * m.support for m in per_class.values()), Fraction(0)) / total_support
    )
    return EvalReport(
        per_class=per_class, weighted_f1=weighted, match_counts=counts, latency=latency
    )


def describe_hardware() -> str:
    return (
        f"{platform.system()} {platform.machine()}, {os.cpu_count()} vCPU, "
        f"Python {platform.python_version()}"
    )


def bench(
    runner: Callable[[object], int],
    corpus,
    repetitions: int,
    hardware: str | None = None,
    parallel: bool = False,
) -> LatencyStats:
    """Measure wall-clock seconds per 100 rows for ``runner`` over ``corpus``.

    The runner must process the corpus and return the number of rows it
    handled. One warm-up run is excluded from the measurement; mean and
    sample standard deviation are taken over ``repetitions`` timed runs.
    """
    if repetitions < 3:
        raise ValueError(f"repetitions must be >= 3, got {repetitions}")
    if not corpus:
        raise ValueError("corpus is empty")
    rows = runner(corpus)  # warm-up, excluded
    if rows <= 0:
        raise ValueError("runner processed no rows")
    samples: list[float] = []
    for _ in range(repetitions):
        start = time.perf_counter()
        rows = runner(corpus)
        elapsed = time.perf_counter() - start
        samples.append(elapsed / rows * 100.0)
    return LatencyStats(
        seconds_per_100_mean=statistics.fmean(samples),
        seconds_per_100_std=statistics.stdev(samples),
        repetitions=repetitions,
        rows=rows,
        hardware=hardware if hardware is not None else describe_hardware(),
        parallel=parallel,
    )
