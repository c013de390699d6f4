"""Annotator-stream composition: whitelist filtering, overlap grouping,
confidence ordering, and majority voting across named pipeline stages.

A merger stage consumes one or more annotation streams and emits at most
one annotation per overlap group. Groups are either exact-span or the
transitive closure of pairwise character-span overlap. Majority voting
picks the modal label with ties broken by the highest-confidence annotation
among the tied labels, then by input-stream order, so results are fully
deterministic. Stages compose into an acyclic graph with a unique final
stage.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from clinassert.errors import ConfigError, ParseError
from clinassert.types import Annotation

_KNOWN_FEATURES = frozenset({"confidence"})


@dataclass(frozen=True)
class MergerConfig:
    inputs: tuple[str, ...]
    whitelist: frozenset[str] | None = None
    merge_overlapping: bool = True
    majority_voting: bool = False
    ordering_features: tuple[str, ...] = ("confidence",)
    apply_filter_before_merge: bool = True

    def __post_init__(self):
        if not self.inputs:
            raise ConfigError("merger needs at least one input stream")
        if self.whitelist is not None and not self.whitelist:
            raise ConfigError("whitelist, when present, must be nonempty")
        unknown = set(self.ordering_features) - _KNOWN_FEATURES
        if unknown:
            raise ConfigError(f"unsupported ordering features: {sorted(unknown)}")


@dataclass(frozen=True)
class PipelineStage:
    name: str
    config: MergerConfig

    def __post_init__(self):
        if not self.name:
            raise ConfigError("stage name must be nonempty")


@dataclass(frozen=True)
class PipelineConfig:
    stages: tuple[PipelineStage, ...]

    def __post_init__(self):
        names = [stage.name for stage in self.stages]
        if len(set(names)) != len(names):
            raise ConfigError("stage names must be unique")
        if not self.stages:
            raise ConfigError("pipeline needs at least one stage")


# Internal merge item: (annotation, stream rank, position within stream,
# global index). Stream rank follows the config's input order.
_Item = tuple[Annotation, int, int, int]


def _sort_key(config: MergerConfig):
    def key(item: _Item):
        ann, rank, pos, _ = item
        features = tuple(-ann.confidence for _ in config.ordering_features)
        return features + (rank, pos)

    return key


def _group_items(items: list[_Item], merge_overlapping: bool) -> list[list[_Item]]:
    groups: list[list[_Item]] = []
    if merge_overlapping:
        by_doc: dict[str, list[_Item]] = {}
        for item in items:
            by_doc.setdefault(item[0].chunk.doc_id, []).append(item)
        for doc_id in by_doc:
            doc_items = sorted(
                by_doc[doc_id], key=lambda it: (it[0].chunk.begin, it[0].chunk.end, it[3])
            )
            current: list[_Item] = []
            max_end = -1
            for item in doc_items:
                chunk = item[0].chunk
                if current and chunk.begin < max_end:
                    current.append(item)
                    max_end = max(max_end, chunk.end)
                else:
                    if current:
                        groups.append(current)
                    current = [item]
                    max_end = chunk.end
            if current:
                groups.append(current)
    else:
        by_span: dict[tuple[str, int, int], list[_Item]] = {}
        for item in items:
            chunk = item[0].chunk
            by_span.setdefault((chunk.doc_id, chunk.begin, chunk.end), []).append(item)
        groups = list(by_span.values())
    # Deterministic output order: each group sits where its earliest member
    # appeared in the concatenated input, keeping single-stream merges
    # order-preserving.
    groups.sort(key=lambda g: min(item[3] for item in g))
    return groups


def _select(group: list[_Item], config: MergerConfig) -> Annotation:
    key = _sort_key(config)
    if config.majority_voting:
        counts = Counter(item[0].label for item in group)
        best = max(counts.values())
        tied = {label for label, count in counts.items() if count == best}
        candidates = [item for item in group if item[0].label in tied]
    else:
        candidates = group
    return min(candidates, key=key)[0]


def merge(
    streams: Mapping[str, Sequence[Annotation]],
    config: MergerConfig,
    stage_name: str = "merge",
) -> list[Annotation]:
    """Merge the configured input streams into one annotation per group.

    Whitelist filtering applies before grouping when
    ``apply_filter_before_merge`` is set, otherwise to the merged result.
    The selected annotation keeps its span and confidence; only the source
    is rewritten to "merger:<stage_name>".
    """
    for name in config.inputs:
        if name not in streams:
            raise ConfigError(f"unknown stream name {name!r}")
    items: list[_Item] = []
    for rank, name in enumerate(config.inputs):
        for pos, ann in enumerate(streams[name]):
            items.append((ann, rank, pos, len(items)))
    if config.apply_filter_before_merge and config.whitelist is not None:
        items = [item for item in items if item[0].label in config.whitelist]
    groups = _group_items(items, config.merge_overlapping)
    selected = [_select(group, config) for group in groups]
    if not config.apply_filter_before_merge and config.whitelist is not None:
        selected = [ann for ann in selected if ann.label in config.whitelist]
    return [replace(ann, source=f"merger:{stage_name}") for ann in selected]


def _toposort(pipeline: PipelineConfig, external: set[str]) -> list[PipelineStage]:
    stage_by_name = {stage.name: stage for stage in pipeline.stages}
    for name in stage_by_name:
        if name in external:
            raise ConfigError(f"stage name {name!r} collides with an input stream")
    deps: dict[str, set[str]] = {}
    for stage in pipeline.stages:
        deps[stage.name] = set()
        for inp in stage.config.inputs:
            if inp in stage_by_name:
                deps[stage.name].add(inp)
            elif inp not in external:
                raise ConfigError(
                    f"stage {stage.name!r} references unknown input {inp!r}"
                )
    consumed = {dep for ds in deps.values() for dep in ds}
    finals = [name for name in stage_by_name if name not in consumed]
    if len(finals) != 1:
        raise ConfigError(
            f"pipeline must have exactly one final stage, found {sorted(finals)}"
        )
    order: list[PipelineStage] = []
    done: set[str] = set()
    remaining = dict(deps)
    while remaining:
        ready = sorted(name for name, ds in remaining.items() if ds <= done)
        if not ready:
            raise ConfigError("pipeline stage graph contains a cycle")
        for name in ready:
            order.append(stage_by_name[name])
            done.add(name)
            del remaining[name]
    return order


def run_pipeline(
    streams: Mapping[str, Sequence[Annotation]], pipeline: PipelineConfig
) -> list[Annotation]:
    """Execute the stage graph topologically and return the final output."""
    order = _toposort(pipeline, set(streams))
    finals = order[-1]
    results: dict[str, list[Annotation]] = {}
    stage_names = {stage.name for stage in pipeline.stages}
    for stage in order:
        inputs = {
            name: results[name] if name in stage_names else list(streams[name])
            for name in stage.config.inputs
        }
        results[stage.name] = merge(inputs, stage.config, stage_name=stage.name)
    return results[finals.name]


def _stage_from_obj(obj: dict, path) -> PipelineStage:
    if not isinstance(obj, dict):
        raise ParseError("stage entry must be an object", path=path)
    name = obj.get("name")
    if not isinstance(name, str) or not name:
        raise ParseError("stage is missing a nonempty 'name'", path=path)
    inputs = obj.get("inputs")
    if not isinstance(inputs, list) or not all(isinstance(i, str) and i for i in inputs):
        raise ParseError(f"stage {name!r}: 'inputs' must be a list of names", path=path)
    whitelist = obj.get("whitelist")
    if whitelist is not None:
        if not isinstance(whitelist, list) or not all(isinstance(w, str) for w in whitelist):
            raise ParseError(f"stage {name!r}: 'whitelist' must be a list of labels", path=path)
        whitelist = frozenset(whitelist)
    ordering = obj.get("ordering_features", ["confidence"])
    if not isinstance(ordering, list):
        raise ParseError(f"stage {name!r}: 'ordering_features' must be a list", path=path)
    config = MergerConfig(
        inputs=tuple(inputs),
        whitelist=whitelist,
        merge_overlapping=obj.get("merge_overlapping", True),
        majority_voting=obj.get("majority_voting", False),
        ordering_features=tuple(ordering),
        apply_filter_before_merge=obj.get("apply_filter_before_merge", True),
    )
    return PipelineStage(name=name, config=config)


def load_pipeline(path) -> PipelineConfig:
    """Load a pipeline config: {"stages": [{name, inputs, ...}, ...]}."""
    with open(path, encoding="utf-8") as handle:
        try:
            obj = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON ({exc.msg})", path=path, line=exc.lineno) from exc
    if not isinstance(obj, dict) or not isinstance(obj.get("stages"), list):
        raise ParseError("pipeline config must be an object with a 'stages' list", path=path)
    stages = tuple(_stage_from_obj(entry, path) for entry in obj["stages"])
    return PipelineConfig(stages=stages)
