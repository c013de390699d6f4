from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from clinassert import (
    Annotation,
    Chunk,
    ConfigError,
    MergerConfig,
    PipelineConfig,
    PipelineStage,
    load_pipeline,
    merge,
    run_pipeline,
)
from clinassert import resources


def ann(doc_id, begin, end, label, confidence, source="s", text="x"):
    return Annotation(
        chunk=Chunk(doc_id, text, begin, end), label=label, confidence=confidence, source=source
    )


class TestMerge:
    def test_strict_majority(self):
        streams = {
            "a": [ann("d", 0, 5, "present", 0.5, "a")],
            "b": [ann("d", 0, 5, "present", 0.6, "b")],
            "c": [ann("d", 0, 5, "absent", 0.99, "c")],
        }
        config = MergerConfig(inputs=("a", "b", "c"), majority_voting=True)
        (out,) = merge(streams, config)
        assert out.label == "present"

    def test_tie_broken_by_confidence(self):
        streams = {
            "a": [ann("d", 0, 5, "absent", 0.9, "a")],
            "b": [ann("d", 0, 5, "present", 0.8, "b")],
        }
        config = MergerConfig(inputs=("a", "b"), majority_voting=True)
        (out,) = merge(streams, config)
        assert out.label == "absent"
        assert out.confidence == 0.9

    def test_whitelist_filter_before_merge(self):
        streams = {
            "a": [
                ann("d", 0, 5, "present", 0.9, "a"),
                ann("d", 10, 15, "absent", 0.8, "a"),
            ]
        }
        config = MergerConfig(
            inputs=("a",), whitelist=frozenset({"absent", "hypothetical"})
        )
        (out,) = merge(streams, config)
        assert out.label == "absent"
        assert (out.chunk.begin, out.chunk.end) == (10, 15)

    def test_confidence_ordering_without_voting(self):
        streams = {
            "a": [ann("d", 0, 5, "possible", 0.7, "a")],
            "b": [ann("d", 0, 5, "present", 0.95, "b")],
        }
        config = MergerConfig(inputs=("a", "b"), majority_voting=False)
        (out,) = merge(streams, config)
        assert out.label == "present"

    def test_source_renamed(self):
        streams = {"a": [ann("d", 0, 5, "present", 0.5, "a")]}
        (out,) = merge(streams, MergerConfig(inputs=("a",)), stage_name="final")
        assert out.source == "merger:final"

    def test_unknown_stream(self):
        with pytest.raises(ConfigError, match="unknown stream"):
            merge({}, MergerConfig(inputs=("missing",)))

    def test_single_stream_idempotence(self):
        stream = [
            ann("d", 5, 9, "present", 0.7, "a"),
            ann("d", 0, 4, "absent", 0.9, "a"),
            ann("e", 2, 6, "possible", 0.4, "a"),
        ]
        config = MergerConfig(inputs=("a",), merge_overlapping=False)
        out = merge({"a": stream}, config, stage_name="stage")
        assert [(o.chunk, o.label, o.confidence) for o in out] == [
            (a.chunk, a.label, a.confidence) for a in stream
        ]
        assert all(o.source == "merger:stage" for o in out)

    def test_overlap_grouping_transitive(self):
        # Chains of pairwise overlaps collapse into one group.
        streams = {
            "a": [ann("d", 0, 10, "absent", 0.5, "a")],
            "b": [ann("d", 8, 20, "absent", 0.6, "b")],
            "c": [ann("d", 18, 30, "present", 0.99, "c")],
        }
        config = MergerConfig(inputs=("a", "b", "c"), majority_voting=True)
        (out,) = merge(streams, config)
        assert out.label == "absent"

    def test_exact_span_grouping(self):
        streams = {
            "a": [ann("d", 0, 10, "absent", 0.5, "a")],
            "b": [ann("d", 0, 11, "present", 0.9, "b")],
        }
        config = MergerConfig(inputs=("a", "b"), merge_overlapping=False)
        out = merge(streams, config)
        assert len(out) == 2

    def test_post_merge_filter(self):
        streams = {
            "a": [ann("d", 0, 5, "present", 0.99, "a")],
            "b": [ann("d", 0, 5, "absent", 0.5, "b")],
        }
        config = MergerConfig(
            inputs=("a", "b"),
            whitelist=frozenset({"absent"}),
            apply_filter_before_merge=False,
        )
        # present wins the group on confidence, then the whitelist drops it.
        assert merge(streams, config) == []

    def test_empty_whitelist_rejected(self):
        with pytest.raises(ConfigError):
            MergerConfig(inputs=("a",), whitelist=frozenset())

    def test_unknown_ordering_feature(self):
        with pytest.raises(ConfigError):
            MergerConfig(inputs=("a",), ordering_features=("recency",))


class TestPipeline:
    def test_identity_stage(self):
        stream = [ann("d", 0, 5, "present", 0.7, "a"), ann("d", 9, 12, "absent", 0.9, "a")]
        pipeline = PipelineConfig(
            stages=(
                PipelineStage(
                    name="only",
                    config=MergerConfig(inputs=("a",), merge_overlapping=False),
                ),
            )
        )
        out = run_pipeline({"a": stream}, pipeline)
        assert [(o.chunk, o.label) for o in out] == [(a.chunk, a.label) for a in stream]

    def test_cycle_rejected(self):
        pipeline = PipelineConfig(
            stages=(
                PipelineStage(name="x", config=MergerConfig(inputs=("y",))),
                PipelineStage(name="y", config=MergerConfig(inputs=("x",))),
                PipelineStage(name="z", config=MergerConfig(inputs=("y",))),
            )
        )
        with pytest.raises(ConfigError, match="cycle"):
            run_pipeline({}, pipeline)

    def test_dangling_reference(self):
        pipeline = PipelineConfig(
            stages=(PipelineStage(name="x", config=MergerConfig(inputs=("ghost",))),)
        )
        with pytest.raises(ConfigError, match="ghost"):
            run_pipeline({}, pipeline)

    def test_two_final_stages_rejected(self):
        pipeline = PipelineConfig(
            stages=(
                PipelineStage(name="x", config=MergerConfig(inputs=("a",))),
                PipelineStage(name="y", config=MergerConfig(inputs=("a",))),
            )
        )
        with pytest.raises(ConfigError, match="final"):
            run_pipeline({"a": []}, pipeline)

    def test_bundled_graph_hand_trace(self):
        text = "He denies chest pain. She gets dizziness with exertion. Brother had asthma."
        c1 = Chunk("synthetic-1", "chest pain", 10, 20)
        c2 = Chunk("synthetic-1", "dizziness", 31, 40)
        c3 = Chunk("synthetic-1", "asthma", 68, 74)
        assert text[c1.begin : c1.end] == "chest pain"
        assert text[c2.begin : c2.end] == "dizziness"
        assert text[c3.begin : c3.end] == "asthma"
        streams = {
            "fewshot": [
                Annotation(c1, "absent", 0.94, "fewshot"),
                Annotation(c2, "present", 0.8, "fewshot"),
                Annotation(c3, "hypothetical", 0.7, "fewshot"),
            ],
            "dl": [
                Annotation(c1, "absent", 0.9, "dl"),
                Annotation(c2, "conditional", 0.85, "dl"),
                Annotation(c3, "associated_with_someone_else", 0.88, "dl"),
            ],
            "contextual-possible": [],
            "contextual-conditional": [Annotation(c2, "conditional", 0.9, "contextual")],
        }
        pipeline = load_pipeline(resources.pipeline_path())
        out = run_pipeline(streams, pipeline)
        by_chunk = {o.chunk.text: (o.label, o.confidence) for o in out}
        assert by_chunk == {
            "chest pain": ("absent", 0.94),
            "dizziness": ("conditional", 0.9),
            "asthma": ("associated_with_someone_else", 0.88),
        }
        assert all(o.source == "merger:final" for o in out)


LABELS = ["present", "absent", "possible", "hypothetical"]


@given(
    st.lists(
        st.tuples(
            st.sampled_from(LABELS),
            st.sampled_from(LABELS),
            st.sampled_from(LABELS),
        ),
        min_size=1,
        max_size=6,
    ),
    st.randoms(use_true_random=False),
)
def test_majority_property(votes, rng):
    streams = {"a": [], "b": [], "c": []}
    for idx, (la, lb, lc) in enumerate(votes):
        begin = idx * 10
        streams["a"].append(ann("d", begin, begin + 5, la, rng.random(), "a"))
        streams["b"].append(ann("d", begin, begin + 5, lb, rng.random(), "b"))
        streams["c"].append(ann("d", begin, begin + 5, lc, rng.random(), "c"))
    config = MergerConfig(inputs=("a", "b", "c"), majority_voting=True)
    out = {o.chunk.begin: o.label for o in merge(streams, config)}
    for idx, triple in enumerate(votes):
        counts = {label: triple.count(label) for label in set(triple)}
        top = max(counts.values())
        winners = {label for label, n in counts.items() if n == top}
        if len(winners) == 1:
            assert out[idx * 10] == winners.pop()
        else:
            assert out[idx * 10] in winners


@given(st.permutations(["a", "b", "c"]))
def test_permutation_invariance_with_distinct_confidences(order):
    streams = {
        "a": [ann("d", 0, 5, "present", 0.91, "a")],
        "b": [ann("d", 0, 5, "absent", 0.72, "b")],
        "c": [ann("d", 0, 5, "possible", 0.53, "c")],
    }
    base = merge(streams, MergerConfig(inputs=("a", "b", "c")))
    permuted = merge(streams, MergerConfig(inputs=tuple(order)))
    assert [(o.label, o.confidence) for o in base] == [
        (o.label, o.confidence) for o in permuted
    ]


def test_whitelist_soundness_random():
    rng = random.Random(7)
    for _ in range(200):
        streams = {"a": [], "b": []}
        for idx in range(rng.randint(1, 5)):
            for name in streams:
                if rng.random() < 0.8:
                    streams[name].append(
                        ann("d", idx * 10, idx * 10 + 5, rng.choice(LABELS), rng.random(), name)
                    )
        whitelist = frozenset(rng.sample(LABELS, rng.randint(1, 3)))
        config = MergerConfig(
            inputs=("a", "b"),
            whitelist=whitelist,
            majority_voting=rng.random() < 0.5,
            apply_filter_before_merge=rng.random() < 0.5,
        )
        for out in merge(streams, config):
            assert out.label in whitelist
