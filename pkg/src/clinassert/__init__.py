"""Clinical assertion status detection toolkit.

Rule-based annotators (a NegEx-style negation detector and a configurable
contextual assertion engine), a multi-annotator merger with whitelists and
majority voting, and a span-overlap evaluation harness, all sharing one
JSON-lines schema family.
"""

from clinassert.contextual import (
    ContextualRule,
    RegexPattern,
    RuleSet,
    compile_rules,
    contextual_annotate,
    load_rules,
)
from clinassert.errors import (
    AlignmentError,
    ClinassertError,
    ConfigError,
    EmptyEvalError,
    ParseError,
    PatternError,
    UnmappedLabelError,
)
from clinassert.evaluation import (
    EvalReport,
    LabelMap,
    LatencyStats,
    MatchCategory,
    MatchResult,
    UnmappedPolicy,
    bench,
    load_label_map,
    map_labels,
    match_spans,
    score,
)
from clinassert.merger import (
    MergerConfig,
    PipelineConfig,
    PipelineStage,
    load_pipeline,
    merge,
    run_pipeline,
)
from clinassert.negex import CueKind, NegexConfig, NegexCue, load_negex_cues, negex_annotate
from clinassert.text import align_chunk, split_sentences, tokenize
from clinassert.types import (
    ABSENT,
    ASSOCIATED_WITH_SOMEONE_ELSE,
    CANONICAL_LABELS,
    CONDITIONAL,
    HYPOTHETICAL,
    POSSIBLE,
    PRESENT,
    Annotation,
    Chunk,
    Document,
    Sentence,
    Token,
    is_canonical,
)

__version__ = "0.1.0"
SCHEMA_VERSION = "1"

__all__ = [
    "ABSENT",
    "ASSOCIATED_WITH_SOMEONE_ELSE",
    "AlignmentError",
    "Annotation",
    "CANONICAL_LABELS",
    "CONDITIONAL",
    "Chunk",
    "ClinassertError",
    "ConfigError",
    "ContextualRule",
    "CueKind",
    "Document",
    "EmptyEvalError",
    "EvalReport",
    "HYPOTHETICAL",
    "LabelMap",
    "LatencyStats",
    "MatchCategory",
    "MatchResult",
    "MergerConfig",
    "NegexConfig",
    "NegexCue",
    "POSSIBLE",
    "PRESENT",
    "ParseError",
    "PatternError",
    "PipelineConfig",
    "PipelineStage",
    "RegexPattern",
    "RuleSet",
    "SCHEMA_VERSION",
    "Sentence",
    "Token",
    "UnmappedLabelError",
    "UnmappedPolicy",
    "align_chunk",
    "bench",
    "compile_rules",
    "contextual_annotate",
    "is_canonical",
    "load_label_map",
    "load_negex_cues",
    "load_pipeline",
    "load_rules",
    "map_labels",
    "match_spans",
    "merge",
    "negex_annotate",
    "run_pipeline",
    "score",
    "split_sentences",
    "tokenize",
]
