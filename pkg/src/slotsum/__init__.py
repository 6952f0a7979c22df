"""Facts-template summarization toolkit.

Decomposes entity summaries into fact-agnostic templates plus fact
values, fills templates back from documents and external knowledge, and
ships the corpus construction, evaluation, and CLI glue around that
pipeline.
"""

from .backends import (
    Backend,
    BackendRequest,
    BackendResponse,
    ExtractiveBaseline,
    RemoteBackend,
)
from .dataset import (
    MatchCandidate,
    StatsReport,
    augment_input,
    corpus_stats,
    join_corpora,
    match_entries,
    parse_kv,
    read_records,
    serialize_keys,
    serialize_kv,
    split_corpus,
    write_records,
)
from .errors import (
    BackendError,
    BackendProtocolError,
    BackendStatusError,
    BackendTimeoutError,
    DataError,
    DuplicateKeyError,
    MarkupInjectionError,
    SlotsumError,
    TemplateParseError,
)
from .estimators import SlotSummarizer, TemplateBuilder
from .evalkit import (
    EvaluationReport,
    FactAccuracyScore,
    GeneratedOutput,
    RougeScore,
    evaluate_corpus,
    rouge_l,
    rouge_n,
    slot_fact_accuracy,
)
from .simtext import (
    indel_distance,
    indel_similarity,
    jaccard_bow,
    sorted_indel_sim,
    sorted_join,
    tokenize,
)
from .slotfill import (
    Correction,
    CorrectionMap,
    FillPlan,
    SlotFill,
    SummarizeResult,
    apply_strategy,
    correct_slots,
    format_slot_query,
    predict_slots,
    summarize,
)
from .templater import (
    SpanMatch,
    TemplateBuildReport,
    best_matching_span,
    build_golden_template,
    make_slot_markup,
    parse_template,
    parse_template_lenient,
    render,
)
from .types import (
    Config,
    CorpusRecord,
    Document,
    DocumentSet,
    Entity,
    FactPair,
    FactSet,
    LiteralText,
    Slot,
    SummaryText,
    Template,
)

__version__ = "0.1.0"

__all__ = [
    "Backend",
    "BackendError",
    "BackendProtocolError",
    "BackendRequest",
    "BackendResponse",
    "BackendStatusError",
    "BackendTimeoutError",
    "Config",
    "CorpusRecord",
    "Correction",
    "CorrectionMap",
    "DataError",
    "Document",
    "DocumentSet",
    "DuplicateKeyError",
    "Entity",
    "EvaluationReport",
    "ExtractiveBaseline",
    "FactAccuracyScore",
    "FactPair",
    "FactSet",
    "FillPlan",
    "GeneratedOutput",
    "LiteralText",
    "MarkupInjectionError",
    "MatchCandidate",
    "RemoteBackend",
    "RougeScore",
    "Slot",
    "SlotFill",
    "SlotSummarizer",
    "SlotsumError",
    "SpanMatch",
    "StatsReport",
    "SummarizeResult",
    "SummaryText",
    "Template",
    "TemplateBuildReport",
    "TemplateBuilder",
    "TemplateParseError",
    "apply_strategy",
    "augment_input",
    "best_matching_span",
    "build_golden_template",
    "corpus_stats",
    "correct_slots",
    "evaluate_corpus",
    "format_slot_query",
    "indel_distance",
    "indel_similarity",
    "jaccard_bow",
    "join_corpora",
    "make_slot_markup",
    "match_entries",
    "parse_kv",
    "parse_template",
    "parse_template_lenient",
    "predict_slots",
    "read_records",
    "render",
    "rouge_l",
    "rouge_n",
    "serialize_keys",
    "serialize_kv",
    "slot_fact_accuracy",
    "sorted_indel_sim",
    "sorted_join",
    "split_corpus",
    "summarize",
    "tokenize",
    "write_records",
]
