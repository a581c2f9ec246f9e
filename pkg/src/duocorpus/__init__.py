"""duocorpus: curation of small bilingual reasoning datasets, plus a
reflection analyzer for model reasoning traces."""

from .annotate import (
    Annotator,
    Difficulty,
    SampleTooLongError,
    TaskType,
    augment_reasoning,
    parse_boxed,
    translate_to_french,
)
from .assemble import (
    AssemblyError,
    DatasetManifest,
    ManifestRow,
    TrainingRecord,
    build_manifest,
    emit_dataset,
    load_manifest,
    render_training_record,
    split_assistant_content,
)
from .config import (
    ConfigError,
    CurationConfig,
    LlmSettings,
    PipelineConfig,
    SourceSpec,
    load_config,
    parse_config,
)
from .filters import (
    FilterOutcome,
    FilterReason,
    length_filter,
    partition_pools,
    purity_filter,
    run_filter_stage,
)
from .ingest import (
    InteractionType,
    Language,
    Message,
    Role,
    Sample,
    build_sample,
    dedup,
    decontaminate,
    load_corpus,
    normalize_text,
    read_samples_jsonl,
    write_samples_jsonl,
)
from .langid import FastTextScorer, StopwordScorer, make_scorer
from .llm import (
    AnnotationCache,
    AnnotationError,
    BudgetExhaustedError,
    BudgetMeter,
    ChatCompletionClient,
    LlmRequest,
    LlmResponse,
    MockLlmClient,
    make_client,
)
from .pipeline import Pipeline, PipelineError, StageState
from .reflection import (
    DEFAULT_REFLECTION_KEYWORDS,
    Correctness,
    DistributionRow,
    EquivalenceRule,
    Finish,
    ReflectionReport,
    ThinkSplit,
    TraceRecord,
    VariantRow,
    aggregate,
    analyze_predictions,
    analyze_trace,
    classify_response,
    count_reflections,
    extract_answer,
    extract_think_span,
    load_predictions,
    parse_boxed_spans,
    write_distribution_csv,
    write_report_json,
    write_variant_csv,
)
from .sampler import (
    InfeasibleCorpusError,
    SelectionResult,
    build_bilingual_dataset,
    check_distribution,
    expected_reasoning_count,
    solve_reasoning_weight,
    weighted_sample_without_replacement,
)
from .synth import CorpusSpec, generate_corpus
from .tokencount import ReferenceTokenizer, make_tokenizer

__version__ = "0.1.0"

__all__ = [
    "AnnotationCache",
    "AnnotationError",
    "Annotator",
    "AssemblyError",
    "BudgetExhaustedError",
    "BudgetMeter",
    "ChatCompletionClient",
    "ConfigError",
    "CorpusSpec",
    "Correctness",
    "CurationConfig",
    "DEFAULT_REFLECTION_KEYWORDS",
    "DatasetManifest",
    "Difficulty",
    "DistributionRow",
    "EquivalenceRule",
    "FastTextScorer",
    "FilterOutcome",
    "FilterReason",
    "Finish",
    "InfeasibleCorpusError",
    "InteractionType",
    "Language",
    "LlmRequest",
    "LlmResponse",
    "LlmSettings",
    "ManifestRow",
    "Message",
    "MockLlmClient",
    "Pipeline",
    "PipelineConfig",
    "PipelineError",
    "ReferenceTokenizer",
    "ReflectionReport",
    "Role",
    "Sample",
    "SampleTooLongError",
    "SelectionResult",
    "SourceSpec",
    "StageState",
    "StopwordScorer",
    "TaskType",
    "ThinkSplit",
    "TraceRecord",
    "TrainingRecord",
    "VariantRow",
    "aggregate",
    "analyze_predictions",
    "analyze_trace",
    "augment_reasoning",
    "classify_response",
    "build_bilingual_dataset",
    "build_manifest",
    "build_sample",
    "check_distribution",
    "count_reflections",
    "decontaminate",
    "dedup",
    "emit_dataset",
    "expected_reasoning_count",
    "extract_answer",
    "extract_think_span",
    "generate_corpus",
    "length_filter",
    "load_config",
    "load_corpus",
    "load_manifest",
    "load_predictions",
    "make_client",
    "make_scorer",
    "make_tokenizer",
    "normalize_text",
    "parse_boxed",
    "parse_boxed_spans",
    "parse_config",
    "partition_pools",
    "purity_filter",
    "read_samples_jsonl",
    "render_training_record",
    "run_filter_stage",
    "solve_reasoning_weight",
    "split_assistant_content",
    "translate_to_french",
    "weighted_sample_without_replacement",
    "write_distribution_csv",
    "write_report_json",
    "write_samples_jsonl",
    "write_variant_csv",
]
