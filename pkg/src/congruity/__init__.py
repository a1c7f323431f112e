"""Incongruence-aware training signals and person-centered response evaluation.

Subpackages by concern:

- corpus: dialogue-pair data model, JSONL ingestion, validation, statistics
- embeddings: static word vectors, pooled text embeddings, cosine
- incongruence: continuous incongruence score and bounded loss weights
- masking: context dropout, emotion-term masking, deterministic epoch plans
- metrics: marker-lexicon evaluation suite and semantic token matching
- stats: Welch's t, Cohen's d, kappa, and report tables
- cli: batch command-line entry point
"""

from .corpus import (
    AnnotationRecord,
    Corpus,
    CorpusError,
    CorpusStats,
    DialoguePair,
    EngagementBand,
    IncongruenceKind,
    Speaker,
    Utterance,
    VadAnnotation,
    Violation,
    corpus_stats,
    engagement_band,
    load_corpus,
    validate_record,
    write_corpus,
)
from .embeddings import (
    PooledEmbedding,
    VectorStore,
    VectorStoreError,
    cosine,
    embed_text,
    load_vectors,
    tokenize,
)
from .incongruence import (
    ConfigError,
    SampleSignals,
    Scheme,
    SignalsError,
    WeightConfig,
    WeightedBatch,
    batch_tau,
    binary_weight,
    engagement_weight,
    incongruence_score,
    normalize_batch,
    read_signals,
    sample_weight,
    vad_mismatch,
    weigh_batch,
    weighted_objective,
)
from .masking import (
    EpochPlan,
    MaskLexicon,
    PlanEntry,
    default_mask_lexicon,
    dropout_decision,
    load_mask_lexicon,
    mask_context,
    plan_epoch,
    sample_stream,
    strip_vad,
    write_plan,
)
from .metrics import (
    CorpusScores,
    MarkerLexicons,
    MetricScore,
    RogersScores,
    SemanticPRF,
    empathic_authenticity,
    load_marker_lexicons,
    pct_adherence,
    question_density,
    read_responses,
    responsive_engagement,
    rogers_conditions,
    score_corpus,
    score_response,
    semantic_prf,
    therapeutic_concision,
)
from .stats import (
    AgreementRow,
    AlignmentError,
    Comparison,
    Summary,
    agreement_report,
    cohens_d,
    cohens_kappa,
    comparison_report,
    percent_agreement,
    percent_change,
    summarize,
    welch_test,
)

__version__ = "0.1.0"
