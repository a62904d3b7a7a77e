"""Embedding-based text similarity metrics with tempered word-mover transport."""

from .analysis import (
    ContextualityProfile,
    CorrelationReport,
    PropertyVerdict,
    SweepResult,
    contextuality,
    correlate,
    kendall,
    pearson,
    pooled_correlation,
    property_check,
    score_pairs,
    spearman,
    temperature_sweep,
)
from .centering import (
    CenteringMode,
    apply_centering,
    center_corpus,
    center_dimension,
    center_sentence,
    normalize_words,
)
from .errors import TwmdError
from .metrics import (
    METRIC_NAMES,
    MetricConfig,
    SimilarityScore,
    bertscore_recall_c,
    cka_c,
    moverscore_c,
    normalized_sim,
    sbert_c,
    score,
    trwmd_c,
    twmd_c,
)
from .store import (
    ArchiveMeta,
    EmbeddingArchive,
    EvalPair,
    SentenceMatrix,
    read_archive,
    read_pairs,
    write_archive,
)
from .transport import (
    SinkhornResult,
    TransportPlan,
    exact_wmd,
    plan_objective,
    similarity_matrix,
    sinkhorn,
    sinkhorn_converged,
)

__version__ = "0.1.0"
