"""The normalized similarity-metric family over bags of word vectors.

Each metric is a pairing function C(X1, X2) between two sentences' word
matrices; the reported score is either raw C or the normalized form
C12 / sqrt(C11 * C22), which pins self-similarity at 1. Directional metrics
come in a recall flavor (hypothesis words matched against the reference),
a precision flavor (arguments swapped), and an F1 flavor (harmonic mean).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, NormalizationError, ValidationError
from .store import EmbeddingArchive
from .transport import (
    exact_wmd,
    plan_objective,
    similarity_matrix,
    sinkhorn,
)

METRIC_NAMES = (
    "sbert",
    "cka",
    "moverscore",
    "bertscore_recall",
    "bertscore_precision",
    "bertscore_f1",
    "twmd",
    "trwmd",
    "twmd_precision",
    "trwmd_precision",
    "twmd_f1",
    "trwmd_f1",
)

TEMPERED_METRICS = frozenset(
    {"twmd", "trwmd", "twmd_precision", "trwmd_precision", "twmd_f1", "trwmd_f1"}
)
TWMD_FAMILY = frozenset({"twmd", "twmd_precision", "twmd_f1"})
F1_METRICS = frozenset({"bertscore_f1", "twmd_f1", "trwmd_f1"})
REQUIRES_UNIT_NORM = frozenset(
    {"bertscore_recall", "bertscore_precision", "bertscore_f1"}
)

# Temperatures tuned on held-out WMT-15/16 judgments; keyed by
# (metric, corpus/batch-centered word vectors).
DEFAULT_TEMPERATURES = {
    ("twmd", False): 0.02,
    ("twmd", True): 0.10,
    ("trwmd", False): 0.02,
    ("trwmd", True): 0.15,
    ("twmd_precision", False): 0.02,
    ("twmd_precision", True): 0.10,
    ("trwmd_precision", False): 0.02,
    ("trwmd_precision", True): 0.15,
    ("twmd_f1", False): 0.01,
    ("twmd_f1", True): 0.08,
    ("trwmd_f1", False): 0.01,
    ("trwmd_f1", True): 0.06,
}


@dataclass
class MetricConfig:
    """Metric choice plus the knobs that change its value.

    ``temperature`` applies to tempered metrics only; when omitted it is
    resolved from DEFAULT_TEMPERATURES based on whether the archive is
    corpus/batch centered. ``sinkhorn_iters`` and ``include_entropy`` apply
    to the twmd family only.
    """

    metric: str
    temperature: float | None = None
    sinkhorn_iters: int = 1
    normalize: bool = True
    include_entropy: bool = False

    def validate(self) -> None:
        if self.metric not in METRIC_NAMES:
            raise ConfigError(
                f"unknown metric {self.metric!r}; expected one of {METRIC_NAMES}"
            )
        if self.temperature is not None:
            if self.metric not in TEMPERED_METRICS:
                raise ConfigError(f"metric {self.metric!r} takes no temperature")
            if self.temperature <= 0:
                raise ConfigError(
                    f"temperature must be positive, got {self.temperature}"
                )
        if self.sinkhorn_iters < 1:
            raise ConfigError(f"sinkhorn_iters must be >= 1, got {self.sinkhorn_iters}")
        if self.sinkhorn_iters != 1 and self.metric not in TWMD_FAMILY:
            raise ConfigError("sinkhorn_iters applies to twmd metrics only")
        if self.include_entropy and self.metric not in TWMD_FAMILY:
            raise ConfigError("include_entropy applies to twmd metrics only")

    def resolved_temperature(self, corpus_centered: bool = False) -> float | None:
        if self.metric not in TEMPERED_METRICS:
            return None
        if self.temperature is not None:
            return self.temperature
        return DEFAULT_TEMPERATURES[(self.metric, corpus_centered)]


@dataclass
class SimilarityScore:
    """Final score plus, when available, the (C12, C11, C22) triple."""

    value: float
    components: tuple[float, float, float] | None = None


def normalized_sim(c12: float, c11: float, c22: float) -> float:
    """c12 / sqrt(c11 * c22); self-terms must be positive."""
    if c11 <= 0 or c22 <= 0:
        raise NormalizationError(
            f"nonpositive self-similarity terms (C11={c11}, C22={c22})"
        )
    return c12 / math.sqrt(c11 * c22)


def _words(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValidationError("sentence matrix must be 2-d with at least one word")
    return x


def sbert_c(words1, words2) -> float:
    """Inner product of the two mean-pooled sentence vectors."""
    x1, x2 = _words(words1), _words(words2)
    if x1.shape[1] != x2.shape[1]:
        raise ValidationError(f"dimension mismatch: {x1.shape[1]} vs {x2.shape[1]}")
    return float(x1.mean(axis=0) @ x2.mean(axis=0))


def cka_c(words1, words2) -> float:
    """Sum of squared pairwise inner products, Tr(X1 X1' X2 X2').

    Assumes the caller already applied dimension-mean centering to the
    word vectors (see the centering module).
    """
    gram = similarity_matrix(words1, words2)
    return float((gram * gram).sum())


def moverscore_c(words1, words2) -> float:
    """Optimal transport value between the two word bags (exact LP)."""
    value, _ = exact_wmd(similarity_matrix(words1, words2))
    return value


def bertscore_recall_c(words1, words2) -> float:
    """Mean best-match similarity of each hypothesis word in the reference.

    Equals the optimum of the one-constraint (relaxed) transport problem.
    Assumes unit-normalized word vectors.
    """
    sims = similarity_matrix(words1, words2)
    return float(sims.max(axis=1).mean())


def bertscore_precision_c(words1, words2) -> float:
    return bertscore_recall_c(words2, words1)


def f1_combine(precision: float, recall: float) -> float:
    """Harmonic mean, with 0 when the sum vanishes."""
    total = precision + recall
    if total == 0:
        return 0.0
    return 2.0 * precision * recall / total


def bertscore_f1_c(words1, words2) -> float:
    return f1_combine(
        bertscore_precision_c(words1, words2), bertscore_recall_c(words1, words2)
    )


def twmd_c(
    words1,
    words2,
    temperature: float,
    iters: int = 1,
    include_entropy: bool = False,
) -> float:
    """Tempered transport value via Sinkhorn scaling.

    A single iteration is the default and is already effective; the entropy
    term is excluded from the reported value unless requested.
    """
    sims = similarity_matrix(words1, words2)
    plan = sinkhorn(sims, temperature, iters)
    return plan_objective(plan, sims, temperature, include_entropy)


def trwmd_c(words1, words2, temperature: float) -> float:
    """Closed-form tempered relaxed transport value.

    C = (T / L1) * sum_i log sum_j exp(sims[i, j] / T), evaluated with a
    max-shift per row so tiny temperatures stay finite. As T goes to 0 this
    approaches the best-match recall value.
    """
    if temperature <= 0:
        raise ValidationError(f"temperature must be positive, got {temperature}")
    sims = similarity_matrix(words1, words2)
    row_max = sims.max(axis=1)
    shifted = np.exp((sims - row_max[:, None]) / temperature).sum(axis=1)
    return float((row_max + temperature * np.log(shifted)).mean())


def _directional_c(metric: str, x1, x2, config: MetricConfig, temperature) -> float:
    """C for non-F1 metrics; precision variants swap the arguments."""
    if metric == "sbert":
        return sbert_c(x1, x2)
    if metric == "cka":
        return cka_c(x1, x2)
    if metric == "moverscore":
        return moverscore_c(x1, x2)
    if metric == "bertscore_recall":
        return bertscore_recall_c(x1, x2)
    if metric == "bertscore_precision":
        return bertscore_recall_c(x2, x1)
    if metric == "twmd":
        return twmd_c(x1, x2, temperature, config.sinkhorn_iters, config.include_entropy)
    if metric == "twmd_precision":
        return twmd_c(x2, x1, temperature, config.sinkhorn_iters, config.include_entropy)
    if metric == "trwmd":
        return trwmd_c(x1, x2, temperature)
    if metric == "trwmd_precision":
        return trwmd_c(x2, x1, temperature)
    raise ConfigError(f"unknown metric {metric!r}")


def _f1_base(metric: str) -> str:
    return {"bertscore_f1": "bertscore_recall", "twmd_f1": "twmd", "trwmd_f1": "trwmd"}[
        metric
    ]


def score(
    archive: EmbeddingArchive,
    hyp_index: int,
    ref_index: int,
    config: MetricConfig,
) -> SimilarityScore:
    """Score one archive sentence pair under the configured metric.

    Deterministic; raises ConfigError when the metric needs unit-normalized
    vectors but the archive is not tagged as normalized.
    """
    config.validate()
    n_sentences = len(archive.sentences)
    for name, idx in (("hyp_index", hyp_index), ("ref_index", ref_index)):
        if not 0 <= idx < n_sentences:
            raise ValidationError(
                f"{name} {idx} out of range for archive of {n_sentences} sentences"
            )
    if config.metric in REQUIRES_UNIT_NORM and not archive.meta.normalized:
        raise ConfigError(
            f"metric {config.metric!r} requires unit-normalized word vectors; "
            "apply normalization first"
        )
    x1 = archive.sentences[hyp_index].vectors.astype(np.float64)
    x2 = archive.sentences[ref_index].vectors.astype(np.float64)
    corpus_centered = archive.meta.centering == "corpus"
    temperature = config.resolved_temperature(corpus_centered)

    if config.metric in F1_METRICS:
        base = _f1_base(config.metric)
        base_config = replace(config, metric=base)
        c_recall = _directional_c(base, x1, x2, base_config, temperature)
        c_precision = _directional_c(base, x2, x1, base_config, temperature)
        if config.normalize:
            c11 = _directional_c(base, x1, x1, base_config, temperature)
            c22 = _directional_c(base, x2, x2, base_config, temperature)
            recall = normalized_sim(c_recall, c11, c22)
            precision = normalized_sim(c_precision, c22, c11)
        else:
            recall, precision = c_recall, c_precision
        return SimilarityScore(f1_combine(precision, recall), None)

    c12 = _directional_c(config.metric, x1, x2, config, temperature)
    if not config.normalize:
        return SimilarityScore(c12, None)
    c11 = _directional_c(config.metric, x1, x1, config, temperature)
    c22 = _directional_c(config.metric, x2, x2, config, temperature)
    return SimilarityScore(normalized_sim(c12, c11, c22), (c12, c11, c22))
