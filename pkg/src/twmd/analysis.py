"""Correlation of metric scores against human ratings, plus the embedding
contextuality statistics (baseline / self / intra cosine similarity).

Correlation coefficients: Pearson product-moment, Spearman (Pearson on
average ranks), and Kendall tau-b (tie-corrected; human-rating data is full
of ties). Contextuality sampling is seeded and reproducible; each statistic
draws from its own spawned generator stream.
"""

from __future__ import annotations

from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats as scipy_stats

from .errors import (
    ConfigError,
    DegenerateVectorError,
    TwmdError,
    UndefinedCorrelationError,
    ValidationError,
)
from .metrics import TEMPERED_METRICS, MetricConfig, score
from .store import EmbeddingArchive, EvalPair


@dataclass
class CorrelationReport:
    pearson_r: float
    spearman_rho: float
    kendall_tau: float
    n_pairs: int

    def to_dict(self) -> dict:
        return {
            "pearson": self.pearson_r,
            "spearman": self.spearman_rho,
            "kendall": self.kendall_tau,
            "n": self.n_pairs,
        }


def _check_xy(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1:
        raise ValidationError("correlation inputs must be 1-d sequences")
    if len(x) != len(y):
        raise ValidationError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise ValidationError("need at least 2 observations")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValidationError("correlation inputs must be finite")
    return x, y


def pearson(x, y) -> float:
    """Product-moment correlation coefficient."""
    x, y = _check_xy(x, y)
    dx = x - x.mean()
    dy = y - y.mean()
    denom = np.sqrt((dx @ dx) * (dy @ dy))
    if denom == 0:
        raise UndefinedCorrelationError("zero variance in a correlation input")
    return float((dx @ dy) / denom)


def spearman(x, y) -> float:
    """Pearson correlation of the rank vectors, with average ranks on ties."""
    x, y = _check_xy(x, y)
    return pearson(
        scipy_stats.rankdata(x, method="average"),
        scipy_stats.rankdata(y, method="average"),
    )


def kendall(x, y) -> float:
    """Kendall tau-b: concordant minus discordant pairs, tie-corrected."""
    x, y = _check_xy(x, y)
    tau = scipy_stats.kendalltau(x, y, variant="b").statistic
    if not np.isfinite(tau):
        raise UndefinedCorrelationError(
            "kendall tau undefined (an input is constant)"
        )
    return float(tau)


def score_pairs(
    archive: EmbeddingArchive,
    pairs: list[EvalPair],
    config: MetricConfig,
    threads: int = 1,
) -> list[float]:
    """Metric score for every pair, in input order.

    Any scoring failure aborts the whole run, re-raised with the offending
    pair id attached. Thread count never changes values or ordering.
    """

    def one(pair: EvalPair) -> float:
        try:
            return score(archive, pair.hyp_index, pair.ref_index, config).value
        except TwmdError as exc:
            raise type(exc)(f"pair {pair.pair_id!r}: {exc}") from exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, pairs))
    return [one(pair) for pair in pairs]


def correlate(
    archive: EmbeddingArchive,
    pairs: list[EvalPair],
    config: MetricConfig,
    threads: int = 1,
) -> CorrelationReport:
    """Score every pair and correlate against the human ratings."""
    if len(pairs) < 2:
        raise ValidationError("need at least 2 pairs to correlate")
    values = np.array(score_pairs(archive, pairs, config, threads))
    human = np.array([pair.human_score for pair in pairs])
    return CorrelationReport(
        pearson_r=pearson(values, human),
        spearman_rho=spearman(values, human),
        kendall_tau=kendall(values, human),
        n_pairs=len(pairs),
    )


def pooled_correlation(entries) -> float:
    """Size-weighted mean Pearson over (report-or-r, n_pairs) entries."""
    entries = list(entries)
    if not entries:
        raise ValidationError("no reports to pool")
    total = 0.0
    weight = 0
    for report, n in entries:
        if n <= 0:
            raise ValidationError(f"pool weights must be positive, got {n}")
        r = report.pearson_r if isinstance(report, CorrelationReport) else float(report)
        total += r * n
        weight += n
    return total / weight


@dataclass
class SweepEntry:
    temperature: float
    report: CorrelationReport


@dataclass
class SweepResult:
    entries: list[SweepEntry]
    best_temperature: float


def temperature_sweep(
    archive: EmbeddingArchive,
    pairs: list[EvalPair],
    config: MetricConfig,
    temperatures,
    threads: int = 1,
) -> SweepResult:
    """One correlation report per grid temperature, plus the Pearson argmax.

    Ties keep the first (lowest-index) grid temperature, so results are
    deterministic.
    """
    if config.metric not in TEMPERED_METRICS:
        raise ConfigError(f"metric {config.metric!r} has no temperature to sweep")
    temperatures = list(temperatures)
    if not temperatures:
        raise ValidationError("temperature grid is empty")
    entries = [
        SweepEntry(t, correlate(archive, pairs, replace(config, temperature=t), threads))
        for t in temperatures
    ]
    best = max(entries, key=lambda e: e.report.pearson_r)
    return SweepResult(entries, best.temperature)


# ---------------------------------------------------------------------------
# Contextuality statistics
# ---------------------------------------------------------------------------


@dataclass
class ContextualityProfile:
    """Mean cosine similarities measuring how contextual a layer's vectors are.

    baseline: random words from two distinct sentences.
    self:     same token string in two distinct sentences (None when no
              token repeats across sentences).
    intra:    two distinct positions within one sentence.
    """

    baseline_sim: float
    self_sim: float | None
    intra_sim: float
    layer: int
    n_baseline: int
    n_self: int
    n_intra: int

    def to_dict(self) -> dict:
        return {
            "layer": self.layer,
            "baseline": self.baseline_sim,
            "self": self.self_sim,
            "intra": self.intra_sim,
            "n_baseline": self.n_baseline,
            "n_self": self.n_self,
            "n_intra": self.n_intra,
        }


def _unit_rows(archive: EmbeddingArchive) -> np.ndarray:
    flat = archive.word_matrix().astype(np.float64)
    norms = np.linalg.norm(flat, axis=1)
    if (norms == 0.0).any():
        raise DegenerateVectorError(
            "archive contains a zero-norm word vector; cosine is undefined"
        )
    return flat / norms[:, None]


def contextuality(
    archive: EmbeddingArchive, n_samples: int = 100_000, seed: int = 0
) -> ContextualityProfile:
    """Sampled baseline/self/intra cosine statistics for one archive.

    Sampling is with replacement; each statistic uses its own generator
    spawned from ``seed``, so runs are reproducible and the three statistics
    do not perturb each other.
    """
    archive.validate()
    n_sentences = len(archive.sentences)
    if n_sentences < 2:
        raise ValidationError("contextuality needs at least 2 sentences")
    if n_samples < 1:
        raise ValidationError("n_samples must be >= 1")
    unit = _unit_rows(archive)
    lengths = np.array([s.length for s in archive.sentences])
    offsets = np.concatenate([[0], np.cumsum(lengths)[:-1]])
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)]
    rng_base, rng_self, rng_intra = streams

    # baseline: words from two distinct sentences
    s1 = rng_base.integers(n_sentences, size=n_samples)
    s2 = (s1 + 1 + rng_base.integers(n_sentences - 1, size=n_samples)) % n_sentences
    f1 = offsets[s1] + rng_base.integers(0, lengths[s1])
    f2 = offsets[s2] + rng_base.integers(0, lengths[s2])
    baseline = float(np.einsum("ij,ij->i", unit[f1], unit[f2]).mean())

    # self: same token string in two distinct sentences
    occurrences: dict[str, dict[int, list[int]]] = defaultdict(lambda: defaultdict(list))
    for si, sent in enumerate(archive.sentences):
        for ti, token in enumerate(sent.tokens):
            occurrences[token][si].append(int(offsets[si]) + ti)
    repeated = [
        [(si, flats) for si, flats in by_sent.items()]
        for by_sent in occurrences.values()
        if len(by_sent) >= 2
    ]
    if repeated:
        sims = np.empty(n_samples)
        for k in range(n_samples):
            sent_groups = repeated[rng_self.integers(len(repeated))]
            a = rng_self.integers(len(sent_groups))
            b = (a + 1 + rng_self.integers(len(sent_groups) - 1)) % len(sent_groups)
            fa = sent_groups[a][1][rng_self.integers(len(sent_groups[a][1]))]
            fb = sent_groups[b][1][rng_self.integers(len(sent_groups[b][1]))]
            sims[k] = unit[fa] @ unit[fb]
        self_sim: float | None = float(sims.mean())
        n_self = n_samples
    else:
        self_sim = None
        n_self = 0

    # intra: two distinct positions within one sentence
    eligible = np.flatnonzero(lengths >= 2)
    if eligible.size == 0:
        raise ValidationError("no sentence has 2 or more tokens; intra-sim undefined")
    s = eligible[rng_intra.integers(eligible.size, size=n_samples)]
    pos_a = rng_intra.integers(0, lengths[s])
    pos_b = (pos_a + 1 + rng_intra.integers(0, lengths[s] - 1)) % lengths[s]
    intra = float(
        np.einsum("ij,ij->i", unit[offsets[s] + pos_a], unit[offsets[s] + pos_b]).mean()
    )

    return ContextualityProfile(
        baseline_sim=baseline,
        self_sim=self_sim,
        intra_sim=intra,
        layer=archive.meta.layer,
        n_baseline=n_samples,
        n_self=n_self,
        n_intra=n_samples,
    )


@dataclass
class PropertyVerdict:
    passed: bool
    values: list


def property_check(
    profiles,
    baseline_threshold: float = 0.1,
    slack: float = 0.02,
) -> dict[str, PropertyVerdict]:
    """Check the three desired cross-layer trends over per-layer profiles.

    zero_baseline:    |baseline| stays within the threshold at every layer.
    decreasing_self:  self-similarity never rises by more than ``slack``
                      from one layer to the next (fails if any layer lacks
                      a self statistic).
    increasing_intra: intra-similarity never drops by more than ``slack``.
    """
    profiles = sorted(profiles, key=lambda p: p.layer)
    if len(profiles) < 2:
        raise ValidationError("property check needs profiles from at least 2 layers")
    baselines = [p.baseline_sim for p in profiles]
    selfs = [p.self_sim for p in profiles]
    intras = [p.intra_sim for p in profiles]

    zero = all(abs(b) <= baseline_threshold for b in baselines)
    if any(s is None for s in selfs):
        decreasing = False
    else:
        decreasing = all(b <= a + slack for a, b in zip(selfs, selfs[1:]))
    increasing = all(b >= a - slack for a, b in zip(intras, intras[1:]))
    return {
        "zero_baseline": PropertyVerdict(zero, baselines),
        "decreasing_self": PropertyVerdict(decreasing, selfs),
        "increasing_intra": PropertyVerdict(increasing, intras),
    }
