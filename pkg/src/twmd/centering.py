"""Word-vector centering schemes and unit-norm pre-normalization.

Three centering variants are supported, differing only in which mean gets
subtracted from each word vector:

* dimension: the scalar mean over the vector's own D coordinates,
* sentence:  the mean word vector of the sentence the word belongs to,
* corpus:    the mean word vector of the whole corpus, optionally
             approximated batch-wise over seeded-shuffled sentence groups.

All transforms are pure: they return a new archive with updated metadata
tags and never mutate their input. Arithmetic runs in float64 and is cast
back to the archive's float32 storage dtype.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateVectorError, ValidationError
from .store import ArchiveMeta, EmbeddingArchive, SentenceMatrix

CENTERING_KINDS = ("none", "dimension", "sentence", "corpus")


@dataclass(frozen=True)
class CenteringMode:
    """Which mean to subtract; ``batch_size`` applies to corpus mode only."""

    kind: str
    batch_size: int | None = None

    def validate(self) -> None:
        if self.kind not in CENTERING_KINDS:
            raise ValidationError(
                f"unknown centering kind {self.kind!r}; expected one of {CENTERING_KINDS}"
            )
        if self.batch_size is not None:
            if self.kind != "corpus":
                raise ValidationError("batch_size is only meaningful for corpus centering")
            if self.batch_size < 2:
                raise ValidationError(f"batch_size must be >= 2, got {self.batch_size}")


def _retag(
    meta: ArchiveMeta,
    transform: str,
    centering: str | None = None,
    batch_size: int | None = None,
    normalized: bool | None = None,
) -> ArchiveMeta:
    return replace(
        meta,
        centering=meta.centering if centering is None else centering,
        centering_batch_size=(
            meta.centering_batch_size if centering is None else batch_size
        ),
        normalized=meta.normalized if normalized is None else normalized,
        transforms=[*meta.transforms, transform],
        extra=dict(meta.extra),
    )


def _rebuild(archive: EmbeddingArchive, vectors: list[np.ndarray], meta: ArchiveMeta) -> EmbeddingArchive:
    sentences = [
        SentenceMatrix(
            tokens=list(sent.tokens),
            vectors=vec.astype(np.float32),
            sentence_id=sent.sentence_id,
        )
        for sent, vec in zip(archive.sentences, vectors)
    ]
    return EmbeddingArchive(dim=archive.dim, sentences=sentences, meta=meta)


def center_dimension(archive: EmbeddingArchive) -> EmbeddingArchive:
    """Subtract from each word vector the scalar mean of its own coordinates."""
    archive.validate()
    out = []
    for sent in archive.sentences:
        v = sent.vectors.astype(np.float64)
        out.append(v - v.mean(axis=1, keepdims=True))
    meta = _retag(archive.meta, "center:dimension", centering="dimension")
    return _rebuild(archive, out, meta)


def center_sentence(archive: EmbeddingArchive) -> EmbeddingArchive:
    """Subtract from each word the mean word vector of its sentence."""
    archive.validate()
    out = []
    for sent in archive.sentences:
        v = sent.vectors.astype(np.float64)
        out.append(v - v.mean(axis=0, keepdims=True))
    meta = _retag(archive.meta, "center:sentence", centering="sentence")
    return _rebuild(archive, out, meta)


def center_corpus(
    archive: EmbeddingArchive,
    batch_size: int | None = None,
    seed: int = 0,
) -> EmbeddingArchive:
    """Subtract the corpus (or batch) word mean from every word vector.

    With ``batch_size`` absent the whole archive is one batch and the grand
    word mean goes to zero. Otherwise sentences are shuffled with ``seed``,
    split into consecutive groups of at most ``batch_size`` sentences, and
    each group is centered by its own word mean. Sentence order in the
    output archive is unchanged; only the grouping is shuffled.
    """
    archive.validate()
    CenteringMode("corpus", batch_size).validate()
    n_sentences = len(archive.sentences)
    if batch_size is None:
        groups = [list(range(n_sentences))]
        transform = "center:corpus"
    else:
        order = np.random.default_rng(seed).permutation(n_sentences)
        groups = [
            list(order[start : start + batch_size])
            for start in range(0, n_sentences, batch_size)
        ]
        transform = f"center:corpus(batch_size={batch_size},seed={seed})"

    out: list[np.ndarray] = [None] * n_sentences  # type: ignore[list-item]
    for group in groups:
        total = np.zeros(archive.dim, dtype=np.float64)
        count = 0
        for idx in group:
            v = archive.sentences[idx].vectors.astype(np.float64)
            total += v.sum(axis=0)
            count += v.shape[0]
        mean = total / count
        for idx in group:
            out[idx] = archive.sentences[idx].vectors.astype(np.float64) - mean

    meta = _retag(archive.meta, transform, centering="corpus", batch_size=batch_size)
    return _rebuild(archive, out, meta)


def normalize_words(archive: EmbeddingArchive) -> EmbeddingArchive:
    """Scale every word vector to unit Euclidean norm.

    A zero vector has no direction; silently keeping it would corrupt
    downstream transport marginals, so it raises instead (this can happen
    after sentence centering of a one-word sentence).
    """
    archive.validate()
    out = []
    for sent in archive.sentences:
        v = sent.vectors.astype(np.float64)
        norms = np.linalg.norm(v, axis=1)
        bad = np.flatnonzero(norms == 0.0)
        if bad.size:
            t = int(bad[0])
            raise DegenerateVectorError(
                f"zero-norm word vector at sentence {sent.sentence_id}, "
                f"token {t} ({sent.tokens[t]!r}); cannot normalize"
            )
        out.append(v / norms[:, None])
    meta = _retag(archive.meta, "normalize", normalized=True)
    return _rebuild(archive, out, meta)


def apply_centering(
    archive: EmbeddingArchive, mode: CenteringMode, seed: int = 0
) -> EmbeddingArchive:
    """Dispatch to the centering implementation named by ``mode``."""
    mode.validate()
    if mode.kind == "none":
        return archive
    if mode.kind == "dimension":
        return center_dimension(archive)
    if mode.kind == "sentence":
        return center_sentence(archive)
    return center_corpus(archive, batch_size=mode.batch_size, seed=seed)
