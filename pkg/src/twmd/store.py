"""Data model and binary container for per-sentence token embeddings.

Archive layout (all integers little-endian):

    magic  b"EMBA"
    u32    format version (currently 1)
    u32    embedding dimension D
    u32    sentence count M
    u32    metadata byte length
    bytes  metadata, UTF-8 JSON
    M x:
        u32     token count L
        L x:    u16 byte length, then UTF-8 token bytes
        L*D:    float32 vector values, token-major (row i = vector of token i)

Writing is deterministic, so equal archives produce byte-identical files and
the total file size is a closed-form function of the header fields (which the
reader verifies to detect silent truncation).
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    CorruptionError,
    FormatError,
    PairsParseError,
    ValidationError,
)

MAGIC = b"EMBA"
FORMAT_VERSION = 1
PAIRS_HEADER = "pair_id\thyp_index\tref_index\thuman_score"

_META_FIELDS = (
    "model",
    "layer",
    "centering",
    "centering_batch_size",
    "normalized",
    "transforms",
)


@dataclass
class ArchiveMeta:
    """Provenance and transformation tags stored inside the archive file.

    ``centering`` / ``normalized`` must reflect the transforms actually
    applied; only the centering module mutates them. ``transforms`` keeps the
    applied pipeline in order. Unknown JSON keys from newer writers are kept
    in ``extra`` so they survive a round trip.
    """

    model: str = ""
    layer: int = -1
    centering: str = "none"
    centering_batch_size: int | None = None
    normalized: bool = False
    transforms: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = dict(self.extra)
        payload.update(
            model=self.model,
            layer=self.layer,
            centering=self.centering,
            centering_batch_size=self.centering_batch_size,
            normalized=self.normalized,
            transforms=self.transforms,
        )
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "ArchiveMeta":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CorruptionError(f"archive metadata is not valid JSON: {exc}") from None
        if not isinstance(payload, dict):
            raise CorruptionError("archive metadata JSON must be an object")
        extra = {k: v for k, v in payload.items() if k not in _META_FIELDS}
        return cls(
            model=payload.get("model", ""),
            layer=int(payload.get("layer", -1)),
            centering=payload.get("centering", "none"),
            centering_batch_size=payload.get("centering_batch_size"),
            normalized=bool(payload.get("normalized", False)),
            transforms=list(payload.get("transforms", [])),
            extra=extra,
        )


@dataclass(eq=False)
class SentenceMatrix:
    """One sentence: token strings plus the (L, D) float32 matrix of vectors."""

    tokens: list[str]
    vectors: np.ndarray
    sentence_id: int = 0

    @property
    def length(self) -> int:
        return len(self.tokens)

    def validate(self, dim: int | None = None) -> None:
        vec = self.vectors
        if not isinstance(vec, np.ndarray) or vec.ndim != 2:
            raise ValidationError(
                f"sentence {self.sentence_id}: vectors must be a 2-d array"
            )
        if vec.dtype != np.float32:
            raise ValidationError(
                f"sentence {self.sentence_id}: vectors must be float32, got {vec.dtype}"
            )
        if len(self.tokens) < 1:
            raise ValidationError(
                f"sentence {self.sentence_id}: must contain at least one token"
            )
        if vec.shape[0] != len(self.tokens):
            raise ValidationError(
                f"sentence {self.sentence_id}: {len(self.tokens)} tokens but "
                f"{vec.shape[0]} vector rows"
            )
        if dim is not None and vec.shape[1] != dim:
            raise ValidationError(
                f"sentence {self.sentence_id}: dimension {vec.shape[1]} does not "
                f"match archive dimension {dim}"
            )
        if vec.shape[1] < 1:
            raise ValidationError(f"sentence {self.sentence_id}: empty vectors")
        if not np.isfinite(vec).all():
            raise ValidationError(
                f"sentence {self.sentence_id}: non-finite vector entry"
            )

    def __eq__(self, other) -> bool:
        if not isinstance(other, SentenceMatrix):
            return NotImplemented
        return (
            self.tokens == other.tokens
            and self.sentence_id == other.sentence_id
            and self.vectors.dtype == other.vectors.dtype
            and self.vectors.shape == other.vectors.shape
            and np.array_equal(self.vectors, other.vectors)
        )


@dataclass(eq=False)
class EmbeddingArchive:
    """An ordered corpus of sentences sharing one embedding dimension."""

    dim: int
    sentences: list[SentenceMatrix]
    meta: ArchiveMeta = field(default_factory=ArchiveMeta)

    def validate(self) -> None:
        if self.dim < 1:
            raise ValidationError(f"archive dimension must be >= 1, got {self.dim}")
        if not self.sentences:
            raise ValidationError("archive must contain at least one sentence")
        for sent in self.sentences:
            sent.validate(self.dim)

    @property
    def total_tokens(self) -> int:
        return sum(s.length for s in self.sentences)

    def word_matrix(self) -> np.ndarray:
        """All word vectors stacked into one (sum(L_i), D) float32 array."""
        return np.concatenate([s.vectors for s in self.sentences], axis=0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EmbeddingArchive):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.meta == other.meta
            and self.sentences == other.sentences
        )


@dataclass(frozen=True)
class EvalPair:
    """One judged sentence pair: archive indices plus the human rating."""

    pair_id: str
    hyp_index: int
    ref_index: int
    human_score: float


def write_archive(archive: EmbeddingArchive, path) -> None:
    """Serialize an archive; equal inputs always yield identical bytes."""
    archive.validate()
    meta_bytes = archive.meta.to_json().encode("utf-8")
    out = bytearray()
    out += MAGIC
    out += struct.pack(
        "<IIII", FORMAT_VERSION, archive.dim, len(archive.sentences), len(meta_bytes)
    )
    out += meta_bytes
    for sent in archive.sentences:
        out += struct.pack("<I", sent.length)
        for token in sent.tokens:
            raw = token.encode("utf-8")
            if len(raw) > 0xFFFF:
                raise ValidationError(
                    f"token exceeds 65535 UTF-8 bytes: {token[:32]!r}..."
                )
            out += struct.pack("<H", len(raw))
            out += raw
        out += np.ascontiguousarray(sent.vectors, dtype="<f4").tobytes()
    Path(path).write_bytes(bytes(out))


def read_archive(path) -> EmbeddingArchive:
    """Parse and fully validate an archive file.

    Raises FormatError on bad magic or version, CorruptionError when the
    payload is shorter or longer than the header demands, ValidationError on
    non-finite vectors or impossible counts.
    """
    data = Path(path).read_bytes()
    if len(data) < 4 or data[:4] != MAGIC:
        raise FormatError(f"{path}: missing {MAGIC!r} magic bytes")
    offset = 4

    def take(n: int, what: str) -> bytes:
        nonlocal offset
        if offset + n > len(data):
            raise CorruptionError(f"{path}: truncated while reading {what}")
        chunk = data[offset : offset + n]
        offset += n
        return chunk

    version, dim, n_sentences, meta_len = struct.unpack("<IIII", take(16, "header"))
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format version {version}")
    if dim < 1:
        raise ValidationError(f"{path}: header dimension must be >= 1, got {dim}")
    if n_sentences < 1:
        raise ValidationError(f"{path}: archive must contain at least one sentence")
    try:
        meta_text = take(meta_len, "metadata").decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorruptionError(f"{path}: metadata is not UTF-8: {exc}") from None
    meta = ArchiveMeta.from_json(meta_text)

    sentences = []
    for idx in range(n_sentences):
        (token_count,) = struct.unpack("<I", take(4, f"sentence {idx} token count"))
        if token_count < 1:
            raise ValidationError(f"{path}: sentence {idx} declares zero tokens")
        tokens = []
        for t in range(token_count):
            (str_len,) = struct.unpack(
                "<H", take(2, f"sentence {idx} token {t} length")
            )
            raw = take(str_len, f"sentence {idx} token {t}")
            try:
                tokens.append(raw.decode("utf-8"))
            except UnicodeDecodeError as exc:
                raise CorruptionError(
                    f"{path}: sentence {idx} token {t} is not UTF-8: {exc}"
                ) from None
        vec_bytes = take(4 * token_count * dim, f"sentence {idx} vectors")
        vectors = (
            np.frombuffer(vec_bytes, dtype="<f4")
            .reshape(token_count, dim)
            .astype(np.float32)
        )
        sentences.append(SentenceMatrix(tokens=tokens, vectors=vectors, sentence_id=idx))
    if offset != len(data):
        raise CorruptionError(
            f"{path}: {len(data) - offset} trailing bytes after declared payload"
        )
    archive = EmbeddingArchive(dim=dim, sentences=sentences, meta=meta)
    archive.validate()
    return archive


def read_pairs(path, archive_size: int | None = None) -> list[EvalPair]:
    """Parse the evaluation-pairs TSV, preserving line order.

    When ``archive_size`` is given, sentence indices are range-checked
    against it.
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != PAIRS_HEADER:
        raise PairsParseError(f"{path}:1: expected header {PAIRS_HEADER!r}")
    pairs = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != 4:
            raise PairsParseError(
                f"{path}:{lineno}: expected 4 tab-separated fields, got {len(fields)}"
            )
        pair_id, hyp_text, ref_text, score_text = fields
        try:
            hyp_index = int(hyp_text)
            ref_index = int(ref_text)
        except ValueError:
            raise PairsParseError(
                f"{path}:{lineno}: non-integer sentence index"
            ) from None
        try:
            human_score = float(score_text)
        except ValueError:
            raise PairsParseError(
                f"{path}:{lineno}: non-numeric human score {score_text!r}"
            ) from None
        if not math.isfinite(human_score):
            raise PairsParseError(f"{path}:{lineno}: non-finite human score")
        if archive_size is not None:
            for name, idx in (("hyp_index", hyp_index), ("ref_index", ref_index)):
                if not 0 <= idx < archive_size:
                    raise ValidationError(
                        f"{path}:{lineno}: {name} {idx} out of range for archive "
                        f"of {archive_size} sentences"
                    )
        pairs.append(EvalPair(pair_id, hyp_index, ref_index, human_score))
    return pairs
