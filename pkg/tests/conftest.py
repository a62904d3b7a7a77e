import numpy as np
import pytest

from twmd.store import ArchiveMeta, EmbeddingArchive, SentenceMatrix


def make_sentence(vectors, tokens=None, sentence_id=0):
    vectors = np.asarray(vectors, dtype=np.float32)
    if vectors.ndim == 1:
        vectors = vectors[None, :]
    if tokens is None:
        tokens = [f"tok{i}" for i in range(vectors.shape[0])]
    return SentenceMatrix(tokens=list(tokens), vectors=vectors, sentence_id=sentence_id)


def make_archive(sentence_vectors, tokens=None, meta=None, dim=None):
    """Archive from a list of per-sentence vector arrays (rows = words)."""
    sentences = []
    for idx, vec in enumerate(sentence_vectors):
        toks = None if tokens is None else tokens[idx]
        sentences.append(make_sentence(vec, tokens=toks, sentence_id=idx))
    if dim is None:
        dim = sentences[0].vectors.shape[1]
    return EmbeddingArchive(dim=dim, sentences=sentences, meta=meta or ArchiveMeta())


def random_archive(
    rng,
    n_sentences=6,
    dim=8,
    max_len=5,
    min_len=1,
    normalized=False,
    token_pool=None,
):
    """Seeded archive of Gaussian word vectors, optionally unit-normalized."""
    sentences = []
    for idx in range(n_sentences):
        length = int(rng.integers(min_len, max_len + 1))
        vec = rng.normal(size=(length, dim))
        if normalized:
            vec = vec / np.linalg.norm(vec, axis=1, keepdims=True)
        if token_pool is None:
            tokens = [f"w{idx}_{k}" for k in range(length)]
        else:
            tokens = [token_pool[int(t)] for t in rng.integers(len(token_pool), size=length)]
        sentences.append(make_sentence(vec, tokens=tokens, sentence_id=idx))
    meta = ArchiveMeta(model="synthetic", layer=0, normalized=normalized)
    return EmbeddingArchive(dim=dim, sentences=sentences, meta=meta)


def random_unit_words(rng, length, dim):
    vec = rng.normal(size=(length, dim))
    return vec / np.linalg.norm(vec, axis=1, keepdims=True)


@pytest.fixture
def rng():
    return np.random.default_rng(20240615)
