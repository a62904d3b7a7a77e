"""Archive format: round trips, corruption detection, pairs parsing."""

import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_archive, random_archive
from twmd.errors import (
    CorruptionError,
    FormatError,
    PairsParseError,
    ValidationError,
)
from twmd.store import (
    PAIRS_HEADER,
    ArchiveMeta,
    EmbeddingArchive,
    EvalPair,
    SentenceMatrix,
    read_archive,
    read_pairs,
    write_archive,
)


def test_minimal_archive_roundtrip(tmp_path):
    archive = make_archive([np.array([[1.0, 0.0]])], tokens=[["hello"]])
    path = tmp_path / "one.emba"
    write_archive(archive, path)
    back = read_archive(path)
    assert back.dim == 2
    assert len(back.sentences) == 1
    assert back.sentences[0].tokens == ["hello"]
    assert back.sentences[0].vectors.shape == (1, 2)
    assert back == archive


def test_header_fields(tmp_path):
    archive = make_archive([np.ones((2, 3)), np.zeros((1, 3))])
    path = tmp_path / "two.emba"
    write_archive(archive, path)
    raw = path.read_bytes()
    assert raw[:4] == b"EMBA"
    version, dim, count, meta_len = struct.unpack_from("<IIII", raw, 4)
    assert (version, dim, count) == (1, 3, 2)
    assert meta_len == len(ArchiveMeta().to_json().encode())


def test_write_deterministic(tmp_path, rng):
    archive = random_archive(rng, n_sentences=4)
    a, b = tmp_path / "a.emba", tmp_path / "b.emba"
    write_archive(archive, a)
    write_archive(archive, b)
    assert a.read_bytes() == b.read_bytes()


def test_mixed_dims_rejected(tmp_path):
    archive = make_archive([np.ones((1, 2)), np.ones((1, 3))], dim=2)
    with pytest.raises(ValidationError):
        write_archive(archive, tmp_path / "bad.emba")


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.emba"
    path.write_bytes(b"NOPE" + b"\x00" * 32)
    with pytest.raises(FormatError):
        read_archive(path)


def test_bad_version(tmp_path):
    archive = make_archive([np.ones((1, 2))])
    path = tmp_path / "v9.emba"
    write_archive(archive, path)
    raw = bytearray(path.read_bytes())
    struct.pack_into("<I", raw, 4, 9)
    path.write_bytes(bytes(raw))
    with pytest.raises(FormatError):
        read_archive(path)


def test_truncated_tokens(tmp_path):
    """Declared token count larger than the stored records."""
    archive = make_archive([np.ones((3, 2))])
    path = tmp_path / "trunc.emba"
    write_archive(archive, path)
    raw = path.read_bytes()
    # drop the trailing vector block and final token record
    path.write_bytes(raw[: len(raw) - 4 * 3 * 2 - 6])
    with pytest.raises(CorruptionError):
        read_archive(path)


def test_trailing_garbage(tmp_path):
    archive = make_archive([np.ones((1, 2))])
    path = tmp_path / "trail.emba"
    write_archive(archive, path)
    path.write_bytes(path.read_bytes() + b"xx")
    with pytest.raises(CorruptionError):
        read_archive(path)


def test_nan_vector_rejected(tmp_path):
    archive = make_archive([np.ones((1, 2))])
    path = tmp_path / "nan.emba"
    write_archive(archive, path)
    raw = bytearray(path.read_bytes())
    struct.pack_into("<f", raw, len(raw) - 8, float("nan"))
    path.write_bytes(bytes(raw))
    with pytest.raises(ValidationError):
        read_archive(path)


def test_metadata_roundtrip(tmp_path):
    meta = ArchiveMeta(
        model="bert-base-uncased",
        layer=10,
        centering="corpus",
        centering_batch_size=32,
        normalized=True,
        transforms=["center:corpus", "normalize"],
        extra={"note": "fixture"},
    )
    archive = make_archive([np.ones((1, 2))], meta=meta)
    path = tmp_path / "meta.emba"
    write_archive(archive, path)
    assert read_archive(path).meta == meta


token_text = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",)), min_size=1, max_size=8
)


@st.composite
def archives(draw):
    dim = draw(st.integers(min_value=1, max_value=6))
    n_sentences = draw(st.integers(min_value=1, max_value=5))
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    rng = np.random.default_rng(seed)
    sentences = []
    for idx in range(n_sentences):
        length = draw(st.integers(min_value=1, max_value=4))
        tokens = draw(st.lists(token_text, min_size=length, max_size=length))
        vectors = rng.normal(size=(length, dim)).astype(np.float32)
        sentences.append(
            SentenceMatrix(tokens=tokens, vectors=vectors, sentence_id=idx)
        )
    meta = ArchiveMeta(model=draw(token_text), layer=draw(st.integers(-1, 24)))
    return EmbeddingArchive(dim=dim, sentences=sentences, meta=meta)


@settings(max_examples=40, deadline=None)
@given(archives())
def test_roundtrip_property(tmp_path_factory, archive):
    path = tmp_path_factory.mktemp("rt") / "archive.emba"
    write_archive(archive, path)
    assert read_archive(path) == archive


@settings(max_examples=40, deadline=None)
@given(archives())
def test_file_size_closed_form(tmp_path_factory, archive):
    """Silent truncation is detectable: size is fully determined by headers."""
    path = tmp_path_factory.mktemp("sz") / "archive.emba"
    write_archive(archive, path)
    expected = 4 + 16 + len(archive.meta.to_json().encode("utf-8"))
    for sent in archive.sentences:
        expected += 4
        expected += sum(2 + len(t.encode("utf-8")) for t in sent.tokens)
        expected += 4 * sent.length * archive.dim
    assert path.stat().st_size == expected


class TestReadPairs:
    def test_basic_line(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        path.write_text(PAIRS_HEADER + "\np1\t0\t1\t4.5\n")
        assert read_pairs(path) == [EvalPair("p1", 0, 1, 4.5)]

    def test_empty_after_header(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        path.write_text(PAIRS_HEADER + "\n")
        assert read_pairs(path) == []

    def test_three_fields_names_line(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        path.write_text(PAIRS_HEADER + "\np1\t0\t1\t4.5\np2\t0\t1\n")
        with pytest.raises(PairsParseError, match=":3"):
            read_pairs(path)

    def test_non_numeric_score(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        path.write_text(PAIRS_HEADER + "\np1\t0\t1\thigh\n")
        with pytest.raises(PairsParseError):
            read_pairs(path)

    def test_out_of_range_index(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        path.write_text(PAIRS_HEADER + "\np1\t0\t5\t1.0\n")
        with pytest.raises(ValidationError):
            read_pairs(path, archive_size=2)
        assert len(read_pairs(path)) == 1  # unchecked without a size

    def test_order_preserved(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        path.write_text(PAIRS_HEADER + "\nb\t1\t0\t2.0\na\t0\t1\t1.0\n")
        assert [p.pair_id for p in read_pairs(path)] == ["b", "a"]

    def test_missing_header(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        path.write_text("p1\t0\t1\t4.5\n")
        with pytest.raises(PairsParseError, match=":1"):
            read_pairs(path)
