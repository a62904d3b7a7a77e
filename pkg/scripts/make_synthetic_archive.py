#!/usr/bin/env python3
"""Generate a synthetic embedding archive plus a judged-pairs table.

Sentences are noisy bags drawn around latent topic vectors; the planted
human score of a pair is the cosine of the topic vectors it was drawn from,
so metric/rating correlations are meaningfully positive. Handy for demoing
the CLI without a transformer checkpoint:

    python3 scripts/make_synthetic_archive.py --out-dir demo --sentences 60
    twmd center demo/synthetic.emba --center corpus --normalize \
        --out demo/centered.emba
    twmd correlate demo/centered.emba demo/pairs.tsv --metric twmd \
        --out demo/report.json
"""

import argparse
from pathlib import Path

import numpy as np

from twmd.store import (
    ArchiveMeta,
    EmbeddingArchive,
    PAIRS_HEADER,
    SentenceMatrix,
    write_archive,
)

VOCAB = [
    "river", "stone", "cloud", "market", "engine", "violin", "harbor",
    "lantern", "meadow", "circuit", "anchor", "thread", "ember", "signal",
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", type=Path, default=Path("demo"))
    parser.add_argument("--sentences", type=int, default=60)
    parser.add_argument("--pairs", type=int, default=120)
    parser.add_argument("--dim", type=int, default=32)
    parser.add_argument("--topics", type=int, default=6)
    parser.add_argument("--noise", type=float, default=0.6)
    parser.add_argument("--anisotropy", type=float, default=1.5,
                        help="shared offset magnitude added to every word")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    topics = rng.normal(size=(args.topics, args.dim))
    topics /= np.linalg.norm(topics, axis=1, keepdims=True)
    # a common offset mimics the anisotropic cone of contextual embeddings,
    # which is what corpus centering is supposed to remove
    offset = args.anisotropy * rng.normal(size=args.dim) / np.sqrt(args.dim)

    sentences = []
    topic_of = []
    for idx in range(args.sentences):
        topic = int(rng.integers(args.topics))
        topic_of.append(topic)
        length = int(rng.integers(3, 9))
        words = (
            topics[topic]
            + args.noise * rng.normal(size=(length, args.dim)) / np.sqrt(args.dim)
            + offset
        )
        tokens = [VOCAB[int(t)] for t in rng.integers(len(VOCAB), size=length)]
        sentences.append(
            SentenceMatrix(
                tokens=tokens,
                vectors=words.astype(np.float32),
                sentence_id=idx,
            )
        )
    archive = EmbeddingArchive(
        dim=args.dim,
        sentences=sentences,
        meta=ArchiveMeta(model="synthetic-topics", layer=0),
    )

    rows = [PAIRS_HEADER]
    for k in range(args.pairs):
        hyp, ref = rng.integers(args.sentences, size=2)
        rating = float(topics[topic_of[hyp]] @ topics[topic_of[ref]])
        rows.append(f"pair{k:04d}\t{hyp}\t{ref}\t{rating:.6f}")

    args.out_dir.mkdir(parents=True, exist_ok=True)
    archive_path = args.out_dir / "synthetic.emba"
    pairs_path = args.out_dir / "pairs.tsv"
    write_archive(archive, archive_path)
    pairs_path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    print(f"wrote {archive_path} ({args.sentences} sentences, dim {args.dim})")
    print(f"wrote {pairs_path} ({args.pairs} pairs)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
