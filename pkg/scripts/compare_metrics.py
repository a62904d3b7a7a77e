#!/usr/bin/env python3
"""Run the metric x centering grid on one archive/pairs dataset.

Prints a Pearson/Spearman table in the usual benchmark layout: one row per
metric, one column per centering scheme (uncentered, dimension, sentence,
corpus/batch). Sentence centering is skipped for the mean-pooling metric,
whose pooled vectors would all be zero.

    python3 scripts/compare_metrics.py demo/synthetic.emba demo/pairs.tsv \
        --batch-size 16
"""

import argparse

from twmd.analysis import correlate
from twmd.centering import (
    center_corpus,
    center_dimension,
    center_sentence,
    normalize_words,
)
from twmd.errors import TwmdError
from twmd.metrics import MetricConfig
from twmd.store import read_archive, read_pairs

METRICS = (
    "sbert",
    "cka",
    "moverscore",
    "bertscore_recall",
    "twmd",
    "trwmd",
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("archive")
    parser.add_argument("pairs")
    parser.add_argument("--batch-size", type=int, default=None)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args()

    base = read_archive(args.archive)
    pairs = read_pairs(args.pairs, archive_size=len(base.sentences))

    variants = {
        "none": base,
        "dim": center_dimension(base),
        "sent": center_sentence(base),
        "batch": center_corpus(base, batch_size=args.batch_size, seed=args.seed),
    }
    variants = {name: normalize_words(arch) for name, arch in variants.items()}

    header = f"{'metric':<18}" + "".join(f"{name:>16}" for name in variants)
    print(header)
    print("-" * len(header))
    for metric in METRICS:
        cells = []
        for name, archive in variants.items():
            if metric == "sbert" and name == "sent":
                cells.append(f"{'--':>16}")
                continue
            try:
                report = correlate(
                    archive, pairs, MetricConfig(metric), threads=args.threads
                )
                cells.append(
                    f"{100 * report.pearson_r:7.1f}/{100 * report.spearman_rho:<7.1f} "
                )
            except TwmdError as exc:
                cells.append(f"{'err':>16}")
                print(f"# {metric}/{name}: {exc}")
        print(f"{metric:<18}" + "".join(cells))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
