"""Command-line surface: archive transforms, pair scoring, correlation reports.

Every command is a pure function of (inputs, flags, seed) and writes its
output to ``--out`` with a run manifest at ``<out>.manifest.json`` recording
the command, configuration, input digests, seed, tool version, and
timestamp. Errors are emitted as machine-readable JSON on stderr with a
nonzero exit code.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import os
import sys
from pathlib import Path

from . import __version__
from .analysis import (
    contextuality,
    correlate,
    property_check,
    score_pairs,
    temperature_sweep,
)
from .centering import CenteringMode, apply_centering, normalize_words
from .errors import ConfigError, TwmdError
from .metrics import MetricConfig
from .store import read_archive, read_pairs, write_archive


def _default_threads() -> int:
    env = os.environ.get("TWMD_THREADS")
    if env is None:
        return 1
    try:
        value = int(env)
    except ValueError:
        raise ConfigError(f"TWMD_THREADS must be an integer, got {env!r}") from None
    if value < 1:
        raise ConfigError(f"TWMD_THREADS must be >= 1, got {value}")
    return value


def _resolve_threads(args) -> int:
    return args.threads if args.threads is not None else _default_threads()


def _sha256(path) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_manifest(out_path, command: str, config: dict, inputs, seed) -> None:
    manifest = {
        "command": command,
        "config": config,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "seed": seed,
        "version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    Path(str(out_path) + ".manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _write_json(out_path, payload) -> None:
    Path(out_path).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _metric_config(args) -> MetricConfig:
    return MetricConfig(
        metric=args.metric,
        temperature=args.temperature,
        sinkhorn_iters=args.iters,
        normalize=not args.no_normalize,
        include_entropy=args.include_entropy,
    )


def _metric_config_dict(config: MetricConfig) -> dict:
    return {
        "metric": config.metric,
        "temperature": config.temperature,
        "sinkhorn_iters": config.sinkhorn_iters,
        "normalize": config.normalize,
        "include_entropy": config.include_entropy,
    }


def cmd_center(args) -> int:
    archive = read_archive(args.archive)
    mode = CenteringMode(kind=args.center, batch_size=args.batch_size)
    out = apply_centering(archive, mode, seed=args.seed)
    if args.normalize:
        out = normalize_words(out)
    write_archive(out, args.out)
    _write_manifest(
        args.out,
        "center",
        {
            "center": args.center,
            "batch_size": args.batch_size,
            "normalize": args.normalize,
        },
        [args.archive],
        args.seed,
    )
    return 0


def cmd_score(args) -> int:
    archive = read_archive(args.archive)
    pairs = read_pairs(args.pairs, archive_size=len(archive.sentences))
    config = _metric_config(args)
    values = score_pairs(archive, pairs, config, threads=_resolve_threads(args))
    lines = ["pair_id\tscore"]
    lines += [f"{pair.pair_id}\t{value!r}" for pair, value in zip(pairs, values)]
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    _write_manifest(
        args.out, "score", _metric_config_dict(config), [args.archive, args.pairs], args.seed
    )
    return 0


def cmd_correlate(args) -> int:
    archive = read_archive(args.archive)
    pairs = read_pairs(args.pairs, archive_size=len(archive.sentences))
    config = _metric_config(args)
    report = correlate(archive, pairs, config, threads=_resolve_threads(args))
    _write_json(args.out, report.to_dict())
    _write_manifest(
        args.out,
        "correlate",
        _metric_config_dict(config),
        [args.archive, args.pairs],
        args.seed,
    )
    return 0


def cmd_sweep(args) -> int:
    archive = read_archive(args.archive)
    pairs = read_pairs(args.pairs, archive_size=len(archive.sentences))
    config = _metric_config(args)
    try:
        grid = [float(t) for t in args.grid.split(",") if t]
    except ValueError:
        raise ConfigError(f"--grid must be comma-separated numbers, got {args.grid!r}") from None
    result = temperature_sweep(archive, pairs, config, grid, threads=_resolve_threads(args))
    payload = [
        {
            "temperature": entry.temperature,
            "selected": entry.temperature == result.best_temperature,
            **entry.report.to_dict(),
        }
        for entry in result.entries
    ]
    _write_json(args.out, payload)
    _write_manifest(
        args.out,
        "sweep",
        {**_metric_config_dict(config), "grid": grid},
        [args.archive, args.pairs],
        args.seed,
    )
    return 0


def cmd_contextuality(args) -> int:
    profiles = [
        contextuality(read_archive(path), n_samples=args.samples, seed=args.seed)
        for path in args.archives
    ]
    payload: dict = {"layers": [p.to_dict() for p in profiles]}
    if len(profiles) >= 2:
        verdicts = property_check(profiles)
        payload["properties"] = {
            name: {"passed": verdict.passed, "values": verdict.values}
            for name, verdict in verdicts.items()
        }
    _write_json(args.out, payload)
    _write_manifest(
        args.out, "contextuality", {"samples": args.samples}, args.archives, args.seed
    )
    return 0


def _add_metric_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--metric", required=True, help="metric name")
    parser.add_argument("--temperature", type=float, default=None)
    parser.add_argument("--iters", type=int, default=1, help="Sinkhorn iterations")
    parser.add_argument("--no-normalize", action="store_true", help="report raw C instead of C12/sqrt(C11*C22)")
    parser.add_argument("--include-entropy", action="store_true", help="add the entropy term to twmd values")


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=None, help="worker cap (default: TWMD_THREADS or 1)")
    parser.add_argument("--out", required=True, help="output path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twmd",
        description="Embedding-based text similarity metrics and evaluation",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("center", help="apply word-vector centering / normalization")
    p.add_argument("archive")
    p.add_argument(
        "--center",
        choices=("none", "dimension", "sentence", "corpus"),
        default="none",
    )
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--normalize", action="store_true", help="unit-normalize after centering")
    _add_common_flags(p)
    p.set_defaults(func=cmd_center)

    p = sub.add_parser("score", help="score every evaluation pair, TSV out")
    p.add_argument("archive")
    p.add_argument("pairs")
    _add_metric_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("correlate", help="correlate metric scores with human ratings")
    p.add_argument("archive")
    p.add_argument("pairs")
    _add_metric_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("sweep", help="correlation report per grid temperature")
    p.add_argument("archive")
    p.add_argument("pairs")
    _add_metric_flags(p)
    p.add_argument("--grid", required=True, help="comma-separated temperatures")
    _add_common_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser(
        "contextuality", help="baseline/self/intra similarity per layer archive"
    )
    p.add_argument("archives", nargs="+")
    p.add_argument("--samples", type=int, default=100_000)
    _add_common_flags(p)
    p.set_defaults(func=cmd_contextuality)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TwmdError as exc:
        sys.stderr.write(json.dumps({"error": exc.code, "message": str(exc)}) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
