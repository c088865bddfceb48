"""Command-line entry point: ``bog {synth,extract,train,encode,evaluate,compare}``.

Exit codes: 0 success, 1 invalid input or configuration, 2 I/O or format error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from .errors import FormatError, InvalidInputError
from .pipeline import commands, synth
from .pipeline.config import load_config
from .pipeline.manifest import load_manifest

log = logging.getLogger("bog")


def _common(p):
    p.add_argument("--config", type=Path, help="INI config with [descriptor], [train], [evaluate] sections")
    p.add_argument("--seed", type=int, help="override the stage's seed")
    p.add_argument("--jobs", type=int, default=1, help="worker processes/threads")
    p.add_argument("--output", type=Path, required=True, help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")


def _int_list(text):
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser():
    parser = argparse.ArgumentParser(prog="bog", description="Bag-of-Genres video representation pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic genre-coded frame corpus")
    _common(p)
    p.add_argument("--genres", type=int, default=6)
    p.add_argument("--videos", type=int, default=20, help="videos per genre")
    p.add_argument("--frames", type=int, default=20, help="frames per video")
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--size", type=int, default=32, help="frame width and height in pixels")
    p.add_argument("--test-fraction", type=float, default=0.64, help="share of each genre's videos in the test split")
    p.add_argument("--force", action="store_true", help="write into a non-empty output directory")

    p = sub.add_parser("extract", help="extract frame descriptors into feature caches")
    _common(p)
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--descriptor", help="override the configured descriptor (ACC, CCV, BIC, GCH, GFD, HWD)")
    p.add_argument("--split", choices=["train", "test", "both"], default="both")

    p = sub.add_parser("train", help="train the genre dictionary (linear SVM)")
    _common(p)
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--cache", type=Path, required=True, help="train-split feature cache")
    p.add_argument("--test-cache", type=Path, help="optional test-split cache for test accuracy")
    p.add_argument("--frames-per-genre", type=int, help="N frames sampled per genre")
    p.add_argument("--sweep", type=_int_list, help="comma-separated N values, e.g. 100,500,800")
    p.add_argument("--descriptor")

    p = sub.add_parser("encode", help="encode videos as Bag-of-Genres vectors")
    _common(p)
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--cache", type=Path, required=True)
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--split", choices=["train", "test", "all"], default="test")

    p = sub.add_parser("evaluate", help="replicated retrieval evaluation (MAP, P@k, CIs)")
    _common(p)
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--bog", type=Path, required=True)
    p.add_argument("--compare", type=Path, help="per-class score CSV of another system")
    p.add_argument("--name", default="BoG")
    p.add_argument("--compare-name", default="other")

    p = sub.add_parser("compare", help="paired t-test intervals between two per-class score CSVs")
    _common(p)
    p.add_argument("a", type=Path)
    p.add_argument("b", type=Path)
    p.add_argument("--name-a", default="A")
    p.add_argument("--name-b", default="B")
    return parser


def run(args):
    cfg = load_config(args.config)
    if getattr(args, "descriptor", None):
        cfg = cfg.replace(descriptor=args.descriptor)

    if args.command == "synth":
        seed = args.seed if args.seed is not None else 0
        path = synth.generate(args.output, args.genres, args.videos, args.frames, args.noise, seed,
                              size=args.size, test_fraction=args.test_fraction, force=args.force)
        print(path)
        return

    if args.command == "compare":
        rows = commands.cmd_compare(args.a, args.b, args.output, args.name_a, args.name_b, cfg.level)
        for r in rows:
            print(f"{r.metric}: [{r.lo:.4f}, {r.hi:.4f}] significant={r.significant}")
        return

    manifest = load_manifest(args.manifest)
    if args.command == "extract":
        splits = ("train", "test") if args.split == "both" else (args.split,)
        summary = commands.cmd_extract(manifest, cfg, args.output, splits, jobs=args.jobs)
        for split, info in summary.items():
            print(f"{split}: {info['entries']} entries ({info['new']} new, {info['errors']} errors) -> {info['path']}")
    elif args.command == "train":
        tcfg = cfg.train
        if args.seed is not None:
            tcfg = dataclasses.replace(tcfg, seed=args.seed)
        if args.frames_per_genre is not None:
            tcfg = dataclasses.replace(tcfg, frames_per_genre=args.frames_per_genre)
        cfg = cfg.replace(train=tcfg)
        rows, _ = commands.cmd_train(manifest, args.cache, cfg, args.output, args.test_cache, args.sweep)
        for row in rows:
            print(f"N={row['frames_per_genre']}: held-out accuracy {row['held_out_accuracy']}, test accuracy {row['test_accuracy']}")
    elif args.command == "encode":
        bogs, errors = commands.cmd_encode(manifest, args.cache, args.model, args.output, args.split, jobs=args.jobs)
        print(f"encoded {len(bogs)} videos, {len(errors)} errors")
    elif args.command == "evaluate":
        if args.seed is not None:
            cfg = cfg.replace(replication_seeds=tuple(args.seed + i for i in range(len(cfg.replication_seeds))))
        report = commands.cmd_evaluate(manifest, args.bog, cfg, args.output, args.compare, args.name, args.compare_name)
        print(f"MAP {report.map_mean:.4f} CI {report.map_ci}")
        print(f"P@{report.k} {report.p10_mean:.4f} CI {report.p10_ci}")


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        run(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
