# g2p_complexity/cli.py
from __future__ import annotations
import argparse
import logging
import os
import sys
from typing import Sequence

from . import config, pipeline
from .errors import G2PError, IncompleteResults, ManifestError
from .manifest import ExperimentManifest, init_manifest, load_manifest

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2


def _common(p: argparse.ArgumentParser, compare: bool = False, denominator: bool = False) -> None:
    p.add_argument("--manifest", default="manifest.ini", help="experiment manifest (INI)")
    p.add_argument("--lang", default="", help="comma-separated language tags (default: all)")
    p.add_argument("--parallel", type=int, default=1, help="concurrent language runs")
    p.add_argument("--seed", type=int, default=None, help="override the manifest's global seed")
    p.add_argument("--force", action="store_true", help="rebuild artifacts that already exist")
    p.add_argument("--verbose", "-v", action="store_true")
    if compare:
        p.add_argument("--compare", action="store_true", help="compare accuracies with the published values")
    if denominator:
        p.add_argument("--accuracy-denominator", choices=("max", "gold"), default="max",
                       help="char accuracy divides by max(|pred|,|gold|) or by |gold|")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="g2p-complexity",
                                     description="Cross-lingual grapheme-to-phoneme complexity experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("prepare", help="parse, sample and split each lexicon"))
    _common(sub.add_parser("train", help="train one model per language"))
    _common(sub.add_parser("evaluate", help="greedy-decode the test splits"), denominator=True)
    _common(sub.add_parser("report", help="write table2/table3/figure1"), compare=True)
    _common(sub.add_parser("run-all", help="prepare, train, evaluate and report"), compare=True, denominator=True)

    man = sub.add_parser("manifest", help="manifest helpers")
    man_sub = man.add_subparsers(dest="manifest_command", required=True)
    init = man_sub.add_parser("init", help="write a manifest with one section per <tag>.txt")
    init.add_argument("--from-dir", required=True, help="directory of ipa-dict <tag>.txt files")
    init.add_argument("--manifest", default="-", help="output path ('-' for stdout)")
    init.add_argument("--id", default="ipa-dict", help="experiment id")
    init.add_argument("--seed", type=int, default=0)
    init.add_argument("--force", action="store_true", help="overwrite an existing manifest")
    init.add_argument("--verbose", "-v", action="store_true")
    return parser


def _manifest(args) -> ExperimentManifest:
    manifest = load_manifest(args.manifest)
    if args.seed is not None:
        manifest = manifest.with_seed(args.seed)
    return manifest


def _tags(args, manifest: ExperimentManifest) -> list[str]:
    return manifest.select([t.strip() for t in args.lang.split(",") if t.strip()])


def _summarize(outcomes) -> int:
    if outcomes:
        logger.info("[summary]\n%s", pipeline.outcomes_frame(outcomes).to_string(index=False))
    return pipeline.exit_status(outcomes)


def _manifest_init(args) -> int:
    text = init_manifest(args.from_dir, experiment_id=args.id, seed=args.seed)
    if args.manifest == "-":
        sys.stdout.write(text)
        return EXIT_OK
    if os.path.exists(args.manifest) and not args.force:
        raise ManifestError(f"{args.manifest} exists; pass --force to overwrite")
    with open(args.manifest, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    print(f"[manifest] wrote {args.manifest}")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    config.setup_logging("DEBUG" if args.verbose else None)

    try:
        if args.command == "manifest":
            return _manifest_init(args)
        if args.parallel < 1:
            raise ManifestError(f"--parallel must be >= 1, got {args.parallel}")
        manifest = _manifest(args)
        tags = _tags(args, manifest)
        if args.command == "prepare":
            return _summarize(pipeline.prepare(manifest, tags, args.parallel, args.force))
        if args.command == "train":
            return _summarize(pipeline.train(manifest, tags, args.parallel, args.force))
        if args.command == "evaluate":
            return _summarize(pipeline.evaluate_all(manifest, tags, args.parallel, args.force,
                                                    args.accuracy_denominator))
        if args.command == "report":
            return _summarize(pipeline.report(manifest, tags, args.compare))
        if args.command == "run-all":
            return _summarize(pipeline.run_all(manifest, tags, args.parallel, args.force, args.compare,
                                               args.accuracy_denominator))
    except ManifestError as e:
        logger.error("[manifest] %s", e)
        return EXIT_USAGE
    except IncompleteResults as e:
        logger.error("[report] %s", e)
        return EXIT_PARTIAL
    except G2PError as e:
        logger.error("[%s] %s", args.command, e)
        return EXIT_PARTIAL
    parser.error(f"unknown command {args.command!r}")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
