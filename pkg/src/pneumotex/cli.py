"""Command-line driver: extract, split, grid, fuse, report."""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from .config import load_config
from .errors import PneumotexError, UsageError
from .pipeline import cmd_extract, cmd_fuse, cmd_grid, cmd_report, cmd_split


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pneumotex",
        description="Texture-descriptor experiment grids for chest X-ray classification.",
    )
    parser.add_argument("--config", required=True, help="YAML experiment config")
    parser.add_argument("--out", help="override the output directory")
    parser.add_argument("--seed", type=int, help="override the global seed")
    parser.add_argument("--workers", type=int, help="override the worker count")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("extract", help="warm the descriptor caches")
    sub.add_parser("split", help="materialize the stratified train/test split")
    p_grid = sub.add_parser("grid", help="run the experiment grid")
    p_grid.add_argument("--resume", action="store_true",
                        help="skip cells already in results.jsonl")
    p_fuse = sub.add_parser("fuse", help="late-fuse selected scenario sets")
    p_fuse.add_argument("--select-on-test", action="store_true",
                        help="select scenarios by test metrics instead of validation")
    p_fuse.add_argument("--focus-label", help="label for the focus-F1 metric")
    p_report = sub.add_parser("report", help="write ranked summary tables")
    p_report.add_argument("--focus-label", help="label for the focus-F1 column")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config, seed_override=args.seed)
        overrides = {}
        if args.out:
            overrides["output_dir"] = args.out
        if args.workers is not None:
            overrides["workers"] = args.workers
        if overrides:
            config = dataclasses.replace(config, **overrides)

        if args.command == "extract":
            for row in cmd_extract(config):
                print(
                    f"{row['descriptor']}: dim {row['dim']}, {row['rows']} rows "
                    f"({row['decoded']} decoded, {row['cached']} cached, "
                    f"{row['seconds']:.1f}s)"
                )
        elif args.command == "split":
            counts = cmd_split(config)
            print(f"{counts['train']} train / {counts['test']} test -> {counts['path']}")
        elif args.command == "grid":
            summary = cmd_grid(config, resume=args.resume)
            print(
                f"grid: {summary['total']} cells, {summary['run']} run, "
                f"{summary['skipped']} skipped, {summary['failures']} failed"
            )
            if summary["failures"]:
                return 1
        elif args.command == "fuse":
            summary = cmd_fuse(
                config,
                select_on="test" if args.select_on_test else None,
                focus_label=args.focus_label,
            )
            print(f"fused {summary['fused']} scenario sets")
        elif args.command == "report":
            summary = cmd_report(config, focus_label=args.focus_label)
            for path in summary["written"]:
                print(path)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PneumotexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
