"""Command-line front end for role detection, augmentation and evaluation.

Purpose:
    Expose the corpus pipeline as one executable with subcommands:
    `detect`, `augment`, `transform`, `filter`, `suite`, `stats`, `eval` and
    `targets`.
Inputs:
    CLI flags, the `ROLEMARK_WORKERS` environment variable and an optional
    JSON settings file passed with `--settings`.
Outputs:
    A one-line summary on stdout per command plus the configured corpus,
    manifest and report files.
Exceptions:
    Exit status 1 for usage errors (bad flags, missing paths), 2 for data
    errors (malformed corpora, id mismatches, unwritable outputs).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, NoReturn, Optional

from .base import FORMATS, STEPPER_SHARE_TOP_N, SUITE_NAMES, TOOL_VERSION, RolemarkError
from .config import CommandConfig, ConfigError, resolve_config
from .corpus import (
    build_eval_suite,
    emit,
    filter_pair,
    ingest,
    method_targets,
    run_augment,
    run_detect,
    run_transform,
    stats,
)
from .evalmetrics import (
    compare_reports,
    default_ignored,
    evaluate,
    load_pairs,
    load_refs_preds,
    report_payload,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

SUITE_SUMMARY_FILENAME = "suite.json"
PLOT_TOP_N = 20


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors with exit status 1."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--settings",
        dest="settings_path",
        type=Path,
        default=None,
        help="Optional JSON settings file (flags override it).",
    )
    common.add_argument(
        "--verbose",
        action="store_true",
        default=None,
        help="Log progress at INFO level on stderr.",
    )
    common.add_argument(
        "--workers",
        type=int,
        default=None,
        help="Worker processes for per-method work (default 1, env ROLEMARK_WORKERS).",
    )
    return common


def _corpus_options(parser: argparse.ArgumentParser, *, out_required: bool) -> None:
    parser.add_argument(
        "--format",
        choices=FORMATS,
        default=None,
        help="Corpus layout: a tree of .java files or a jsonl file.",
    )
    parser.add_argument(
        "--out",
        dest="output_path",
        type=Path,
        required=out_required,
        default=None,
        help="Output location.",
    )
    parser.add_argument(
        "--epoch",
        type=int,
        default=None,
        help="Fixed creation time recorded in manifests.",
    )


def _seed_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="Unsigned 64-bit seed for noise renaming (default 0).",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="rolemark",
        description="Detect stepper and walker variables in Java methods and build role-augmented corpora.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {TOOL_VERSION}")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True
    common = _common_options()

    detect = subparsers.add_parser("detect", parents=[common], help="Report role variables per method as JSON lines.")
    detect.add_argument("--in", dest="input_path", type=Path, required=True, help="Input corpus.")
    _corpus_options(detect, out_required=False)

    augment = subparsers.add_parser("augment", parents=[common], help="Prefix role variables with their role.")
    augment.add_argument("--in", dest="input_path", type=Path, required=True, help="Input corpus.")
    _corpus_options(augment, out_required=True)
    augment.add_argument(
        "--name-based",
        action="store_true",
        default=None,
        help="Rename every variable spelled like a role variable, not just its binding.",
    )

    transform = subparsers.add_parser("transform", parents=[common], help="Rename one random variable per method to varN.")
    transform.add_argument("--in", dest="input_path", type=Path, required=True, help="Input corpus.")
    _corpus_options(transform, out_required=True)
    _seed_option(transform)

    filter_cmd = subparsers.add_parser("filter", parents=[common], help="Keep only the methods augmentation changed.")
    filter_cmd.add_argument("--original", dest="input_path", type=Path, required=True, help="Original corpus.")
    filter_cmd.add_argument("--roles", dest="roles_path", type=Path, required=True, help="Role-augmented corpus.")
    _corpus_options(filter_cmd, out_required=True)

    suite = subparsers.add_parser("suite", parents=[common], help="Build the eight evaluation corpora.")
    suite.add_argument("--original", dest="input_path", type=Path, required=True, help="Original test corpus.")
    suite.add_argument(
        "--roles",
        dest="roles_path",
        type=Path,
        default=None,
        help="Existing role-augmented corpus (default: augment the original).",
    )
    _corpus_options(suite, out_required=True)
    _seed_option(suite)
    suite.add_argument("--name-based", action="store_true", default=None, help="Name-based augmentation.")
    suite.add_argument(
        "--independent-seeds",
        action="store_true",
        default=None,
        help="Transform the roles corpus with its own per-method seeds.",
    )

    stats_cmd = subparsers.add_parser("stats", parents=[common], help="Role and coverage statistics as JSON.")
    stats_cmd.add_argument("--in", dest="input_path", type=Path, required=True, help="Input corpus.")
    _corpus_options(stats_cmd, out_required=False)
    stats_cmd.add_argument("--plot", type=Path, default=None, help="Write a PNG histogram of stepper names.")

    eval_cmd = subparsers.add_parser("eval", parents=[common], help="Sub-token precision, recall and F1.")
    eval_cmd.add_argument("--refs", type=Path, default=None, help="Reference names (jsonl or one per line).")
    eval_cmd.add_argument("--preds", type=Path, default=None, help="Predicted names (jsonl or one per line).")
    eval_cmd.add_argument("--pairs", type=Path, default=None, help='jsonl of {"id", "ref", "pred"} rows.')
    eval_cmd.add_argument("--against", type=Path, default=None, help="Second prediction file to compare with.")
    eval_cmd.add_argument("--ignore-unk", action="store_true", help="Drop <unk> sub-tokens from predictions.")
    eval_cmd.add_argument(
        "--per-example",
        action="store_true",
        default=None,
        help="Also write the per-example table as CSV.",
    )
    eval_cmd.add_argument("--out", dest="output_path", type=Path, default=None, help="Report JSON path.")

    targets = subparsers.add_parser("targets", parents=[common], help="Method names of a corpus as eval references.")
    targets.add_argument("--in", dest="input_path", type=Path, required=True, help="Input corpus.")
    _corpus_options(targets, out_required=False)
    return parser


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    # Set on the package logger; reapplied once settings are resolved.
    logging.getLogger("rolemark").setLevel(logging.INFO if verbose else logging.WARNING)


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OSError(f"Unable to write {path}: {exc}") from exc


def _jsonl(rows: List[Dict[str, Any]]) -> str:
    return "".join(json.dumps(row) + "\n" for row in rows)


def _ingest_input(config: CommandConfig, path: Optional[Path] = None) -> Any:
    return ingest(path or config.input_path, config.format, seed=config.seed)


def _cmd_detect(config: CommandConfig, args: argparse.Namespace) -> int:
    corpus = _ingest_input(config)
    documents = run_detect(corpus, workers=config.workers)
    steppers = sum(doc["counts"]["steppers"] for doc in documents if "counts" in doc)
    walkers = sum(doc["counts"]["walkers"] for doc in documents if "counts" in doc)
    failed = sum(1 for doc in documents if "error" in doc)
    summary = (
        f"detect: {len(documents)} methods, {steppers} steppers, {walkers} walkers, "
        f"{failed} parse failures"
    )
    if config.output_path is not None:
        _write_text(config.output_path, _jsonl(documents))
        print(f"{summary} -> {config.output_path}")
    else:
        sys.stdout.write(_jsonl(documents))
        print(summary, file=sys.stderr)
    return EXIT_OK


def _cmd_augment(config: CommandConfig, args: argparse.Namespace) -> int:
    corpus = _ingest_input(config)
    augmented, report = run_augment(corpus, workers=config.workers, name_based=config.name_based)
    assert config.output_path is not None
    emit(augmented, config.output_path, config.format, epoch=config.epoch, report=report)
    changed = sum(split.augmented_methods for split in report.splits.values())
    print(
        f"augment: {changed} of {len(augmented)} methods augmented "
        f"({report.steppers} steppers, {report.walkers} walkers) -> {config.output_path}"
    )
    return EXIT_OK


def _cmd_transform(config: CommandConfig, args: argparse.Namespace) -> int:
    corpus = _ingest_input(config)
    transformed = run_transform(corpus, config.seed, workers=config.workers)
    assert config.output_path is not None
    emit(transformed, config.output_path, config.format, epoch=config.epoch)
    print(
        f"transform: renamed a variable in {len(transformed.transformed)} of "
        f"{len(transformed)} methods (seed {config.seed}) -> {config.output_path}"
    )
    return EXIT_OK


def _cmd_filter(config: CommandConfig, args: argparse.Namespace) -> int:
    original = _ingest_input(config)
    roles = _ingest_input(config, args.roles_path)
    kept_original, kept_roles = filter_pair(original, roles)
    assert config.output_path is not None
    emit(kept_original, config.output_path / "original", config.format, epoch=config.epoch)
    emit(kept_roles, config.output_path / "roles", config.format, epoch=config.epoch)
    print(f"filter: kept {len(kept_original)} of {len(original)} methods -> {config.output_path}")
    return EXIT_OK


def _cmd_suite(config: CommandConfig, args: argparse.Namespace) -> int:
    original = _ingest_input(config)
    roles = _ingest_input(config, args.roles_path) if args.roles_path is not None else None
    suite = build_eval_suite(
        original,
        roles,
        config.seed,
        workers=config.workers,
        name_based=config.name_based,
        independent_seeds=config.independent_seeds,
    )
    assert config.output_path is not None
    for name, corpus in suite.items():
        emit(corpus, config.output_path / name, config.format, epoch=config.epoch)
    sizes = suite.sizes()
    summary = {
        "seed": config.seed,
        "independentSeeds": config.independent_seeds,
        "nameBased": config.name_based,
        "sizes": sizes,
    }
    _write_text(config.output_path / SUITE_SUMMARY_FILENAME, json.dumps(summary, indent=2) + "\n")
    listing = " ".join(f"{name}={sizes[name]}" for name in SUITE_NAMES)
    print(f"suite: {listing} -> {config.output_path}")
    return EXIT_OK


def plot_stepper_histogram(histogram: Any, path: Path, *, top_n: int = PLOT_TOP_N) -> Path:
    """Bar chart of the most frequent stepper names."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = list(histogram)[:top_n]
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.bar([name for name, _count in rows], [count for _name, count in rows], color="#4c72b0")
    ax.set_xlabel("Stepper name")
    ax.set_ylabel("Occurrences")
    ax.set_title(f"Top {len(rows)} stepper names")
    fig.tight_layout()
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, dpi=120)
    finally:
        plt.close(fig)
    return path


def _cmd_stats(config: CommandConfig, args: argparse.Namespace) -> int:
    corpus = _ingest_input(config)
    report = stats(corpus, workers=config.workers)
    payload = json.dumps(report.as_dict(), indent=2) + "\n"
    methods = sum(split.methods for split in report.splits.values())
    changed = sum(split.augmented_methods for split in report.splits.values())
    summary = (
        f"stats: {methods} methods, {changed} augmented ({report.coverage:.1%}), "
        f"{report.steppers} steppers, {report.walkers} walkers"
    )
    if args.plot is not None:
        plot_stepper_histogram(report.stepper_name_histogram, args.plot)
        logger.info("stepper histogram written to %s", args.plot)
    if config.output_path is not None:
        _write_text(config.output_path, payload)
        print(f"{summary} -> {config.output_path}")
    else:
        sys.stdout.write(payload)
        print(summary, file=sys.stderr)
    top = ", ".join(
        f"{name}={share:.1%}" for name, share in report.stepper_name_shares(STEPPER_SHARE_TOP_N).items()
    )
    if top:
        logger.info("top stepper names: %s", top)
    return EXIT_OK


def _cmd_eval(config: CommandConfig, args: argparse.Namespace) -> int:
    if args.pairs is not None:
        if args.refs is not None or args.preds is not None:
            raise ConfigError("--pairs cannot be combined with --refs/--preds.")
        pairs = load_pairs(args.pairs)
    elif args.refs is not None and args.preds is not None:
        pairs = load_refs_preds(args.refs, args.preds)
    else:
        raise ConfigError("eval needs --pairs, or both --refs and --preds.")
    ignored = default_ignored(args.ignore_unk)
    report = evaluate(pairs, ignore_subtokens=ignored)
    print(report.micro.summary_line())

    comparison = None
    if args.against is not None:
        if args.refs is None:
            raise ConfigError("--against needs --refs.")
        candidate = evaluate(load_refs_preds(args.refs, args.against), ignore_subtokens=ignored)
        comparison = compare_reports(report, candidate)
        print(f"against: {candidate.micro.summary_line()} (dF1={comparison['delta']['f1']:+.3f})")

    if config.output_path is not None:
        _write_text(config.output_path, json.dumps(report_payload(report, comparison), indent=2) + "\n")
    if config.per_example:
        if config.output_path is not None:
            report.write_per_example_csv(config.output_path.with_suffix(".csv"))
        else:
            report.per_example_frame().to_csv(sys.stdout, index=False, lineterminator="\n")
    return EXIT_OK


def _cmd_targets(config: CommandConfig, args: argparse.Namespace) -> int:
    corpus = _ingest_input(config)
    rows = method_targets(corpus)
    if config.output_path is not None:
        _write_text(config.output_path, _jsonl(rows))
        print(f"targets: {len(rows)} method names -> {config.output_path}")
    else:
        sys.stdout.write(_jsonl(rows))
        print(f"targets: {len(rows)} method names", file=sys.stderr)
    return EXIT_OK


COMMAND_HANDLERS: Dict[str, Callable[[CommandConfig, argparse.Namespace], int]] = {
    "detect": _cmd_detect,
    "augment": _cmd_augment,
    "transform": _cmd_transform,
    "filter": _cmd_filter,
    "suite": _cmd_suite,
    "stats": _cmd_stats,
    "eval": _cmd_eval,
    "targets": _cmd_targets,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point for the `rolemark` executable.

    Purpose:
        Parse flags, resolve configuration and dispatch one subcommand.
    Inputs:
        argv: Optional CLI argument list override.
    Outputs:
        Process exit code: 0 success, 1 usage error, 2 data error.
    Side Effects:
        Reads corpora and writes the configured output files.
    Exceptions:
        None escape; failures are reported on stderr as one line.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    _configure_logging(bool(args.verbose))
    try:
        config = resolve_config(args.command, vars(args))
        _configure_logging(config.verbose)
        logger.info("running %s with %s", config.command, config.as_dict())
        return COMMAND_HANDLERS[config.command](config, args)
    except ConfigError as exc:
        print(f"rolemark {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"rolemark {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RolemarkError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"rolemark {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    raise SystemExit(main())
