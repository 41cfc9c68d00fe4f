# -*- coding: utf-8 -*-
"""Command-line interface.

Subcommands:

* ``xlit romanize``: romanize lines of text.
* ``xlit prompts``: render the prompts of a run without calling a backend.
* ``xlit run``: run an evaluation.
* ``xlit report``: aggregate metric reports into a table.

Exit codes: 0 on success, 1 for evaluation failures, 2 for configuration and
IO errors, 3 for backend errors.
"""
import argparse
import logging
import sys
from typing import List, Optional, Sequence
import xlit
from xlit.llm import BackendError
from xlit.metrics import MetricError
from xlit.paths import STDIN_OR_STDOUT_STR
from xlit.report import aggregate, collect_reports, render_report
from xlit.romanizer import load_bundled_tables, load_tables
from xlit.runner import RunConfig, prompts, run
from xlit.types import FallbackPolicy, Grouping, PromptMode, ReportFormat
from xlit.utils import read_lines, write_lines


LOG = logging.getLogger("xlit")


EXIT_OK = 0
EXIT_EVALUATION = 1
EXIT_CONFIG = 2
EXIT_BACKEND = 3


def _choices(enum_type) -> List[str]:
    return [member.value for member in enum_type]


def romanize_command(args: argparse.Namespace) -> int:
    if args.tables:
        config = load_tables(args.tables, args.fallback, args.lowercase)
    else:
        config = load_bundled_tables(args.fallback, args.lowercase)
    if args.mode == "tokens":
        lines = (" ".join(config.romanize_tokens(line.split())) for line in read_lines(args.input))
    else:
        lines = (config.romanize_text(line) for line in read_lines(args.input))
    write_lines(lines, args.output, trailing_linesep=True)
    return EXIT_OK


def _run_config(args: argparse.Namespace) -> RunConfig:
    overrides = dict(
        tables=args.tables,
        mode=args.mode,
        seed=None if args.seed is None else str(args.seed),
        backend=getattr(args, "backend", None),
    )
    return RunConfig.from_file(args.config, overrides)


def prompts_command(args: argparse.Namespace) -> int:
    path = prompts(_run_config(args), args.output)
    LOG.info("Wrote prompts to %s", path)
    return EXIT_OK


def run_command(args: argparse.Namespace) -> int:
    run(_run_config(args), args.output)
    return EXIT_OK


def report_command(args: argparse.Namespace) -> int:
    reports = collect_reports(args.paths)
    rows = aggregate(reports, args.grouping)
    write_lines([render_report(rows, reports, args.format)], args.output)
    return EXIT_OK


def _add_run_options(parser: argparse.ArgumentParser, backend: bool = True) -> None:
    parser.add_argument(
        "-c", "--config", required=True, metavar="FILE",
        help="Run config file (key=value lines).")
    parser.add_argument(
        "--tables", metavar="DIR", default=None,
        help="Mapping table directory (overrides the config).")
    parser.add_argument(
        "--mode", choices=_choices(PromptMode), default=None,
        help="Prompt mode (overrides the config).")
    parser.add_argument(
        "--seed", type=int, default=None,
        help="Run seed, an unsigned 64-bit integer (overrides the config).")
    if backend:
        parser.add_argument(
            "--backend", metavar="SPEC", default=None,
            help="live:<url> or replay:<file> (overrides the config).")
    parser.add_argument(
        "-o", "--output", required=True, metavar="DIR",
        help="Results directory.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xlit",
        description="Evaluate language models on romanized prompts.")
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {xlit.__version__}")
    parser.add_argument(
        "-v", "--verbose", action="count", default=0,
        help="Log more (-v for info, -vv for debug).")
    parser.add_argument(
        "-q", "--quiet", action="store_true", default=False,
        help="Only log errors.")
    parser.add_argument(
        "--progress", action="store_true", default=False,
        help="Show a progress bar while completing prompts.")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True

    romanize_parser = subparsers.add_parser("romanize", help="Romanize text.")
    romanize_parser.add_argument(
        "input", nargs="?", default=STDIN_OR_STDOUT_STR,
        help="Input file, one text per line ('-' for stdin).")
    romanize_parser.add_argument(
        "-o", "--output", default=STDIN_OR_STDOUT_STR,
        help="Output file ('-' for stdout).")
    romanize_parser.add_argument(
        "--tables", metavar="DIR", default=None,
        help="Mapping table directory (default: the bundled tables).")
    romanize_parser.add_argument(
        "--mode", choices=("text", "tokens"), default="text",
        help="Romanize whole lines, or whitespace-separated tokens.")
    romanize_parser.add_argument(
        "--fallback", choices=_choices(FallbackPolicy),
        default=FallbackPolicy.DECOMPOSE_STRIP.value,
        help="What to do with characters no table maps.")
    romanize_parser.add_argument(
        "--lowercase", action="store_true", default=False,
        help="Lowercase the output.")
    romanize_parser.set_defaults(func=romanize_command)

    prompts_parser = subparsers.add_parser(
        "prompts", help="Render the prompts of a run to prompts.jsonl.")
    _add_run_options(prompts_parser, backend=False)
    prompts_parser.set_defaults(func=prompts_command)

    run_parser = subparsers.add_parser("run", help="Run an evaluation.")
    _add_run_options(run_parser)
    run_parser.set_defaults(func=run_command)

    report_parser = subparsers.add_parser(
        "report", help="Aggregate metric reports.")
    report_parser.add_argument(
        "paths", nargs="+", metavar="PATH",
        help="Run directories, .json/.jsonl report files or .tsv score tables.")
    report_parser.add_argument(
        "--grouping", choices=_choices(Grouping), default=Grouping.ALL.value,
        help="Average over all languages, or per script.")
    report_parser.add_argument(
        "--format", choices=_choices(ReportFormat), default=ReportFormat.TSV.value,
        help="Output format.")
    report_parser.add_argument(
        "-o", "--output", default=STDIN_OR_STDOUT_STR,
        help="Output file ('-' for stdout).")
    report_parser.set_defaults(func=report_command)
    return parser


def configure_logging(verbose: int = 0, quiet: bool = False) -> None:
    """Set up the root handler and the xlit log level."""
    logging.basicConfig(format="%(levelname)s: %(message)s")
    if quiet:
        level = logging.ERROR
    elif verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    LOG.setLevel(level)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line.

    Args:
        argv: Arguments (default: ``sys.argv[1:]``).

    Returns:
        The exit code.
    """
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    if args.progress:
        xlit.configure(progress=True)
    try:
        return args.func(args)
    except BackendError as err:
        LOG.error("%s", err)
        return EXIT_BACKEND
    except MetricError as err:
        LOG.error("%s", err)
        return EXIT_EVALUATION
    except (ValueError, OSError) as err:
        LOG.error("%s", err)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
