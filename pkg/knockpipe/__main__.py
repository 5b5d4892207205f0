"""Main knockpipe executable."""

# ruff: noqa: PLC0415
from __future__ import annotations

import argparse
import sys
from typing import Any

# PYTHON_ARGCOMPLETE_OK
import argcomplete
from rich_argparse import RawDescriptionRichHelpFormatter, RichHelpFormatter

from knockpipe import __version__


class CustomArgumentParser(argparse.ArgumentParser):
    """ArgumentParser with custom help message and better handling of misspelled commands."""

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        """Initialize parser."""
        no_help = kwargs.pop("no_help", False)
        # Don't add default help message
        kwargs["add_help"] = False
        super().__init__(*args, **kwargs)
        if not no_help:
            self.add_argument("-h", "--help", action="help", help="Show this help message and exit")

    @staticmethod
    def _check_value(action: argparse.Action, value: Any) -> None:
        """Check if command is valid, and if not, try to guess what the user meant."""  # noqa: DOC501
        if action.choices is not None and value not in action.choices:
            import difflib

            close_matches = difflib.get_close_matches(value, action.choices, n=1)
            if close_matches:
                message = f"unknown command: '{value}' - maybe you meant '{close_matches[0]}'"
            else:
                choices = ", ".join(map(repr, action.choices))
                message = f"unknown command: '{value}' (choose from {choices})"
            raise argparse.ArgumentError(action, message)

    def error(self, message: str) -> None:
        """Print a usage error and exit with the input-validation exit code."""
        self.print_usage(sys.stderr)
        self.exit(2, f"error[cli:arguments]: {message}\n")


# Add highlights for our custom description
RawDescriptionRichHelpFormatter.highlights.extend((r"\n   (?P<args>\S+)", r"\n(?P<groups>.+:)\n"))


class CustomHelpFormatter(RawDescriptionRichHelpFormatter):
    """Custom help formatter for argparse, silencing subparser lists.

    We have our own hardcoded list of subparsers in the description, so we don't want argparse to list them again.
    """

    def _rich_format_action(self, action: argparse.Action) -> str:
        """Format action for help message, skipping subparser actions."""  # noqa: DOC201
        if isinstance(action, argparse._SubParsersAction):
            return ""
        return super()._rich_format_action(action)


def _common_parser() -> argparse.ArgumentParser:
    """Options shared by the computing subcommands."""
    parser = CustomArgumentParser(no_help=True)
    group = parser.add_argument_group("common options")
    group.add_argument("--config", metavar="FILE", help="YAML config file merged over the defaults")
    group.add_argument("--out", metavar="DIR", help="Output directory")
    group.add_argument("--seed", type=int, help="Seed of all randomness (default: 0)")
    group.add_argument("-j", "--jobs", type=int, metavar="N", help="Number of parallel workers")
    group.add_argument(
        "--log",
        metavar="LOGLEVEL",
        default="warning",
        choices=["debug", "info", "warning", "error"],
        help="Set the log level (default: 'warning')",
    )
    group.add_argument(
        "--log-to-file",
        metavar="LOGLEVEL",
        choices=["debug", "info", "warning", "error"],
        help="Also log to <out>/logs/knockpipe.log at the given level",
    )
    group.add_argument("--json-log", action="store_true", help="Log in JSON format")
    return parser


def _add_input(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", metavar="CSV", help="Dataset with a header row")
    parser.add_argument("--response", default="y", help="Name of the binary response column (default: 'y')")


def _add_filter(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--q", type=float, help="Target (aggregated) FDR level")
    parser.add_argument("--k", type=int, help="Number of knockoff runs combined by union")
    parser.add_argument("--variant", choices=["knockoff", "knockoff_plus"], help="Threshold variant")
    parser.add_argument("--statistic", choices=["lsm", "lcd-cv"], help="Knockoff statistic")
    parser.add_argument("--grid-size", type=int, help="Number of penalty levels")
    parser.add_argument("--min-ratio", type=float, help="Smallest penalty as a fraction of the largest")
    parser.add_argument("--cv-folds", type=int, help="Number of folds used to calibrate the penalty")


def build_parser() -> CustomArgumentParser:
    """Create the argument parser with all subcommands.

    Returns:
        The parser.
    """
    parser = CustomArgumentParser(
        prog="knockpipe",
        description="knockpipe",
        allow_abbrev=False,
        formatter_class=CustomHelpFormatter,
    )
    parser.add_argument(
        "-v",
        "--version",
        action="version",
        version=f"knockpipe v{__version__}",
        help="Show knockpipe's version number and exit",
    )

    help = {  # noqa: A001
        "knockoffs": "Sample a Gaussian knockoff copy of a dataset",
        "select": "Select variables with the (aggregated) knockoff filter",
        "refit": {
            "short": "Refit unpenalized models on a set of columns",
            "long": "Refit least-squares models (all columns standardized, and only continuous columns standardized) "
            "and the logistic model on a set of columns, with average marginal effects",
        },
        "simulate": "Estimate FDR and power on synthetic data",
        "report": {
            "short": "Compare the prediction error of selection methods",
            "long": "Estimate the cross-validated prediction error of each selection method followed by a logistic "
            "refit, or re-render a stored report",
        },
        "config": "Display the effective configuration",
        "schema": "Print a JSON schema for the knockpipe config format",
    }

    description = [
        "",
        "Variable selection:",
        f"   knockoffs        {help['knockoffs']}",
        f"   select           {help['select']}",
        "",
        "Inference and evaluation:",
        f"   refit            {help['refit']['short']}",
        f"   report           {help['report']['short']}",
        f"   simulate         {help['simulate']}",
        "",
        "Configuration:",
        f"   config           {help['config']}",
        f"   schema           {help['schema']}",
        "",
        "See 'knockpipe <command> -h' for help with a specific command",
    ]
    subparsers = parser.add_subparsers(
        dest="command", title="commands", metavar="<command>", description="\n".join(description)
    )
    subparsers.required = True
    common = _common_parser()

    knockoffs_parser = subparsers.add_parser(
        "knockoffs",
        help=help["knockoffs"],
        description=help["knockoffs"],
        formatter_class=RichHelpFormatter,
        parents=[common],
    )
    _add_input(knockoffs_parser)
    knockoffs_parser.add_argument("--slack", type=float, help="Factor applied to the equicorrelated s-vector")
    knockoffs_parser.add_argument(
        "--path", action="store_true", help="Also write the regularization path of the augmented design"
    )
    knockoffs_parser.add_argument("--grid-size", type=int, help="Number of penalty levels")
    knockoffs_parser.add_argument("--min-ratio", type=float, help="Smallest penalty as a fraction of the largest")

    select_parser = subparsers.add_parser(
        "select", help=help["select"], description=help["select"], formatter_class=RichHelpFormatter, parents=[common]
    )
    _add_input(select_parser)
    _add_filter(select_parser)

    refit_parser = subparsers.add_parser(
        "refit",
        help=help["refit"]["short"],
        description=help["refit"]["long"],
        formatter_class=RichHelpFormatter,
        parents=[common],
    )
    _add_input(refit_parser)
    refit_parser.add_argument("--support", required=True, help="Comma-separated 1-based column numbers, e.g. '1,4,7'")

    simulate_parser = subparsers.add_parser(
        "simulate",
        help=help["simulate"],
        description=help["simulate"],
        formatter_class=RichHelpFormatter,
        parents=[common],
    )
    simulate_parser.add_argument("--scenario", required=True, metavar="FILE", help="Scenario file (key=value lines)")

    report_parser = subparsers.add_parser(
        "report",
        help=help["report"]["short"],
        description=help["report"]["long"],
        formatter_class=RichHelpFormatter,
        parents=[common],
    )
    _add_input(report_parser)
    _add_filter(report_parser)
    report_parser.add_argument("--results", metavar="JSON", help="Re-render a stored prediction.json")
    report_parser.add_argument("--methods", help="Comma-separated methods to compare")
    report_parser.add_argument("--folds", type=int, help="Number of prediction-error folds")

    config_parser = subparsers.add_parser(
        "config", help=help["config"], description=help["config"], formatter_class=RichHelpFormatter, parents=[common]
    )
    config_parser.add_argument("options", nargs="*", default=[], help="Specific option(s) in config to display")

    schema_parser = subparsers.add_parser(
        "schema", help=help["schema"], description=help["schema"], formatter_class=RichHelpFormatter
    )
    schema_parser.add_argument("--compact", action="store_true", help="Don't indent output")
    return parser


def config_overrides(args: argparse.Namespace) -> dict[str, Any]:
    """Map command line flags to dot-notation config keys.

    Args:
        args: Parsed arguments.

    Returns:
        Mapping from config keys to values; flags that were not given map to None.
    """
    methods = getattr(args, "methods", None)
    return {
        "filter.q": getattr(args, "q", None),
        "filter.k": getattr(args, "k", None),
        "filter.variant": getattr(args, "variant", None),
        "filter.statistic": getattr(args, "statistic", None),
        "knockoffs.slack": getattr(args, "slack", None),
        "path.grid_size": getattr(args, "grid_size", None),
        "path.min_ratio": getattr(args, "min_ratio", None),
        "cv.folds": getattr(args, "cv_folds", None),
        "inference.folds": getattr(args, "folds", None),
        "inference.methods": [m.strip() for m in methods.split(",") if m.strip()] if methods else None,
        "parallel.n_jobs": getattr(args, "jobs", None),
    }


def main(argv: list[str] | None = None) -> int:
    """Handle command line arguments and run the appropriate command.

    If argv is None, the command line arguments are read from sys.argv.

    Args:
        argv: List of command line arguments.

    Returns:
        Exit code: 0 on success, 1 on computational failure, 2 on invalid input.
    """
    parser = build_parser()
    argcomplete.autocomplete(parser)
    args = parser.parse_args(argv)

    from knockpipe.core.run import COMMANDS

    if args.command == "schema":
        COMMANDS["schema"](args)
        return 0

    from knockpipe.core import config, schema
    from knockpipe.core.log_handler import KnockpipeLogHandler

    log_handler = KnockpipeLogHandler(
        log_level=args.log, log_file_level=args.log_to_file, json=args.json_log, out_dir=args.out
    )
    try:
        cfg = config.load_config(args.config)
        config.apply_overrides(config_overrides(args), cfg)
        schema.validate(cfg)
        COMMANDS[args.command](args, cfg)
    except Exception as e:
        log_handler.handle_exception(e)
    return log_handler.stop()


def cli() -> None:
    """Run main function and exit with the appropriate exit code.

    This is the entry point for the CLI, called when running 'knockpipe' from the command line.
    """
    sys.exit(main())


if __name__ == "__main__":
    cli()
