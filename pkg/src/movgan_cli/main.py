""" movgan: layout-to-video generation from the command line

Single entry point dispatching to the `toy`, `prep`, `train`, `generate`,
`edit` and `eval` subcommands. Exit codes: 0 success, 1 runtime failure,
2 usage error, 3 validation failure."""

import argparse
import sys
from typing import Optional

from movgan_cli import edit, evaluate, generate, prep, toy, train
from movgan_cli.__about__ import __version__
from movgan_cli.configlib import (
    EXIT_USAGE,
    Config,
    get_progname,
    report_failure,
)

Config.init("movgan")

SUBCOMMANDS = {
    module.NAME: module for module in (toy, prep, train, generate, edit, evaluate)
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--debug",
        action="store_true",
        dest="debug",
        help="Verbose logging and tracebacks on failure",
    )

    parser = argparse.ArgumentParser(
        prog=get_progname(),
        description="Layout-to-video generation with an implicit neural generator",
    )
    parser.add_argument("-V", "--version", action="version", version=__version__)
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True
    for module in SUBCOMMANDS.values():
        module.add_parser(subparsers, [common])
    return parser


def run(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        kwargs = dict(parser.parse_args(argv)._get_kwargs())
    except SystemExit as exc:
        # --help and --version exit 0, bad usage exits 2
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    command = kwargs.pop("command")
    Config.set_debug(enabled=kwargs.pop("debug", False))

    try:
        return SUBCOMMANDS[command].main(**kwargs)
    except Exception as exc:
        return report_failure(exc)


def entrypoint():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    sys.exit(entrypoint())
