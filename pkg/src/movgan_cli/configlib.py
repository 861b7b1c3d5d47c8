from __future__ import annotations

import logging
import pathlib
import re
import sys

import torch
from attrs import define, field

from movgan.checkpoint import Checkpoint
from movgan.constants import CHECKPOINT_FILENAME
from movgan.errors import error_category
from movgan.generator import Generator
from movgan.inputs.mainconfig import RunConfig
from movgan.utils.yaml import yaml_dump

TERM_COLORS = {"red": "31", "green": "32", "blue": "34"}
EXIT_SUCCESS = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_INVALID = 3


def colored(text, color: str) -> str:
    """foreground-term-colored string"""
    value = TERM_COLORS.get(color, "39")
    return f"\033[{value}m{text}\033[39m"


logging.basicConfig(
    level=logging.INFO,
    format=f"{colored('%(name)s', 'blue')} %(levelname)s: %(message)s",
)


@define
class Config:
    name: str = "-"
    debug: bool = False
    logger: logging.Logger = field(init=False)

    @classmethod
    def init(cls, name: str):
        cls.name = re.sub(r"^movgan-", "", name)
        cls.logger = logging.getLogger(name)
        cls.set_debug(enabled=cls.debug)

    @classmethod
    def set_debug(cls, *, enabled: bool = False):
        cls.debug = bool(enabled)
        level = logging.DEBUG if enabled else logging.INFO
        cls.logger.setLevel(level)
        logging.getLogger("movgan").setLevel(level)


def print_failure(category: str, message: str):
    """single `error: <category>: <message>` line on stderr"""
    message = " ".join(str(message).split())
    print(f"error: {category}: {message}", file=sys.stderr)  # noqa: T201


def fail_invalid(message: str, category: str = "input-error") -> int:
    print_failure(category, message)
    return EXIT_INVALID


def fail_error(message: str, category: str = "runtime-error") -> int:
    print_failure(category, message)
    return EXIT_ERROR


def report_failure(exc: BaseException) -> int:
    """validation failures (ValueError family) exit 3, others 1"""
    if Config.debug:
        Config.logger.exception(exc)
    if isinstance(exc, ValueError):
        return fail_invalid(str(exc), error_category(exc))
    return fail_error(str(exc), error_category(exc))


def succeed(message: str) -> int:
    Config.logger.info(colored(message, "green"))
    return EXIT_SUCCESS


def get_progname() -> str:
    """human-friendly program name for use in usage help text"""
    try:
        return pathlib.Path(sys.argv[0]).stem
    except Exception:
        return sys.argv[0]


def checkpoint_path(fpath: pathlib.Path) -> pathlib.Path:
    """checkpoint file from a file or run-directory path"""
    fpath = pathlib.Path(fpath).expanduser()
    return fpath / CHECKPOINT_FILENAME if fpath.is_dir() else fpath


def load_generator(fpath: pathlib.Path) -> tuple[Generator, RunConfig]:
    """generator restored from a checkpoint, in eval mode"""
    checkpoint = Checkpoint.load(checkpoint_path(fpath))
    generator = Generator(checkpoint.config.model_config)
    checkpoint.restore(generator)
    generator.eval()
    Config.logger.debug(
        f"loaded generator at step {checkpoint.step} from {checkpoint_path(fpath)}"
    )
    return generator, checkpoint.config


def write_yaml(fpath: pathlib.Path, payload: dict) -> pathlib.Path:
    fpath.parent.mkdir(parents=True, exist_ok=True)
    fpath.write_text(yaml_dump(payload))
    return fpath


def set_threads(threads: int | None):
    if threads:
        torch.set_num_threads(threads)
