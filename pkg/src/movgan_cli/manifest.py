"""Run manifest written in every output directory"""

from __future__ import annotations

import datetime
import pathlib

from attrs import define, field

from movgan.constants import MANIFEST_FILENAME
from movgan.errors import InputError
from movgan.utils.misc import format_dt, sha256_of, utcnow
from movgan.utils.yaml import yaml_dump, yaml_load
from movgan_cli.__about__ import __version__


@define(kw_only=True)
class RunManifest:
    command: str
    seed: int
    config_hash: str
    version: str = __version__
    started_on: datetime.datetime = field(factory=utcnow)
    ended_on: datetime.datetime | None = None
    outputs: list[str] = field(factory=list)
    arguments: dict = field(factory=dict)

    @classmethod
    def start(
        cls, command: str, seed: int, payload: str, arguments: dict
    ) -> RunManifest:
        """manifest of a run starting now; payload is the config text it hashes"""
        return cls(
            command=command,
            seed=seed,
            config_hash=sha256_of(payload),
            arguments={
                key: str(value) if isinstance(value, pathlib.Path) else value
                for key, value in arguments.items()
            },
        )

    def finish(
        self, output_dir: pathlib.Path, outputs: list[pathlib.Path]
    ) -> pathlib.Path:
        """record outputs (relative to output_dir) and write the manifest there"""
        output_dir = pathlib.Path(output_dir)
        self.ended_on = utcnow()
        self.outputs = sorted(
            str(pathlib.Path(fpath).relative_to(output_dir)) for fpath in outputs
        )
        return self.write(output_dir)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "seed": self.seed,
            "config_hash": self.config_hash,
            "version": self.version,
            "started_on": format_dt(self.started_on),
            "ended_on": format_dt(self.ended_on) if self.ended_on else None,
            "outputs": list(self.outputs),
            "arguments": dict(self.arguments),
        }

    def write(self, output_dir: pathlib.Path) -> pathlib.Path:
        output_dir.mkdir(parents=True, exist_ok=True)
        fpath = output_dir / MANIFEST_FILENAME
        fpath.write_text(yaml_dump(self.to_dict()))
        return fpath

    @classmethod
    def read(cls, output_dir: pathlib.Path) -> dict:
        fpath = pathlib.Path(output_dir) / MANIFEST_FILENAME
        if not fpath.is_file():
            raise InputError(f"No manifest in {output_dir}")
        return yaml_load(fpath.read_text())
