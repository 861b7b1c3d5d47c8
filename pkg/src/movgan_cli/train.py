""" Trains a generator/discriminator pair on a clip cache """

import argparse
import pathlib
from typing import Optional

from attrs import evolve

from movgan.checkpoint import Checkpoint
from movgan.constants import CHECKPOINT_FILENAME, TELEMETRY_FILENAME
from movgan.data.clips import load_clips
from movgan.errors import ConfigurationError
from movgan.inputs.mainconfig import RunConfig
from movgan.training import Trainer, train_loop
from movgan_cli.configlib import (
    Config,
    checkpoint_path,
    set_threads,
    succeed,
    write_yaml,
)
from movgan_cli.manifest import RunManifest

NAME = "train"
CONFIG_FILENAME = "config.yaml"


def with_overrides(
    config: RunConfig, seed: Optional[int], steps: Optional[int]
) -> RunConfig:
    """config with the command-line seed and step count applied"""
    changes = {}
    if seed is not None:
        changes["seed"] = seed
    if steps is not None:
        changes["max_steps"] = steps
    if not changes:
        return config
    return RunConfig(
        model=config.model_config, train=evolve(config.train_config, **changes)
    )


def resume_digest(config: RunConfig) -> str:
    """digest of config without its stopping point: resuming may extend a run"""
    return RunConfig(
        model=config.model_config,
        train=evolve(config.train_config, max_steps=None, epochs=1),
    ).digest


def main(
    config: pathlib.Path,
    data: pathlib.Path,
    out: pathlib.Path,
    seed: Optional[int],
    steps: Optional[int],
    resume: bool,  # noqa: FBT001
    threads: Optional[int],
) -> int:
    set_threads(threads)
    out = pathlib.Path(out)
    run_config = with_overrides(RunConfig.read_file(config), seed, steps)
    model = run_config.model_config

    clips, metadata = load_clips(data)
    num_categories = int(metadata.get("num_categories", 0))
    if num_categories > model.num_categories:
        raise ConfigurationError(
            f"Dataset has {num_categories} categories but the model is "
            f"configured for {model.num_categories}"
        )

    trainer = None
    if resume:
        checkpoint = Checkpoint.load(checkpoint_path(out))
        if resume_digest(checkpoint.config) != resume_digest(run_config):
            raise ConfigurationError(
                f"Cannot resume from {checkpoint_path(out)}: "
                "it was trained with another configuration"
            )
        trainer = Trainer.from_checkpoint(checkpoint)
        Config.logger.info(f"resuming from step {trainer.step}")

    manifest = RunManifest.start(
        NAME,
        run_config.train_config.seed,
        run_config.to_yaml(),
        {
            "config": config,
            "data": data,
            "steps": steps,
            "resume": resume,
        },
    )
    config_path = write_yaml(out / CONFIG_FILENAME, run_config.to_dict())
    trainer, _ = train_loop(clips, run_config, output_dir=out, trainer=trainer)

    outputs = [config_path, out / CHECKPOINT_FILENAME]
    if (out / TELEMETRY_FILENAME).exists():
        outputs.append(out / TELEMETRY_FILENAME)
    manifest.finish(out, outputs)
    return succeed(f"trained to step {trainer.step}, checkpoint in {out}")


def add_parser(subparsers, parents: list[argparse.ArgumentParser]):
    parser = subparsers.add_parser(
        NAME, parents=parents, help="Train on a prepared clip cache"
    )
    parser.add_argument(
        "--config",
        type=pathlib.Path,
        required=True,
        dest="config",
        help="YAML run config with `model:` and `train:` mappings",
    )
    parser.add_argument(
        "--data",
        type=pathlib.Path,
        required=True,
        dest="data",
        help="Clip cache file or the folder holding it",
    )
    parser.add_argument(
        "--out",
        type=pathlib.Path,
        required=True,
        dest="out",
        help="Run folder for checkpoint, telemetry and manifest",
    )
    parser.add_argument(
        "--seed",
        type=int,
        dest="seed",
        help="Overrides train.seed of the config",
    )
    parser.add_argument(
        "--steps",
        type=int,
        dest="steps",
        help="Overrides train.max_steps of the config",
    )
    parser.add_argument(
        "--resume",
        action="store_true",
        dest="resume",
        help="Continue from the checkpoint in the run folder",
    )
    parser.add_argument(
        "--threads", type=int, dest="threads", help="torch intra-op threads"
    )
