""" Scores a checkpoint against a clip cache: FID, FVD or layout adherence """

import argparse
import pathlib
import sys
from typing import Optional

import torch

from movgan.checks import is_valid_clip_record
from movgan.data.clips import load_clips
from movgan.errors import ConfigurationError, InputError
from movgan.evaluation.extractors import FeatureExtractor
from movgan.evaluation.metrics import (
    chance_adherence,
    evaluate,
    first_frame_layouts,
    generate_clips,
    layout_adherence,
)
from movgan.utils.yaml import yaml_dump
from movgan_cli.configlib import load_generator, succeed, write_yaml
from movgan_cli.manifest import RunManifest

NAME = "eval"
MODES = ("fid", "fvd", "adherence")
RESULTS_FILENAME = "results.yaml"


def adherence_record(generator, clips, metadata, samples: int, seed: int, mode):
    if metadata.get("source") != "toy":
        raise InputError(
            "Layout adherence needs the toy palette: "
            f"clip cache source is `{metadata.get('source')}`"
        )
    if samples < 1:
        raise InputError(f"samples must be >= 1, got {samples}")
    layouts = first_frame_layouts(clips, samples)
    generated = torch.cat(
        list(generate_clips(generator, layouts, seed=seed, conditioning=mode))
    )
    resolution = generator.config.resolution
    return {
        "mode": "adherence",
        "score": layout_adherence(generated, layouts),
        "chance": chance_adherence(layouts, resolution, resolution),
        "generated_samples": samples,
    }


def main(
    checkpoint: pathlib.Path,
    data: pathlib.Path,
    mode: str,
    samples: int,
    seed: int,
    extractor_seed: int,
    out: Optional[pathlib.Path],
) -> int:
    generator, run_config = load_generator(checkpoint)
    model = run_config.model_config
    conditioning = run_config.train_config.mode
    clips, metadata = load_clips(data)
    if not clips:
        raise InputError(f"No clip in {data}")
    for clip in clips:
        is_valid_clip_record(
            clip,
            clip_length=model.clip_length,
            resolution=model.resolution,
            max_instances=model.max_instances,
            num_categories=model.num_categories,
        ).raise_for_status(ConfigurationError)

    arguments = {
        "checkpoint": checkpoint,
        "data": data,
        "mode": mode,
        "samples": samples,
        "extractor_seed": extractor_seed,
    }
    manifest = RunManifest.start(NAME, seed, run_config.to_yaml(), arguments)
    if mode == "adherence":
        record = adherence_record(
            generator, clips, metadata, samples, seed, conditioning
        )
    else:
        extractor = FeatureExtractor(
            "image" if mode == "fid" else "video", seed=extractor_seed
        )
        record = evaluate(
            generator,
            clips,
            extractor,
            samples,
            seed=seed,
            conditioning=conditioning,
        ).to_dict()
    record["seed"] = seed

    print(yaml_dump(record), end="")  # noqa: T201
    sys.stdout.flush()
    if out is not None:
        out = pathlib.Path(out)
        manifest.finish(out, [write_yaml(out / RESULTS_FILENAME, record)])
    return succeed(f"{mode}: {record['score']:.4f}")


def add_parser(subparsers, parents: list[argparse.ArgumentParser]):
    parser = subparsers.add_parser(
        NAME, parents=parents, help="Evaluate a checkpoint against a clip cache"
    )
    parser.add_argument(
        "--checkpoint",
        type=pathlib.Path,
        required=True,
        dest="checkpoint",
        help="Checkpoint file or training run folder",
    )
    parser.add_argument(
        "--data",
        type=pathlib.Path,
        required=True,
        dest="data",
        help="Clip cache file or the folder holding it",
    )
    parser.add_argument("--mode", choices=MODES, default="fid", dest="mode")
    parser.add_argument(
        "--samples",
        type=int,
        default=256,
        dest="samples",
        help="Number of generated clips",
    )
    parser.add_argument("--seed", type=int, default=0, dest="seed")
    parser.add_argument(
        "--extractor-seed",
        type=int,
        default=0,
        dest="extractor_seed",
        help="Seed of the surrogate feature extractor",
    )
    parser.add_argument(
        "--out",
        type=pathlib.Path,
        dest="out",
        help="Folder to write results and manifest into",
    )
