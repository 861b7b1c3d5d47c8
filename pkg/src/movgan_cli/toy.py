""" Renders a moving-shapes dataset into a clip cache """

import argparse
import pathlib

from movgan.constants import CLIP_CACHE_FILENAME
from movgan.data.clips import save_clips
from movgan.data.toy import TOY_PALETTE, make_toy_dataset
from movgan.utils.yaml import yaml_dump
from movgan_cli.configlib import succeed
from movgan_cli.manifest import RunManifest

NAME = "toy"


def main(
    clips: int,
    clip_length: int,
    resolution: int,
    max_objects: int,
    max_speed: float,
    seed: int,
    out: pathlib.Path,
) -> int:
    arguments = {
        "clips": clips,
        "clip_length": clip_length,
        "resolution": resolution,
        "max_objects": max_objects,
        "max_speed": max_speed,
        "seed": seed,
    }
    manifest = RunManifest.start(NAME, seed, yaml_dump(arguments), arguments)
    dataset = make_toy_dataset(
        clips,
        clip_length,
        resolution,
        resolution,
        max_objects,
        seed,
        max_speed=max_speed,
    )
    metadata = {
        "source": "toy",
        "categories": [category.name for category in TOY_PALETTE],
        "num_categories": len(TOY_PALETTE),
        "max_instances": max_objects,
        "clip_length": clip_length,
        "resolution": resolution,
        "seed": seed,
    }
    cache = save_clips(pathlib.Path(out) / CLIP_CACHE_FILENAME, dataset, metadata)
    manifest.finish(pathlib.Path(out), [cache])
    return succeed(f"wrote {len(dataset)} toy clip(s) to {cache}")


def add_parser(subparsers, parents: list[argparse.ArgumentParser]):
    parser = subparsers.add_parser(
        NAME, parents=parents, help="Render the moving-shapes toy dataset"
    )
    parser.add_argument("--clips", type=int, default=128, dest="clips")
    parser.add_argument("--clip-length", type=int, default=8, dest="clip_length")
    parser.add_argument("--resolution", type=int, default=32, dest="resolution")
    parser.add_argument(
        "--max-objects",
        type=int,
        default=3,
        dest="max_objects",
        help="Maximum number of shapes per clip",
    )
    parser.add_argument(
        "--max-speed",
        type=float,
        default=1.5,
        dest="max_speed",
        help="Maximum speed per axis, in pixels per frame",
    )
    parser.add_argument("--seed", type=int, default=0, dest="seed")
    parser.add_argument("--out", type=pathlib.Path, required=True, dest="out")
