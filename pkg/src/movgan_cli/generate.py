""" Renders a clip from a single-frame layout file """

import argparse
import pathlib
from typing import Optional

from movgan.checks import is_valid_clip_length, is_valid_layout
from movgan.conditioning import condition_layout
from movgan.data.clips import write_frames
from movgan.errors import InputError, LayoutValidationError
from movgan.generator import LatentPair, render_layouts
from movgan.layout import FrameLayout
from movgan.utils.misc import torch_generator
from movgan_cli.configlib import load_generator, succeed, write_yaml
from movgan_cli.manifest import RunManifest

NAME = "generate"
METADATA_FILENAME = "metadata.yaml"


def read_layout(fpath: pathlib.Path) -> FrameLayout:
    fpath = pathlib.Path(fpath)
    if not fpath.is_file():
        raise InputError(f"Layout file not found: {fpath}")
    return FrameLayout.read_from(fpath)


def check_layout(layout: FrameLayout, model):
    is_valid_layout(
        layout,
        max_instances=model.max_instances,
        num_categories=model.num_categories,
        min_pixels=(model.resolution, model.resolution),
    ).raise_for_status(LayoutValidationError)


def main(
    checkpoint: pathlib.Path,
    layout: pathlib.Path,
    seed: int,
    out: pathlib.Path,
    clip_length: Optional[int],
) -> int:
    out = pathlib.Path(out)
    if clip_length is not None:
        is_valid_clip_length(clip_length).raise_for_status()
    generator, run_config = load_generator(checkpoint)
    model = run_config.model_config
    mode = run_config.train_config.mode

    frame_layout = read_layout(layout)
    check_layout(frame_layout, model)

    arguments = {
        "checkpoint": checkpoint,
        "layout": layout,
        "seed": seed,
        "clip_length": clip_length,
    }
    manifest = RunManifest.start(NAME, seed, run_config.to_yaml(), arguments)
    latents = LatentPair.sample(1, model, torch_generator(seed))
    clip = render_layouts(
        generator, [condition_layout(frame_layout, mode)], latents, clip_length
    )[0]
    frames = write_frames(out / "frames", clip)
    metadata = write_yaml(
        out / METADATA_FILENAME,
        {
            "resolution": model.resolution,
            "clip_length": clip.shape[0],
            "seed": seed,
            "conditioning_mode": mode.value,
            "layout": frame_layout.to_text().splitlines(),
        },
    )
    manifest.finish(out, [*frames, metadata])
    return succeed(f"wrote {len(frames)} frame(s) to {out / 'frames'}")


def add_parser(subparsers, parents: list[argparse.ArgumentParser]):
    parser = subparsers.add_parser(
        NAME, parents=parents, help="Generate a clip from a first-frame layout"
    )
    parser.add_argument(
        "--checkpoint",
        type=pathlib.Path,
        required=True,
        dest="checkpoint",
        help="Checkpoint file or training run folder",
    )
    parser.add_argument(
        "--layout",
        type=pathlib.Path,
        required=True,
        dest="layout",
        help="Layout file: one `category_id x0 y0 x1 y1` line per instance "
        "in normalized coordinates",
    )
    parser.add_argument("--seed", type=int, default=0, dest="seed")
    parser.add_argument("--out", type=pathlib.Path, required=True, dest="out")
    parser.add_argument(
        "--clip-length",
        type=int,
        dest="clip_length",
        help="Number of frames. Defaults to the trained clip length",
    )
