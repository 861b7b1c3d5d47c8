""" Regenerates a clip after editing its first-frame layout """

import argparse
import pathlib

from movgan.checks import is_valid_edit
from movgan.conditioning import condition_layout
from movgan.data.clips import write_frames
from movgan.errors import InputError
from movgan.evaluation.editing import edit_layout, read_edit_script
from movgan.generator import LatentPair, render_layouts
from movgan.utils.misc import torch_generator
from movgan_cli.configlib import (
    Config,
    fail_invalid,
    load_generator,
    succeed,
    write_yaml,
)
from movgan_cli.generate import METADATA_FILENAME, check_layout, read_layout
from movgan_cli.manifest import RunManifest

NAME = "edit"


def main(
    checkpoint: pathlib.Path,
    layout: pathlib.Path,
    script: pathlib.Path,
    seed: int,
    out: pathlib.Path,
) -> int:
    out = pathlib.Path(out)
    generator, run_config = load_generator(checkpoint)
    model = run_config.model_config
    mode = run_config.train_config.mode

    original = read_layout(layout)
    check_layout(original, model)
    if not pathlib.Path(script).is_file():
        raise InputError(f"Edit script not found: {script}")
    edits = read_edit_script(script)

    edited = original
    for edit in edits:
        check = is_valid_edit(edited, edit, max_instances=model.max_instances)
        if not check:
            return fail_invalid(check.help_text)
        edited = edit_layout(edited, edit, max_instances=model.max_instances)
        Config.logger.debug(f"applied {edit}")
    check_layout(edited, model)

    arguments = {"checkpoint": checkpoint, "layout": layout, "script": script}
    manifest = RunManifest.start(
        NAME,
        seed,
        run_config.to_yaml(),
        {**arguments, "seed": seed},
    )
    # both clips share the latent so only the layout differs
    latents = LatentPair.sample(1, model, torch_generator(seed))
    clips = render_layouts(
        generator,
        [condition_layout(original, mode), condition_layout(edited, mode)],
        LatentPair(
            content=latents.content.repeat(2, 1),
            motion=latents.motion.repeat(2, 1),
        ),
    )
    outputs = [
        *write_frames(out / "original", clips[0]),
        *write_frames(out / "edited", clips[1]),
    ]
    edited_path = out / "edited_layout.txt"
    edited_path.write_text(edited.to_text())
    outputs.append(edited_path)
    outputs.append(
        write_yaml(
            out / METADATA_FILENAME,
            {
                "resolution": model.resolution,
                "clip_length": clips.shape[1],
                "seed": seed,
                "conditioning_mode": mode.value,
                "edits": len(edits),
                "layout": original.to_text().splitlines(),
                "edited_layout": edited.to_text().splitlines(),
            },
        )
    )
    manifest.finish(out, outputs)
    return succeed(f"applied {len(edits)} edit(s), clips in {out}")


def add_parser(subparsers, parents: list[argparse.ArgumentParser]):
    parser = subparsers.add_parser(
        NAME, parents=parents, help="Edit a layout and regenerate under a fixed latent"
    )
    parser.add_argument(
        "--checkpoint",
        type=pathlib.Path,
        required=True,
        dest="checkpoint",
        help="Checkpoint file or training run folder",
    )
    parser.add_argument("--layout", type=pathlib.Path, required=True, dest="layout")
    parser.add_argument(
        "--script",
        type=pathlib.Path,
        required=True,
        dest="script",
        help="Edit script: `add <category> x0 y0 x1 y1`, `remove <instance_id>` "
        "or `resize <instance_id> x0 y0 x1 y1` per line",
    )
    parser.add_argument("--seed", type=int, default=0, dest="seed")
    parser.add_argument("--out", type=pathlib.Path, required=True, dest="out")
