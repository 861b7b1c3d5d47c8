""" Parses, refines and samples an annotated dataset into a clip cache """

import argparse
import pathlib
from typing import Optional

from movgan.constants import (
    CLIP_CACHE_FILENAME,
    DATASET_PRESETS,
    DEFAULT_CLIP_LENGTH,
)
from movgan.data.annotations import CategoryVocabulary, parse_annotations
from movgan.data.clips import sample_clips, save_clips
from movgan.data.refine import refine
from movgan.utils.yaml import yaml_dump
from movgan_cli.configlib import Config, succeed, write_yaml
from movgan_cli.manifest import RunManifest

NAME = "prep"


def main(
    annotations: pathlib.Path,
    out: pathlib.Path,
    preset: str,
    max_instances: Optional[int],
    balance: bool,  # noqa: FBT001
    seed: int,
    stats_out: Optional[pathlib.Path],
    clip_length: int,
    resolution: int,
    clips_per_video: int,
    center_crop: Optional[float],
) -> int:
    out = pathlib.Path(out)
    num_categories, preset_instances = DATASET_PRESETS[preset]
    if max_instances is None:
        max_instances = preset_instances
    arguments = {
        "annotations": str(annotations),
        "preset": preset,
        "max_instances": max_instances,
        "balance": balance,
        "seed": seed,
        "clip_length": clip_length,
        "resolution": resolution,
        "clips_per_video": clips_per_video,
        "center_crop": center_crop,
    }
    manifest = RunManifest.start(NAME, seed, yaml_dump(arguments), arguments)

    records = parse_annotations(annotations)
    refined, stats = refine(records, max_instances, balance=balance, seed=seed)
    Config.logger.info(
        f"{stats.videos} video(s), {stats.categories} categories, "
        f"{stats.valid_frames} valid frame(s), max {stats.max_instance} instance(s)"
    )
    stats_path = write_yaml(stats_out or out / "stats.yaml", stats.to_dict())

    vocabulary = CategoryVocabulary.from_records(refined)
    if len(vocabulary) > num_categories:
        Config.logger.warning(
            f"{len(vocabulary)} categories found, the {preset} preset expects "
            f"at most {num_categories}"
        )
    clips = sample_clips(
        refined,
        clip_length,
        resolution,
        seed,
        vocabulary,
        clips_per_record=clips_per_video,
        center_crop=center_crop,
    )
    metadata = {
        "source": "annotations",
        "categories": list(vocabulary.names),
        "num_categories": len(vocabulary),
        "max_instances": max_instances,
        "clip_length": clip_length,
        "resolution": resolution,
        "seed": seed,
        "stats": stats.to_dict(),
    }
    cache = save_clips(out / CLIP_CACHE_FILENAME, clips, metadata)
    outputs = [cache]
    if stats_path.resolve().is_relative_to(out.resolve()):
        outputs.append(stats_path)
    manifest.finish(out, outputs)
    return succeed(f"wrote {len(clips)} clip(s) to {cache}")


def add_parser(subparsers, parents: list[argparse.ArgumentParser]):
    parser = subparsers.add_parser(
        NAME, parents=parents, help="Prepare clips from annotation files"
    )
    parser.add_argument(
        "--annotations",
        type=pathlib.Path,
        required=True,
        dest="annotations",
        help="Annotation file or folder of JSON/YAML annotation files",
    )
    parser.add_argument("--out", type=pathlib.Path, required=True, dest="out")
    parser.add_argument(
        "--preset",
        choices=sorted(DATASET_PRESETS),
        default="vidvrd",
        dest="preset",
        help="Dataset scale: vidvrd (36 categories, 11 instances) "
        "or vidvor (80 categories, 20 instances)",
    )
    parser.add_argument(
        "--max-instances",
        type=int,
        dest="max_instances",
        help="Drop videos with a frame holding more instances than this. "
        "Defaults to the preset value",
    )
    parser.add_argument(
        "--balance",
        action="store_true",
        dest="balance",
        help="Downsample object-count strata to the median stratum size",
    )
    parser.add_argument("--seed", type=int, default=0, dest="seed")
    parser.add_argument(
        "--stats-out",
        type=pathlib.Path,
        dest="stats_out",
        help="Where to write dataset statistics (YAML). Defaults to OUT/stats.yaml",
    )
    parser.add_argument(
        "--clip-length", type=int, default=DEFAULT_CLIP_LENGTH, dest="clip_length"
    )
    parser.add_argument("--resolution", type=int, default=32, dest="resolution")
    parser.add_argument(
        "--clips-per-video", type=int, default=1, dest="clips_per_video"
    )
    parser.add_argument(
        "--center-crop",
        type=float,
        dest="center_crop",
        help="Keep only this central fraction of every frame",
    )
