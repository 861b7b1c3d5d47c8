"""Training examples: fixed-length clips with their per-frame layouts, clip
sampling from annotated frame folders and the on-disk clip cache"""

from __future__ import annotations

import logging
import pathlib
from collections.abc import Sequence
from typing import Any, NamedTuple

import cv2
import numpy as np
import torch
from attrs import define, field
from tqdm import tqdm

from movgan.constants import (
    CLIP_CACHE_FILENAME,
    CLIP_CACHE_FORMAT_VERSION,
    FRAME_EXTENSIONS,
)
from movgan.data.annotations import AnnotationRecord, CategoryVocabulary
from movgan.errors import InputError, InsufficientFramesError, LayoutValidationError
from movgan.layout import (
    BoundingBox,
    FrameLayout,
    LayoutBatch,
    LayoutInstance,
    clip_identities,
    pack_layouts,
)
from movgan.utils.misc import ensure_dir

logger = logging.getLogger(__name__)


@define(frozen=True, eq=False, kw_only=True)
class ClipRecord:
    """frames (T, 3, H, W) in [-1, 1] with the layout of every frame"""

    frames: torch.Tensor
    layouts: tuple[FrameLayout, ...] = field(converter=tuple)
    source_id: str = ""
    start_frame: int = 0

    def __attrs_post_init__(self):
        if self.frames.dim() != 4 or self.frames.shape[1] != 3:
            raise InputError(
                f"Clip frames must be (T, 3, H, W), got {tuple(self.frames.shape)}"
            )
        if len(self.layouts) != self.frames.shape[0]:
            raise InputError(
                f"{len(self.layouts)} layouts for {self.frames.shape[0]} frames"
            )

    @property
    def clip_length(self) -> int:
        return self.frames.shape[0]

    @property
    def resolution(self) -> tuple[int, int]:
        return tuple(self.frames.shape[-2:])

    @property
    def max_instance(self) -> int:
        return max(len(layout) for layout in self.layouts)


class ClipBatch(NamedTuple):
    """B clips stacked: frames (B, T, 3, H, W), layouts[t] packs frame t"""

    frames: torch.Tensor
    layouts: list[LayoutBatch]

    @property
    def first_layouts(self) -> LayoutBatch:
        return self.layouts[0]


def collate(
    clips: Sequence[ClipRecord], capacity: int, device: torch.device | str = "cpu"
) -> ClipBatch:
    frames = torch.stack([clip.frames for clip in clips]).to(device)
    identities = [clip_identities(clip.layouts) for clip in clips]
    layouts = [
        pack_layouts(
            [clip.layouts[index] for clip in clips],
            capacity,
            identities=identities,
            dtype=frames.dtype,
            device=device,
        )
        for index in range(frames.shape[1])
    ]
    return ClipBatch(frames, layouts)


def to_unit_range(image: np.ndarray) -> torch.Tensor:
    """(3, H, W) float tensor in [-1, 1] from an H×W×3 uint8 RGB array"""
    pixels = torch.from_numpy(np.ascontiguousarray(image)).permute(2, 0, 1)
    return pixels.float() / 127.5 - 1.0


def to_uint8(frames: torch.Tensor) -> torch.Tensor:
    return ((frames.clamp(-1, 1) + 1.0) * 127.5).round().to(torch.uint8)


def center_crop_box(fraction: float) -> BoundingBox:
    margin = (1.0 - fraction) / 2
    return BoundingBox(margin, margin, 1.0 - margin, 1.0 - margin)


def remap_layout(layout: FrameLayout, window: BoundingBox) -> FrameLayout:
    """layout in the coordinates of the window region; instances left outside
    are dropped, the others clipped to it"""
    instances = []
    for instance in layout.instances:
        box = instance.box
        coords = (
            (min(max(box.x0, window.x0), window.x1) - window.x0) / window.width,
            (min(max(box.y0, window.y0), window.y1) - window.y0) / window.height,
            (min(max(box.x1, window.x0), window.x1) - window.x0) / window.width,
            (min(max(box.y1, window.y0), window.y1) - window.y0) / window.height,
        )
        coords = tuple(min(max(value, 0.0), 1.0) for value in coords)
        try:
            remapped = BoundingBox(*coords)
        except LayoutValidationError:
            continue
        instances.append(
            LayoutInstance(
                category_id=instance.category_id,
                instance_id=instance.instance_id,
                box=remapped,
            )
        )
    return FrameLayout(instances=instances, frame_index=layout.frame_index)


def center_crop_clip(clip: ClipRecord, fraction: float) -> ClipRecord:
    """clip restricted to its central fraction, resized back to its resolution"""
    if fraction >= 1.0:
        return clip
    window = center_crop_box(fraction)
    height, width = clip.resolution
    top, bottom = round(window.y0 * height), round(window.y1 * height)
    left, right = round(window.x0 * width), round(window.x1 * width)
    cropped = torch.nn.functional.interpolate(
        clip.frames[:, :, top:bottom, left:right],
        size=(height, width),
        mode="bilinear",
        align_corners=False,
    )
    return ClipRecord(
        frames=cropped.clamp(-1, 1),
        layouts=[remap_layout(layout, window) for layout in clip.layouts],
        source_id=clip.source_id,
        start_frame=clip.start_frame,
    )


def frame_path(frames_dir: pathlib.Path, frame_index: int) -> pathlib.Path:
    for suffix in FRAME_EXTENSIONS:
        for stem in (f"{frame_index:06d}", f"{frame_index:05d}", str(frame_index)):
            fpath = frames_dir / f"{stem}{suffix}"
            if fpath.is_file():
                return fpath
    raise InputError(f"No image for frame {frame_index} in {frames_dir}")


def read_frame(fpath: pathlib.Path, resolution: int) -> np.ndarray:
    """H×W×3 uint8 RGB image resized to resolution×resolution"""
    image = cv2.imread(str(fpath), cv2.IMREAD_COLOR)
    if image is None:
        raise InputError(f"Unable to decode frame image {fpath}")
    image = cv2.resize(image, (resolution, resolution), interpolation=cv2.INTER_AREA)
    return cv2.cvtColor(image, cv2.COLOR_BGR2RGB)


def valid_starts(record: AnnotationRecord, clip_length: int) -> list[int]:
    """positions starting clip_length consecutive kept frames"""
    indices = record.frame_indices
    starts = []
    run_start = 0
    for position in range(len(indices)):
        if position and indices[position] != indices[position - 1] + 1:
            run_start = position
        if position - run_start + 1 >= clip_length:
            starts.append(position - clip_length + 1)
    return starts


def sample_clip(
    record: AnnotationRecord,
    clip_length: int,
    resolution: int,
    rng: np.random.Generator,
    vocabulary: CategoryVocabulary,
    *,
    center_crop: float | None = None,
) -> ClipRecord:
    """random window of clip_length consecutive frames with aligned layouts"""
    if clip_length < 1:
        raise InputError("clip_length must be >= 1")
    starts = valid_starts(record, clip_length)
    if not starts:
        raise InsufficientFramesError(
            f"video `{record.video_id}` has no {clip_length} consecutive valid frames"
        )
    if record.frames_dir is None:
        raise InputError(f"video `{record.video_id}` has no frames_dir")
    start = starts[int(rng.integers(len(starts)))]
    positions = range(start, start + clip_length)
    frames = torch.stack(
        [
            to_unit_range(
                read_frame(
                    frame_path(record.frames_dir, record.frame_indices[pos]),
                    resolution,
                )
            )
            for pos in positions
        ]
    )
    clip = ClipRecord(
        frames=frames,
        layouts=[record.layout(pos, vocabulary) for pos in positions],
        source_id=record.video_id,
        start_frame=record.frame_indices[start],
    )
    if center_crop is not None:
        clip = center_crop_clip(clip, center_crop)
    return clip


def sample_clips(
    records: Sequence[AnnotationRecord],
    clip_length: int,
    resolution: int,
    seed: int,
    vocabulary: CategoryVocabulary,
    *,
    clips_per_record: int = 1,
    center_crop: float | None = None,
) -> list[ClipRecord]:
    """clips from every record, skipping (and counting) too-short records"""
    rng = np.random.default_rng(seed)
    clips: list[ClipRecord] = []
    skipped = 0
    for record in tqdm(records, desc="clips", disable=None):
        for _ in range(clips_per_record):
            try:
                clips.append(
                    sample_clip(
                        record,
                        clip_length,
                        resolution,
                        rng,
                        vocabulary,
                        center_crop=center_crop,
                    )
                )
            except InsufficientFramesError as exc:
                logger.debug(str(exc))
                skipped += 1
                break
    if skipped:
        logger.warning(f"skipped {skipped} record(s) with too few frames")
    return clips


def layout_rows(layout: FrameLayout) -> list[list[float]]:
    return [
        [instance.category_id, instance.instance_id, *instance.box.as_tuple()]
        for instance in layout.instances
    ]


def layout_from_rows(rows: list[list[float]], frame_index: int) -> FrameLayout:
    return FrameLayout(
        instances=[
            LayoutInstance(
                category_id=int(row[0]),
                instance_id=int(row[1]),
                box=BoundingBox(*row[2:6]),
            )
            for row in rows
        ],
        frame_index=frame_index,
    )


def save_clips(
    fpath: pathlib.Path, clips: Sequence[ClipRecord], metadata: dict[str, Any]
) -> pathlib.Path:
    """write clips (frames as uint8) and metadata to a versioned cache file"""
    fpath = pathlib.Path(fpath)
    ensure_dir(fpath.parent)
    payload = {
        "format_version": CLIP_CACHE_FORMAT_VERSION,
        "metadata": metadata,
        "clips": [
            {
                "frames": to_uint8(clip.frames),
                "layouts": [layout_rows(layout) for layout in clip.layouts],
                "frame_indices": [layout.frame_index for layout in clip.layouts],
                "source_id": clip.source_id,
                "start_frame": clip.start_frame,
            }
            for clip in clips
        ],
    }
    torch.save(payload, fpath)
    return fpath


def load_clips(fpath: pathlib.Path) -> tuple[list[ClipRecord], dict[str, Any]]:
    fpath = pathlib.Path(fpath)
    if fpath.is_dir():
        fpath = fpath / CLIP_CACHE_FILENAME
    if not fpath.is_file():
        raise InputError(f"Clip cache not found: {fpath}")
    payload = torch.load(fpath, map_location="cpu", weights_only=True)
    version = payload.get("format_version") if isinstance(payload, dict) else None
    if version != CLIP_CACHE_FORMAT_VERSION:
        raise InputError(
            f"Clip cache {fpath} has format version {version} "
            f"(expecting {CLIP_CACHE_FORMAT_VERSION})"
        )
    clips = [
        ClipRecord(
            frames=entry["frames"].float() / 127.5 - 1.0,
            layouts=[
                layout_from_rows(rows, frame_index)
                for rows, frame_index in zip(entry["layouts"], entry["frame_indices"])
            ],
            source_id=entry["source_id"],
            start_frame=entry["start_frame"],
        )
        for entry in payload["clips"]
    ]
    return clips, dict(payload.get("metadata") or {})


def write_frames(folder: pathlib.Path, frames: torch.Tensor) -> list[pathlib.Path]:
    """numbered lossless PNG images of frames (T, 3, H, W) in [-1, 1]"""
    folder = pathlib.Path(folder)
    ensure_dir(folder)
    paths = []
    for index, frame in enumerate(to_uint8(frames.detach().cpu())):
        fpath = folder / f"{index:04d}.png"
        image = cv2.cvtColor(frame.permute(1, 2, 0).numpy(), cv2.COLOR_RGB2BGR)
        if not cv2.imwrite(str(fpath), image):
            raise OSError(f"Unable to write frame {fpath}")
        paths.append(fpath)
    return paths
