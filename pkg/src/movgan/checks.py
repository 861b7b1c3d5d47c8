from __future__ import annotations

import math
from collections.abc import Sequence
from typing import Any, NamedTuple, Optional

from movgan.data.clips import ClipRecord
from movgan.errors import InputError
from movgan.evaluation.editing import (
    AddInstance,
    LayoutEdit,
    RemoveInstance,
    ResizeInstance,
)
from movgan.layout import FrameLayout


class CheckResponse(NamedTuple):
    """Check Response Interface"""

    passed: Optional[bool] = False
    help_text: str = ""

    def __bool__(self) -> bool:
        return self.passed or False

    def raise_for_status(self, exc_class: type[Exception] = InputError):
        if not self.passed:
            raise exc_class(self.help_text)


def is_valid_box(coords: Sequence[Any]) -> CheckResponse:
    """whether coords is a valid normalized (x0, y0, x1, y1) box"""
    if not isinstance(coords, (list, tuple)) or len(coords) != 4:
        return CheckResponse(False, "Expecting 4 coordinates (x0, y0, x1, y1)")

    if not all(
        isinstance(value, (int, float)) and not isinstance(value, bool)
        for value in coords
    ):
        return CheckResponse(False, "Incorrect type")

    if not all(math.isfinite(value) for value in coords):
        return CheckResponse(False, "Coordinates must be finite")

    x0, y0, x1, y1 = coords
    if not (0 <= x0 < x1 <= 1):
        return CheckResponse(False, f"Invalid x-range [{x0}, {x1}]")
    if not (0 <= y0 < y1 <= 1):
        return CheckResponse(False, f"Invalid y-range [{y0}, {y1}]")

    return CheckResponse(True)


def is_valid_layout(
    layout: FrameLayout,
    *,
    max_instances: int,
    num_categories: int,
    min_pixels: Optional[tuple[int, int]] = None,
) -> CheckResponse:
    """whether layout fits the configured capacities

    min_pixels: (height, width) canvas on which every box must cover a pixel"""
    if not isinstance(layout, FrameLayout):
        return CheckResponse(False, "Incorrect type")

    if len(layout) > max_instances:
        return CheckResponse(
            False, f"{len(layout)} instances exceed maximum of {max_instances}"
        )

    for instance in layout.instances:
        if instance.category_id >= num_categories:
            return CheckResponse(
                False,
                f"Instance {instance.instance_id}: category {instance.category_id} "
                f"out of range (0-{num_categories - 1})",
            )
        if min_pixels:
            rows, cols = instance.box.pixel_extent(*min_pixels)
            if not rows or not cols:
                return CheckResponse(
                    False,
                    f"Instance {instance.instance_id}: box covers no pixel "
                    f"at {min_pixels[0]}x{min_pixels[1]}",
                )

    return CheckResponse(True)


def is_valid_clip_length(clip_length: int, *, minimum: int = 1) -> CheckResponse:
    """whether clip_length is a usable number of frames"""
    if not isinstance(clip_length, int) or isinstance(clip_length, bool):
        return CheckResponse(False, "Incorrect type")

    if clip_length < minimum:
        return CheckResponse(False, f"Clip length must be >= {minimum}")

    return CheckResponse(True)


def is_valid_resolution(resolution: int, *, base: int = 4) -> CheckResponse:
    """whether resolution is reachable by doubling the base resolution"""
    if not isinstance(resolution, int) or isinstance(resolution, bool):
        return CheckResponse(False, "Incorrect type")

    if resolution < base:
        return CheckResponse(False, f"Resolution must be >= {base}")

    ratio = resolution // base
    if resolution % base or ratio & (ratio - 1):
        return CheckResponse(
            False, f"Resolution {resolution} is not {base}×2^k (8, 16, 32, 64…)"
        )

    return CheckResponse(True)


def is_valid_frame_pair(t1: int, t2: int, clip_length: int) -> CheckResponse:
    """whether (t1, t2) index frames of a clip of clip_length frames"""
    for name, value in (("t1", t1), ("t2", t2)):
        if not isinstance(value, int) or isinstance(value, bool):
            return CheckResponse(False, f"{name}: incorrect type")
        if not 0 <= value < clip_length:
            return CheckResponse(
                False, f"{name}={value} outside clip of {clip_length} frames"
            )

    return CheckResponse(True)


def is_valid_clip_record(
    clip: ClipRecord,
    *,
    clip_length: int,
    resolution: int,
    max_instances: int,
    num_categories: int,
) -> CheckResponse:
    """whether clip can feed a model of that shape"""
    if not isinstance(clip, ClipRecord):
        return CheckResponse(False, "Incorrect type")

    if clip.clip_length != clip_length:
        return CheckResponse(
            False,
            f"Clip `{clip.source_id}` has {clip.clip_length} frames, "
            f"expecting {clip_length}",
        )

    if clip.resolution != (resolution, resolution):
        return CheckResponse(
            False,
            f"Clip `{clip.source_id}` is {clip.resolution[0]}x{clip.resolution[1]}, "
            f"expecting {resolution}x{resolution}",
        )

    if clip.frames.min() < -1 or clip.frames.max() > 1:
        return CheckResponse(False, f"Clip `{clip.source_id}` pixels outside [-1, 1]")

    for layout in clip.layouts:
        check = is_valid_layout(
            layout, max_instances=max_instances, num_categories=num_categories
        )
        if not check:
            return CheckResponse(
                False,
                f"Clip `{clip.source_id}` frame {layout.frame_index}: "
                f"{check.help_text}",
            )

    return CheckResponse(True)


def is_valid_edit(
    layout: FrameLayout, edit: LayoutEdit, *, max_instances: Optional[int] = None
) -> CheckResponse:
    """whether edit applies to layout"""
    if isinstance(edit, AddInstance):
        if max_instances is not None and len(layout) >= max_instances:
            return CheckResponse(
                False,
                f"Cannot add to a layout of {len(layout)} instances "
                f"(max {max_instances})",
            )
        if edit.instance_id is not None and edit.instance_id in layout.instance_ids:
            return CheckResponse(
                False, f"instance_id {edit.instance_id} already in layout"
            )
        return CheckResponse(True)

    if not isinstance(edit, (RemoveInstance, ResizeInstance)):
        return CheckResponse(False, "Incorrect type")

    if edit.instance_id not in layout.instance_ids:
        return CheckResponse(False, f"Unknown instance_id {edit.instance_id}")

    return CheckResponse(True)
