"""Layout conditions of each conditioning mode

The weaker modes degrade the layout before it reaches the models:
clip-level label only, categories without locations, or a center-cropped
view; the two layout modes pass layouts through unchanged."""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable

from attrs import evolve

from movgan.data.clips import ClipRecord, center_crop_clip
from movgan.inputs.train import ConditioningMode
from movgan.layout import BoundingBox, FrameLayout, LayoutInstance

FULL_FRAME = BoundingBox(0.0, 0.0, 1.0, 1.0)


def dominant_category(layouts: Iterable[FrameLayout]) -> int | None:
    """most frequent category over layouts (lowest id on ties)"""
    counts = Counter(
        category for layout in layouts for category in layout.category_ids
    )
    if not counts:
        return None
    return min(counts, key=lambda category: (-counts[category], category))


def condition_layout(
    layout: FrameLayout,
    mode: ConditioningMode | str,
    *,
    category: int | None = None,
) -> FrameLayout:
    """layout as seen by models trained under mode

    category overrides the clip-level label of the action_label mode."""
    mode = ConditioningMode.parse(mode)
    if mode.uses_boxes:
        return layout
    if mode == ConditioningMode.ACTION_LABEL:
        label = category if category is not None else dominant_category([layout])
        if label is None:
            return evolve(layout, instances=())
        return evolve(
            layout,
            instances=[
                LayoutInstance(category_id=label, instance_id=0, box=FULL_FRAME)
            ],
        )
    return evolve(
        layout,
        instances=[evolve(instance, box=FULL_FRAME) for instance in layout.instances],
    )


def condition_clip(
    clip: ClipRecord, mode: ConditioningMode | str, center_crop_fraction: float
) -> ClipRecord:
    """training clip with frames and per-frame layouts prepared for mode"""
    mode = ConditioningMode.parse(mode)
    if mode.uses_boxes:
        return clip
    if mode.uses_center_crop:
        clip = center_crop_clip(clip, center_crop_fraction)
    label = dominant_category(clip.layouts)
    return evolve(
        clip,
        layouts=[
            condition_layout(layout, mode, category=label) for layout in clip.layouts
        ],
    )
