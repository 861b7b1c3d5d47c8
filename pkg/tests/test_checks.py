import pytest  # pyright: ignore [reportMissingImports]
import torch

from movgan.checks import (
    CheckResponse,
    is_valid_box,
    is_valid_clip_length,
    is_valid_clip_record,
    is_valid_edit,
    is_valid_frame_pair,
    is_valid_layout,
    is_valid_resolution,
)
from movgan.data.clips import ClipRecord
from movgan.errors import ConfigurationError, InputError
from movgan.evaluation.editing import AddInstance, RemoveInstance, ResizeInstance
from movgan.layout import BoundingBox, FrameLayout, LayoutInstance


def test_checkresponse_api():
    assert CheckResponse(True)
    assert CheckResponse(True).passed
    assert CheckResponse(True, "ERROR")
    assert CheckResponse(True, "ERROR").help_text
    assert not CheckResponse(False)
    assert not CheckResponse(False, "ERROR")
    assert not CheckResponse(False, "ERROR").passed
    assert CheckResponse(True).raise_for_status() is None
    with pytest.raises(InputError):
        CheckResponse(False, "ERROR!").raise_for_status()
    with pytest.raises(ConfigurationError, match="ERROR!"):
        CheckResponse(False, "ERROR!").raise_for_status(ConfigurationError)


@pytest.mark.parametrize(
    "coords, should_pass",
    [
        ((0, 0, 1, 1), True),
        ([0.1, 0.2, 0.3, 0.4], True),
        ((0.1, 0.2, 0.3), False),
        ("0 0 1 1", False),
        ((0, 0, True, 1), False),
        ((0, 0, float("nan"), 1), False),
        ((0.5, 0, 0.5, 1), False),
        ((0, 0.8, 1, 0.2), False),
        ((0, 0, 1, 1.5), False),
    ],
)
def test_boxes(coords, should_pass: bool):
    assert is_valid_box(coords).passed == should_pass


def sample_layout(*categories: int) -> FrameLayout:
    return FrameLayout(
        instances=[
            LayoutInstance(
                category_id=category,
                instance_id=index,
                box=BoundingBox(0, 0, 0.5, 0.5),
            )
            for index, category in enumerate(categories)
        ]
    )


@pytest.mark.parametrize(
    "layout, kwargs, should_pass",
    [
        (sample_layout(0, 1), {"max_instances": 2, "num_categories": 2}, True),
        (sample_layout(0, 1), {"max_instances": 1, "num_categories": 2}, False),
        (sample_layout(0, 2), {"max_instances": 2, "num_categories": 2}, False),
        (sample_layout(), {"max_instances": 0, "num_categories": 1}, True),
        ("0 0 0 1 1", {"max_instances": 2, "num_categories": 2}, False),
    ],
)
def test_layouts(layout, kwargs, should_pass: bool):
    assert is_valid_layout(layout, **kwargs).passed == should_pass


def test_layout_min_pixels():
    tiny = FrameLayout(
        instances=[
            LayoutInstance(
                category_id=0, instance_id=0, box=BoundingBox(0.01, 0.01, 0.02, 0.02)
            )
        ]
    )
    assert is_valid_layout(tiny, max_instances=1, num_categories=1)
    assert not is_valid_layout(
        tiny, max_instances=1, num_categories=1, min_pixels=(16, 16)
    )


@pytest.mark.parametrize(
    "clip_length, minimum, should_pass",
    [(1, 1, True), (16, 2, True), (1, 2, False), (0, 1, False), ("8", 1, False)],
)
def test_clip_lengths(clip_length, minimum: int, should_pass: bool):
    assert is_valid_clip_length(clip_length, minimum=minimum).passed == should_pass


@pytest.mark.parametrize(
    "resolution, should_pass",
    [(4, True), (8, True), (32, True), (128, True), (24, False), (2, False)],
)
def test_resolutions(resolution: int, should_pass: bool):
    assert is_valid_resolution(resolution).passed == should_pass


@pytest.mark.parametrize(
    "t1, t2, should_pass",
    [(0, 1, True), (3, 3, True), (0, 4, False), (-1, 0, False), (0.5, 1, False)],
)
def test_frame_pairs(t1, t2, should_pass: bool):
    assert is_valid_frame_pair(t1, t2, 4).passed == should_pass


def test_clip_records():
    clip = ClipRecord(
        frames=torch.zeros(2, 3, 8, 8), layouts=[sample_layout(0), sample_layout(1)]
    )
    shape = {"max_instances": 2, "num_categories": 2}
    assert is_valid_clip_record(clip, clip_length=2, resolution=8, **shape)
    assert not is_valid_clip_record(clip, clip_length=3, resolution=8, **shape)
    assert not is_valid_clip_record(clip, clip_length=2, resolution=16, **shape)
    assert not is_valid_clip_record(
        clip, clip_length=2, resolution=8, max_instances=2, num_categories=1
    )
    bright = ClipRecord(
        frames=torch.full((2, 3, 8, 8), 2.0), layouts=clip.layouts
    )
    assert not is_valid_clip_record(bright, clip_length=2, resolution=8, **shape)


def test_edits():
    layout = sample_layout(0, 1)
    box = BoundingBox(0, 0, 1, 1)
    assert is_valid_edit(layout, AddInstance(2, box))
    assert not is_valid_edit(layout, AddInstance(2, box), max_instances=2)
    assert not is_valid_edit(layout, AddInstance(2, box, instance_id=1))
    assert is_valid_edit(layout, RemoveInstance(1))
    assert not is_valid_edit(layout, RemoveInstance(5))
    assert is_valid_edit(layout, ResizeInstance(0, box))
    assert not is_valid_edit(layout, ResizeInstance(7, box))
    assert not is_valid_edit(layout, "remove 0")
