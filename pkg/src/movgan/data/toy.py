"""Moving-shapes dataset: colored geometric shapes with exact ground-truth boxes"""

from __future__ import annotations

import logging

import cv2
import numpy as np
import torch
from attrs import define
from tqdm import tqdm

from movgan.data.clips import ClipRecord, to_unit_range
from movgan.errors import InputError
from movgan.layout import BoundingBox, FrameLayout, LayoutInstance

logger = logging.getLogger(__name__)


@define(frozen=True)
class ToyCategory:
    name: str
    shape: str
    color: tuple[int, int, int]

    @property
    def unit_color(self) -> tuple[float, float, float]:
        """RGB in [0, 1]"""
        return tuple(channel / 255 for channel in self.color)


TOY_PALETTE: tuple[ToyCategory, ...] = (
    ToyCategory("red-square", "square", (255, 0, 0)),
    ToyCategory("green-circle", "circle", (0, 255, 0)),
    ToyCategory("blue-triangle", "triangle", (0, 0, 255)),
    ToyCategory("yellow-square", "square", (255, 255, 0)),
    ToyCategory("magenta-circle", "circle", (255, 0, 255)),
    ToyCategory("cyan-triangle", "triangle", (0, 255, 255)),
)
TOY_NUM_CATEGORIES = len(TOY_PALETTE)


@define(kw_only=True)
class MovingShape:
    category_id: int
    instance_id: int
    half_size: int
    cx: float
    cy: float
    vx: float
    vy: float

    def advance(self, height: int, width: int):
        """constant-velocity step with elastic bounces on the frame walls"""
        self.cx += self.vx
        self.cy += self.vy
        low = self.half_size
        high_x, high_y = width - 1 - self.half_size, height - 1 - self.half_size
        if self.cx < low or self.cx > high_x:
            self.vx = -self.vx
            self.cx = min(max(self.cx, low), high_x)
        if self.cy < low or self.cy > high_y:
            self.vy = -self.vy
            self.cy = min(max(self.cy, low), high_y)


def draw_shape(mask: np.ndarray, shape: MovingShape):
    category = TOY_PALETTE[shape.category_id]
    cx, cy, half = int(round(shape.cx)), int(round(shape.cy)), shape.half_size
    if category.shape == "square":
        cv2.rectangle(mask, (cx - half, cy - half), (cx + half, cy + half), 1, -1)
    elif category.shape == "circle":
        cv2.circle(mask, (cx, cy), half, 1, -1, lineType=cv2.LINE_8)
    else:
        points = np.array(
            [[cx, cy - half], [cx - half, cy + half], [cx + half, cy + half]],
            dtype=np.int32,
        )
        cv2.fillPoly(mask, [points], 1, lineType=cv2.LINE_8)


def tight_box(mask: np.ndarray) -> BoundingBox:
    """smallest box whose pixel-center coverage contains every set pixel"""
    rows, cols = np.nonzero(mask)
    height, width = mask.shape
    return BoundingBox.from_pixels(
        int(cols.min()),
        int(rows.min()),
        int(cols.max()) + 1,
        int(rows.max()) + 1,
        width=width,
        height=height,
    )


def render_frame(
    shapes: list[MovingShape], height: int, width: int, frame_index: int
) -> tuple[np.ndarray, FrameLayout]:
    """H×W×3 uint8 RGB frame on black and its exact layout

    Shapes are painted in list order, later ones on top."""
    canvas = np.zeros((height, width, 3), dtype=np.uint8)
    instances = []
    for shape in shapes:
        mask = np.zeros((height, width), dtype=np.uint8)
        draw_shape(mask, shape)
        canvas[mask.astype(bool)] = TOY_PALETTE[shape.category_id].color
        instances.append(
            LayoutInstance(
                category_id=shape.category_id,
                instance_id=shape.instance_id,
                box=tight_box(mask),
            )
        )
    return canvas, FrameLayout(instances=instances, frame_index=frame_index)


def make_toy_clip(
    rng: np.random.Generator,
    clip_length: int,
    height: int,
    width: int,
    max_objects: int,
    *,
    max_speed: float,
    source_id: str = "toy",
) -> ClipRecord:
    num_objects = int(rng.integers(1, max_objects + 1))
    smallest = min(height, width)
    shapes = []
    for instance_id in range(num_objects):
        half_size = int(
            rng.integers(max(1, smallest // 12), max(2, smallest // 6) + 1)
        )
        shapes.append(
            MovingShape(
                category_id=int(rng.integers(TOY_NUM_CATEGORIES)),
                instance_id=instance_id,
                half_size=half_size,
                cx=float(rng.uniform(half_size, width - 1 - half_size)),
                cy=float(rng.uniform(half_size, height - 1 - half_size)),
                vx=float(rng.uniform(-max_speed, max_speed)),
                vy=float(rng.uniform(-max_speed, max_speed)),
            )
        )
    frames, layouts = [], []
    for frame_index in range(clip_length):
        image, layout = render_frame(shapes, height, width, frame_index)
        frames.append(to_unit_range(image))
        layouts.append(layout)
        for shape in shapes:
            shape.advance(height, width)
    return ClipRecord(
        frames=torch.stack(frames), layouts=layouts, source_id=source_id
    )


def make_toy_dataset(
    n_clips: int,
    clip_length: int,
    height: int,
    width: int,
    max_objects: int,
    seed: int,
    *,
    max_speed: float = 1.5,
) -> list[ClipRecord]:
    """n_clips moving-shapes clips, bitwise reproducible from seed"""
    for name, value in (
        ("n_clips", n_clips),
        ("clip_length", clip_length),
        ("height", height),
        ("width", width),
        ("max_objects", max_objects),
    ):
        if value < 1:
            raise InputError(f"{name} must be >= 1, got {value}")
    if min(height, width) < 8:
        raise InputError("Toy frames must be at least 8x8")
    if max_speed < 0:
        raise InputError("max_speed must be >= 0")
    rng = np.random.default_rng(seed)
    return [
        make_toy_clip(
            rng,
            clip_length,
            height,
            width,
            max_objects,
            max_speed=max_speed,
            source_id=f"toy-{index:05d}",
        )
        for index in tqdm(range(n_clips), desc="toy clips", disable=None)
    ]
