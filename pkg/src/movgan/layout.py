from __future__ import annotations

import pathlib
from collections.abc import Iterable, Mapping, Sequence
from typing import NamedTuple

import torch
from attrs import define, evolve, field
from typeguard import typechecked

from movgan.errors import LayoutValidationError


@typechecked
@define(frozen=True)
class BoundingBox:
    """Axis-aligned box in normalized frame coordinates

    Coordinates are fractions of the frame width (x) and height (y).
    A pixel (r, c) of an H×W canvas is covered when its center
    ((c + .5) / W, (r + .5) / H) lies in [x0, x1) × [y0, y1)."""

    x0: float = field(converter=float)
    y0: float = field(converter=float)
    x1: float = field(converter=float)
    y1: float = field(converter=float)

    def __attrs_post_init__(self):
        if not (0.0 <= self.x0 < self.x1 <= 1.0):
            raise LayoutValidationError(
                f"Invalid {type(self).__name__} x-range [{self.x0}, {self.x1}]: "
                "expecting 0 <= x0 < x1 <= 1"
            )
        if not (0.0 <= self.y0 < self.y1 <= 1.0):
            raise LayoutValidationError(
                f"Invalid {type(self).__name__} y-range [{self.y0}, {self.y1}]: "
                "expecting 0 <= y0 < y1 <= 1"
            )

    @classmethod
    def from_pixels(
        cls,
        xmin: float,
        ymin: float,
        xmax: float,
        ymax: float,
        *,
        width: int,
        height: int,
    ) -> BoundingBox:
        """box from pixel-space corners (xmax/ymax exclusive)"""
        return cls(xmin / width, ymin / height, xmax / width, ymax / height)

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return (self.x0 + self.x1) / 2, (self.y0 + self.y1) / 2

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x0, self.y0, self.x1, self.y1)

    def pixel_extent(self, height: int, width: int) -> tuple[int, int]:
        """number of covered (rows, columns) on an height×width canvas"""
        rows = torch.arange(height, dtype=torch.float64).add(0.5).div(height)
        cols = torch.arange(width, dtype=torch.float64).add(0.5).div(width)
        return (
            int(((rows >= self.y0) & (rows < self.y1)).sum()),
            int(((cols >= self.x0) & (cols < self.x1)).sum()),
        )


@typechecked
@define(frozen=True)
class LayoutInstance:
    category_id: int
    instance_id: int
    box: BoundingBox

    def __attrs_post_init__(self):
        if self.category_id < 0:
            raise LayoutValidationError(f"Negative category_id {self.category_id}")
        if self.instance_id < 0:
            raise LayoutValidationError(f"Negative instance_id {self.instance_id}")

    @property
    def sort_key(self) -> tuple:
        return (self.category_id, self.box.as_tuple(), self.instance_id)


@typechecked
@define(frozen=True)
class FrameLayout:
    """The generation condition: boxes and categories of one frame"""

    instances: tuple[LayoutInstance, ...] = field(converter=tuple, factory=tuple)
    frame_index: int = 0

    def __attrs_post_init__(self):
        ids = [instance.instance_id for instance in self.instances]
        dups = sorted({ident for ident in ids if ids.count(ident) > 1})
        if dups:
            raise LayoutValidationError(
                f"Duplicate instance_id(s) in frame {self.frame_index}: "
                f"{','.join(map(str, dups))}"
            )
        if self.frame_index < 0:
            raise LayoutValidationError(f"Negative frame_index {self.frame_index}")

    def __len__(self) -> int:
        return len(self.instances)

    @property
    def instance_ids(self) -> list[int]:
        return [instance.instance_id for instance in self.instances]

    @property
    def category_ids(self) -> list[int]:
        return [instance.category_id for instance in self.instances]

    def get(self, instance_id: int) -> LayoutInstance:
        for instance in self.instances:
            if instance.instance_id == instance_id:
                return instance
        raise KeyError(instance_id)

    def canonical(self) -> FrameLayout:
        """same layout with instances in a fixed, order-independent sequence"""
        return evolve(
            self, instances=sorted(self.instances, key=lambda item: item.sort_key)
        )

    def validate(self, *, max_instances: int, num_categories: int):
        """raise LayoutValidationError unless layout fits those capacities"""
        if len(self.instances) > max_instances:
            raise LayoutValidationError(
                f"Layout of frame {self.frame_index} has {len(self.instances)} "
                f"instances (max {max_instances})"
            )
        for instance in self.instances:
            if instance.category_id >= num_categories:
                raise LayoutValidationError(
                    f"category_id {instance.category_id} out of range "
                    f"(configured for {num_categories} categories)"
                )

    def to_text(self) -> str:
        """one `category_id x0 y0 x1 y1` line per instance"""
        return "".join(
            f"{instance.category_id} "
            + " ".join(f"{value:.6g}" for value in instance.box.as_tuple())
            + "\n"
            for instance in self.instances
        )

    @classmethod
    def from_text(cls, text: str, frame_index: int = 0) -> FrameLayout:
        """layout from `category_id x0 y0 x1 y1` lines

        instance ids follow line order; blank lines and `#` comments ignored"""
        from movgan.checks import is_valid_box

        instances = []
        for lineno, raw_line in enumerate(text.splitlines(), start=1):
            line = raw_line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 5:
                raise LayoutValidationError(
                    f"line {lineno}: expecting `category_id x0 y0 x1 y1`, "
                    f"got {len(parts)} field(s)"
                )
            try:
                category_id = int(parts[0])
                coords = [float(part) for part in parts[1:]]
            except ValueError as exc:
                raise LayoutValidationError(f"line {lineno}: {exc}") from exc
            check = is_valid_box(coords)
            if not check:
                raise LayoutValidationError(f"line {lineno}: {check.help_text}")
            instances.append(
                LayoutInstance(
                    category_id=category_id,
                    instance_id=len(instances),
                    box=BoundingBox(*coords),
                )
            )
        return cls(instances=instances, frame_index=frame_index)

    @classmethod
    def read_from(cls, fpath: pathlib.Path) -> FrameLayout:
        return cls.from_text(pathlib.Path(fpath).read_text())


class LayoutBatch(NamedTuple):
    """Padded tensor form of B layouts with up to N instances each

    boxes: (B, N, 4) x0, y0, x1, y1 ; categories, identities: (B, N) long ;
    mask: (B, N) bool, False on padding slots"""

    boxes: torch.Tensor
    categories: torch.Tensor
    identities: torch.Tensor
    mask: torch.Tensor

    @property
    def batch_size(self) -> int:
        return self.boxes.shape[0]

    @property
    def capacity(self) -> int:
        return self.boxes.shape[1]

    def to(self, device: torch.device | str) -> LayoutBatch:
        return LayoutBatch(*(tensor.to(device) for tensor in self))


def clip_identities(layouts: Iterable[FrameLayout]) -> dict[int, int]:
    """identity slot of every instance_id of a clip, by first appearance

    Instances first seen in the same frame are numbered in canonical order, so
    a lone layout's identities are its slot indices."""
    slots: dict[int, int] = {}
    for layout in layouts:
        for instance in layout.canonical().instances:
            slots.setdefault(instance.instance_id, len(slots))
    return slots


def pack_layouts(
    layouts: Sequence[FrameLayout],
    capacity: int,
    *,
    identities: Sequence[Mapping[int, int]] | None = None,
    dtype: torch.dtype = torch.float32,
    device: torch.device | str = "cpu",
) -> LayoutBatch:
    """LayoutBatch from layouts, instances in canonical order

    Canonical order makes every downstream per-instance sum independent of the
    order instances were listed in. identities maps, per row, instance_id to
    its identity slot (see clip_identities); it defaults to the row's own slot
    order. Clips with more distinct instances than capacity wrap around."""
    if identities is not None and len(identities) != len(layouts):
        raise LayoutValidationError(
            f"{len(identities)} identity maps for {len(layouts)} layouts"
        )
    batch_size = len(layouts)
    boxes = torch.zeros(batch_size, capacity, 4, dtype=dtype)
    # padding boxes are valid full-frame boxes so grids stay well-defined
    boxes[..., 2:] = 1.0
    categories = torch.zeros(batch_size, capacity, dtype=torch.long)
    ids = torch.zeros(batch_size, capacity, dtype=torch.long)
    mask = torch.zeros(batch_size, capacity, dtype=torch.bool)
    for row, layout in enumerate(layouts):
        if len(layout) > capacity:
            raise LayoutValidationError(
                f"Layout of frame {layout.frame_index} has {len(layout)} instances, "
                f"capacity is {capacity}"
            )
        slots = (
            identities[row] if identities is not None else clip_identities([layout])
        )
        for slot, instance in enumerate(layout.canonical().instances):
            boxes[row, slot] = torch.tensor(instance.box.as_tuple(), dtype=dtype)
            categories[row, slot] = instance.category_id
            if instance.instance_id not in slots:
                raise LayoutValidationError(
                    f"No identity slot for instance {instance.instance_id}"
                )
            ids[row, slot] = slots[instance.instance_id] % capacity
            mask[row, slot] = True
    return LayoutBatch(boxes, categories, ids, mask).to(device)


def empty_layout(frame_index: int = 0) -> FrameLayout:
    return FrameLayout(instances=(), frame_index=frame_index)


def merge_layouts(layouts: Iterable[FrameLayout]) -> FrameLayout:
    """union of instance sets (ids must stay distinct)"""
    layouts = list(layouts)
    return FrameLayout(
        instances=[instance for layout in layouts for instance in layout.instances],
        frame_index=layouts[0].frame_index if layouts else 0,
    )


def gather_layouts(
    per_frame: Sequence[LayoutBatch], indices: torch.Tensor
) -> LayoutBatch:
    """LayoutBatch holding, for each clip b, its layout at frame indices[b]

    per_frame[t] packs the frame-t layouts of the whole batch (same capacity)."""
    rows = torch.arange(indices.shape[0], device=indices.device)
    return LayoutBatch(
        *(
            torch.stack(tensors, dim=1)[rows, indices]
            for tensors in zip(*per_frame)
        )
    )
