"""Layout edits: add an instance, remove one, or move/resize its box"""

from __future__ import annotations

import pathlib
from collections.abc import Sequence
from typing import Union

from attrs import define, evolve

from movgan.errors import InputError, LayoutValidationError
from movgan.layout import BoundingBox, FrameLayout, LayoutInstance


@define(frozen=True)
class AddInstance:
    category_id: int
    box: BoundingBox
    # next free id when unset
    instance_id: int | None = None


@define(frozen=True)
class RemoveInstance:
    instance_id: int


@define(frozen=True)
class ResizeInstance:
    instance_id: int
    box: BoundingBox


LayoutEdit = Union[AddInstance, RemoveInstance, ResizeInstance]


def edit_layout(
    layout: FrameLayout, edit: LayoutEdit, *, max_instances: int | None = None
) -> FrameLayout:
    """new layout with edit applied; layout itself is left untouched"""
    if isinstance(edit, AddInstance):
        if max_instances is not None and len(layout) >= max_instances:
            raise InputError(
                f"Cannot add to a layout of {len(layout)} instances "
                f"(max {max_instances})"
            )
        instance_id = edit.instance_id
        if instance_id is None:
            instance_id = max(layout.instance_ids, default=-1) + 1
        if instance_id in layout.instance_ids:
            raise InputError(f"instance_id {instance_id} already in layout")
        added = LayoutInstance(
            category_id=edit.category_id, instance_id=instance_id, box=edit.box
        )
        return evolve(layout, instances=(*layout.instances, added))

    if edit.instance_id not in layout.instance_ids:
        raise InputError(f"Unknown instance_id {edit.instance_id}")
    if isinstance(edit, RemoveInstance):
        return evolve(
            layout,
            instances=[
                instance
                for instance in layout.instances
                if instance.instance_id != edit.instance_id
            ],
        )
    return evolve(
        layout,
        instances=[
            evolve(instance, box=edit.box)
            if instance.instance_id == edit.instance_id
            else instance
            for instance in layout.instances
        ],
    )


def apply_edits(
    layout: FrameLayout,
    edits: Sequence[LayoutEdit],
    *,
    max_instances: int | None = None,
) -> FrameLayout:
    for edit in edits:
        layout = edit_layout(layout, edit, max_instances=max_instances)
    return layout


def parse_box(parts: Sequence[str], lineno: int) -> BoundingBox:
    from movgan.checks import is_valid_box

    try:
        coords = tuple(float(part) for part in parts)
    except ValueError as exc:
        raise InputError(f"line {lineno}: unreadable box ({exc})") from exc
    check = is_valid_box(coords)
    if not check:
        raise LayoutValidationError(f"line {lineno}: {check.help_text}")
    return BoundingBox(*coords)


def parse_edit_script(text: str) -> list[LayoutEdit]:
    """edits from lines of `add <category> x0 y0 x1 y1`, `remove <instance_id>`
    or `resize <instance_id> x0 y0 x1 y1`; `#` starts a comment"""
    edits: list[LayoutEdit] = []
    expected = {"add": 6, "remove": 2, "resize": 6}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        operation = parts[0].lower()
        if operation not in expected:
            raise InputError(f"line {lineno}: unknown edit `{parts[0]}`")
        if len(parts) != expected[operation]:
            raise InputError(
                f"line {lineno}: `{operation}` expects "
                f"{expected[operation] - 1} argument(s)"
            )
        try:
            target = int(parts[1])
        except ValueError as exc:
            raise InputError(f"line {lineno}: {exc}") from exc
        if operation == "add":
            edits.append(AddInstance(target, parse_box(parts[2:], lineno)))
        elif operation == "remove":
            edits.append(RemoveInstance(target))
        else:
            edits.append(ResizeInstance(target, parse_box(parts[2:], lineno)))
    return edits


def read_edit_script(fpath: pathlib.Path) -> list[LayoutEdit]:
    return parse_edit_script(pathlib.Path(fpath).read_text())
