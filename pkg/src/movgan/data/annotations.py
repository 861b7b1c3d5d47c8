"""VidVRD-style annotation ingestion

One record per video, as a JSON or YAML mapping (a file may also hold a list of
records)::

    video_id: ILSVRC2015_train_00005003
    frame_count: 3
    width: 640
    height: 360
    frames_dir: frames/ILSVRC2015_train_00005003   # optional, relative to file
    subject/objects:                               # `objects` also accepted
      - {tid: 0, category: dog}
    trajectories:                                  # one list per frame
      - [{tid: 0, bbox: {xmin: 10, ymin: 20, xmax: 110, ymax: 220}}]
      - []
      - [{tid: 0, bbox: {xmin: 12, ymin: 20, xmax: 112, ymax: 220}}]

Pixel boxes are clamped to the frame, then normalized to [0, 1]."""

from __future__ import annotations

import logging
import pathlib
from collections.abc import Iterable
from typing import Any

from attrs import define, field
from tqdm import tqdm

from movgan.errors import AnnotationParseError, LayoutValidationError
from movgan.layout import BoundingBox, FrameLayout, LayoutInstance
from movgan.utils.yaml import yaml_load

logger = logging.getLogger(__name__)

ANNOTATION_SUFFIXES = (".json", ".yaml", ".yml")


@define(frozen=True)
class TrajectoryBox:
    instance_id: int
    box: BoundingBox


@define(frozen=True, kw_only=True)
class AnnotationRecord:
    """Objects and per-frame boxes of one annotated video

    frame_indices holds the original frame number of every entry of
    trajectories (all frames until refinement drops some)."""

    video_id: str
    frame_count: int
    width: int
    height: int
    objects: dict[int, str]
    trajectories: tuple[tuple[TrajectoryBox, ...], ...]
    frame_indices: tuple[int, ...]
    frames_dir: pathlib.Path | None = None
    clamped: int = 0

    @property
    def num_frames(self) -> int:
        return len(self.trajectories)

    @property
    def categories(self) -> set[str]:
        return set(self.objects.values())

    @property
    def max_instance(self) -> int:
        return max((len(boxes) for boxes in self.trajectories), default=0)

    @property
    def object_count(self) -> int:
        """number of distinct objects appearing in the kept frames"""
        return len({item.instance_id for boxes in self.trajectories for item in boxes})

    def layout(self, position: int, vocabulary: CategoryVocabulary) -> FrameLayout:
        """FrameLayout of the position-th kept frame"""
        return FrameLayout(
            instances=[
                LayoutInstance(
                    category_id=vocabulary.index(self.objects[item.instance_id]),
                    instance_id=item.instance_id,
                    box=item.box,
                )
                for item in self.trajectories[position]
            ],
            frame_index=self.frame_indices[position],
        )


@define(frozen=True)
class CategoryVocabulary:
    """category names ↔ contiguous category ids"""

    names: tuple[str, ...] = field(converter=tuple)

    @classmethod
    def from_records(cls, records: Iterable[AnnotationRecord]) -> CategoryVocabulary:
        return cls(sorted({name for record in records for name in record.categories}))

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError as exc:
            raise LayoutValidationError(f"Unknown category `{name}`") from exc


def require(payload: dict, key: str, video_id: str, kind: type | tuple[type, ...]):
    if key not in payload:
        raise AnnotationParseError(video_id, key, "missing")
    value = payload[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise AnnotationParseError(
            video_id, key, f"unexpected type {type(value).__name__}"
        )
    return value


def parse_tid(value: Any, video_id: str, name: str) -> int:
    try:
        return int(value)
    except (TypeError, ValueError) as exc:
        raise AnnotationParseError(video_id, name, f"invalid tid {value!r}") from exc


def parse_record(payload: Any, base: pathlib.Path | None = None) -> AnnotationRecord:
    """AnnotationRecord from a decoded mapping, raising AnnotationParseError"""
    if not isinstance(payload, dict):
        raise AnnotationParseError("?", "<record>", "not a mapping")
    video_id = str(payload.get("video_id", "?"))
    if "video_id" not in payload:
        raise AnnotationParseError(video_id, "video_id", "missing")
    frame_count = require(payload, "frame_count", video_id, int)
    width = require(payload, "width", video_id, int)
    height = require(payload, "height", video_id, int)
    if width < 1 or height < 1:
        raise AnnotationParseError(video_id, "width/height", "must be positive")

    key = "subject/objects" if "subject/objects" in payload else "objects"
    objects: dict[int, str] = {}
    for entry in require(payload, key, video_id, list):
        if not isinstance(entry, dict) or "tid" not in entry or "category" not in entry:
            raise AnnotationParseError(video_id, key, "entries need tid and category")
        tid = parse_tid(entry["tid"], video_id, key)
        if tid in objects:
            raise AnnotationParseError(video_id, key, f"duplicate tid {tid}")
        objects[tid] = str(entry["category"])

    raw_trajectories = require(payload, "trajectories", video_id, list)
    if len(raw_trajectories) != frame_count:
        raise AnnotationParseError(
            video_id,
            "trajectories",
            f"{len(raw_trajectories)} frames listed, frame_count is {frame_count}",
        )

    clamped = 0
    trajectories = []
    for frame_index, raw_boxes in enumerate(raw_trajectories):
        name = f"trajectories[{frame_index}]"
        if not isinstance(raw_boxes, list):
            raise AnnotationParseError(video_id, name, "not a list")
        boxes = []
        for raw in raw_boxes:
            if not isinstance(raw, dict) or "tid" not in raw or "bbox" not in raw:
                raise AnnotationParseError(video_id, name, "entries need tid and bbox")
            tid = parse_tid(raw["tid"], video_id, name)
            if tid not in objects:
                raise AnnotationParseError(video_id, name, f"undeclared tid {tid}")
            try:
                coords = [
                    float(raw["bbox"][key]) for key in ("xmin", "ymin", "xmax", "ymax")
                ]
            except (KeyError, TypeError, ValueError) as exc:
                raise AnnotationParseError(
                    video_id, f"{name}.bbox", f"unreadable ({exc})"
                ) from exc
            xmin, ymin, xmax, ymax = coords
            clamped_coords = (
                min(max(xmin, 0.0), width),
                min(max(ymin, 0.0), height),
                min(max(xmax, 0.0), width),
                min(max(ymax, 0.0), height),
            )
            if clamped_coords != (xmin, ymin, xmax, ymax):
                clamped += 1
            try:
                box = BoundingBox.from_pixels(
                    *clamped_coords, width=width, height=height
                )
            except LayoutValidationError as exc:
                raise AnnotationParseError(
                    video_id, f"{name}.bbox", f"degenerate box ({exc})"
                ) from exc
            boxes.append(TrajectoryBox(tid, box))
        trajectories.append(tuple(boxes))

    frames_dir = payload.get("frames_dir")
    if frames_dir is not None:
        frames_dir = pathlib.Path(frames_dir)
        if base is not None and not frames_dir.is_absolute():
            frames_dir = base / frames_dir

    return AnnotationRecord(
        video_id=video_id,
        frame_count=frame_count,
        width=width,
        height=height,
        objects=objects,
        trajectories=tuple(trajectories),
        frame_indices=tuple(range(frame_count)),
        frames_dir=frames_dir,
        clamped=clamped,
    )


def annotation_files(path: pathlib.Path) -> list[pathlib.Path]:
    path = pathlib.Path(path)
    if path.is_file():
        return [path]
    if not path.is_dir():
        raise FileNotFoundError(f"Annotation path not found: {path}")
    return sorted(
        fpath
        for fpath in path.rglob("*")
        if fpath.is_file() and fpath.suffix.lower() in ANNOTATION_SUFFIXES
    )


def parse_annotations(path: pathlib.Path) -> list[AnnotationRecord]:
    """records of every annotation file under path (file or directory)"""
    records: list[AnnotationRecord] = []
    for fpath in tqdm(annotation_files(path), desc="annotations", disable=None):
        try:
            document = yaml_load(fpath.read_text())
        except Exception as exc:
            raise AnnotationParseError(
                fpath.stem, "<file>", f"unreadable: {exc}"
            ) from exc
        payloads = document if isinstance(document, list) else [document]
        records += [parse_record(payload, base=fpath.parent) for payload in payloads]

    clamped = sum(record.clamped for record in records)
    if clamped:
        logger.warning(f"clamped {clamped} out-of-frame box(es) to frame bounds")
    ids = [record.video_id for record in records]
    dups = sorted({video_id for video_id in ids if ids.count(video_id) > 1})
    if dups:
        raise AnnotationParseError(dups[0], "video_id", "duplicate record")
    logger.debug(f"parsed {len(records)} annotation record(s) from {path}")
    return records
