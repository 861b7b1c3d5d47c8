from __future__ import annotations

import cv2
import numpy as np
import pytest  # pyright: ignore [reportMissingImports]
import torch

from movgan.constants import VIDVOR_MAX_INSTANCES, VIDVRD_MAX_INSTANCES
from movgan.data.annotations import (
    AnnotationRecord,
    CategoryVocabulary,
    TrajectoryBox,
    parse_annotations,
    parse_record,
)
from movgan.data.clips import (
    collate,
    layout_rows,
    load_clips,
    sample_clip,
    sample_clips,
    save_clips,
    to_uint8,
    valid_starts,
    write_frames,
)
from movgan.data.refine import balance_strata, refine
from movgan.data.toy import TOY_NUM_CATEGORIES, make_toy_dataset
from movgan.errors import AnnotationParseError, InputError, InsufficientFramesError
from movgan.layout import BoundingBox


@pytest.fixture(scope="module")
def records(annotations_dir):
    return parse_annotations(annotations_dir)


@pytest.fixture(scope="module")
def refined(records):
    return refine(records, 11)[0]


def by_id(records, video_id: str) -> AnnotationRecord:
    return next(record for record in records if record.video_id == video_id)


def test_parse_annotations(records):
    assert [record.video_id for record in records] == ["video-a", "video-b"]
    video_a = by_id(records, "video-a")
    assert video_a.objects == {0: "dog", 1: "ball"}
    assert video_a.num_frames == 5
    assert video_a.frame_indices == (0, 1, 2, 3, 4)
    assert video_a.trajectories[0][1].box == BoundingBox(0.625, 0.625, 0.9375, 0.9375)


def test_out_of_frame_boxes_are_clamped(records):
    assert sum(record.clamped for record in records) == 2
    video_b = by_id(records, "video-b")
    assert video_b.clamped == 2
    assert video_b.trajectories[0][0].box.x0 == 0.0
    assert video_b.trajectories[2][0].box.y1 == 1.0


def test_parse_missing_path(tmp_path):
    with pytest.raises(FileNotFoundError):
        parse_annotations(tmp_path / "nope")


def valid_payload() -> dict:
    return {
        "video_id": "v",
        "frame_count": 1,
        "width": 10,
        "height": 10,
        "objects": [{"tid": 0, "category": "dog"}],
        "trajectories": [
            [{"tid": 0, "bbox": {"xmin": 0, "ymin": 0, "xmax": 5, "ymax": 5}}]
        ],
    }


@pytest.mark.parametrize(
    "changes, field",
    [
        ({"frame_count": None}, "frame_count"),
        ({"width": "wide"}, "width"),
        ({"frame_count": 2}, "trajectories"),
        ({"objects": "dog"}, "objects"),
        ({"objects": [{"tid": "x", "category": "dog"}]}, "objects"),
        ({"objects": [{"tid": None, "category": "dog"}]}, "objects"),
        (
            {
                "objects": [
                    {"tid": 0, "category": "dog"},
                    {"tid": "0", "category": "cat"},
                ]
            },
            "objects",
        ),
        (
            {"trajectories": [[{"tid": 7, "bbox": {}}]]},
            "trajectories[0]",
        ),
        ({"trajectories": [[{"tid": None, "bbox": {}}]]}, "trajectories[0]"),
        (
            {"trajectories": [[{"tid": 0, "bbox": {"xmin": 0}}]]},
            "trajectories[0].bbox",
        ),
        (
            {
                "trajectories": [
                    [{"tid": 0, "bbox": {"xmin": 4, "ymin": 0, "xmax": 4, "ymax": 5}}]
                ]
            },
            "trajectories[0].bbox",
        ),
    ],
)
def test_parse_record_errors(changes: dict, field: str):
    payload = valid_payload()
    for key, value in changes.items():
        if value is None:
            del payload[key]
        else:
            payload[key] = value
    with pytest.raises(AnnotationParseError) as excinfo:
        parse_record(payload)
    assert excinfo.value.video_id == "v"
    assert excinfo.value.field == field


def test_parse_record_not_a_mapping():
    with pytest.raises(AnnotationParseError):
        parse_record(["v"])


def test_subject_objects_key():
    payload = valid_payload()
    payload["subject/objects"] = payload.pop("objects")
    assert parse_record(payload).objects == {0: "dog"}


def test_refine(records):
    refined, stats = refine(records, 11)
    assert stats.to_dict() == {
        "videos": 2,
        "categories": 3,
        "valid_frames": 7,
        "max_instance": 2,
    }
    assert by_id(refined, "video-a").frame_indices == (0, 1, 3, 4)


def test_refine_instance_filter(records):
    refined, stats = refine(records, 1)
    assert [record.video_id for record in refined] == ["video-b"]
    assert stats.to_dict() == {
        "videos": 1,
        "categories": 1,
        "valid_frames": 3,
        "max_instance": 1,
    }


def test_refine_nothing_left(records):
    refined, stats = refine(records, 0)
    assert refined == []
    assert stats.videos == 0
    assert stats.max_instance == 0


def make_record(video_id: str, n_objects: int) -> AnnotationRecord:
    box = BoundingBox(0.0, 0.0, 0.5, 0.5)
    return AnnotationRecord(
        video_id=video_id,
        frame_count=1,
        width=8,
        height=8,
        objects={tid: "dog" for tid in range(n_objects)},
        trajectories=(tuple(TrajectoryBox(tid, box) for tid in range(n_objects)),),
        frame_indices=(0,),
    )


def test_refine_is_idempotent(records):
    refined, stats = refine(records, 11)
    again, again_stats = refine(refined, 11)
    assert again == refined
    assert again_stats == stats


def test_refine_larger_dataset_limit():
    records = [make_record("a", VIDVOR_MAX_INSTANCES), make_record("b", 21)]
    refined, stats = refine(records, VIDVOR_MAX_INSTANCES)
    assert [record.video_id for record in refined] == ["a"]
    assert stats.max_instance == 20
    assert refine(records, VIDVRD_MAX_INSTANCES)[0] == []


def test_balance_strata():
    records = [
        make_record("a", 1),
        make_record("b", 1),
        make_record("c", 2),
        make_record("d", 1),
        make_record("e", 3),
    ]
    balanced = balance_strata(records, seed=0)
    assert len(balanced) == 3
    assert sorted(record.object_count for record in balanced) == [1, 2, 3]
    # input order is kept
    positions = [records.index(record) for record in balanced]
    assert positions == sorted(positions)
    assert balance_strata(records, seed=0) == balanced
    assert balance_strata([], seed=0) == []


def test_valid_starts(refined):
    video_a = by_id(refined, "video-a")
    assert valid_starts(video_a, 1) == [0, 1, 2, 3]
    assert valid_starts(video_a, 2) == [0, 2]
    assert valid_starts(video_a, 3) == []
    assert valid_starts(by_id(refined, "video-b"), 3) == [0]


def test_sample_clip(refined):
    vocabulary = CategoryVocabulary.from_records(refined)
    assert vocabulary.names == ("ball", "cat", "dog")
    clip = sample_clip(
        by_id(refined, "video-b"), 3, 16, np.random.default_rng(0), vocabulary
    )
    assert clip.frames.shape == (3, 3, 16, 16)
    assert clip.source_id == "video-b"
    assert clip.start_frame == 0
    for index in range(3):
        expected = torch.full((3, 16, 16), 40 * index / 127.5 - 1.0)
        assert torch.allclose(clip.frames[index], expected, atol=1e-6)
    first = clip.layouts[0].instances[0]
    assert first.category_id == 1
    assert first.instance_id == 3
    assert first.box == BoundingBox(0.0, 0.125, 0.3125, 0.375)


def test_sample_clip_follows_kept_frames(refined):
    vocabulary = CategoryVocabulary.from_records(refined)
    clip = sample_clip(
        by_id(refined, "video-a"), 2, 16, np.random.default_rng(3), vocabulary
    )
    assert [layout.frame_index for layout in clip.layouts] in ([0, 1], [3, 4])
    assert clip.start_frame == clip.layouts[0].frame_index
    value = 40 * clip.start_frame / 127.5 - 1.0
    assert torch.allclose(clip.frames[0], torch.full((3, 16, 16), value), atol=1e-6)


def test_insufficient_frames(refined):
    vocabulary = CategoryVocabulary.from_records(refined)
    with pytest.raises(InsufficientFramesError):
        sample_clip(
            by_id(refined, "video-a"), 3, 16, np.random.default_rng(0), vocabulary
        )


def test_sample_clips_skips_short_records(refined):
    vocabulary = CategoryVocabulary.from_records(refined)
    clips = sample_clips(refined, 3, 16, 0, vocabulary)
    assert [clip.source_id for clip in clips] == ["video-b"]
    clips = sample_clips(refined, 2, 16, 0, vocabulary, clips_per_record=2)
    assert len(clips) == 4


def test_clip_cache(tmp_path, toy_clips):
    fpath = save_clips(tmp_path / "clips.pt", toy_clips, {"source": "toy"})
    clips, metadata = load_clips(tmp_path)
    assert fpath.is_file()
    assert metadata == {"source": "toy"}
    assert len(clips) == len(toy_clips)
    for loaded, original in zip(clips, toy_clips):
        assert torch.equal(loaded.frames, original.frames)
        assert loaded.layouts == original.layouts
        assert loaded.source_id == original.source_id


def test_clip_cache_errors(tmp_path):
    with pytest.raises(InputError):
        load_clips(tmp_path / "missing.pt")
    torch.save({"format_version": 99, "clips": []}, tmp_path / "clips.pt")
    with pytest.raises(InputError, match="format version"):
        load_clips(tmp_path / "clips.pt")


def test_collate(toy_clips):
    batch = collate(toy_clips[:2], capacity=3)
    assert batch.frames.shape == (2, 4, 3, 16, 16)
    assert len(batch.layouts) == 4
    assert batch.first_layouts is batch.layouts[0]
    assert batch.layouts[0].boxes.shape == (2, 3, 4)


def test_toy_dataset_is_reproducible():
    first = make_toy_dataset(3, 4, 32, 32, 3, seed=7)
    second = make_toy_dataset(3, 4, 32, 32, 3, seed=7)
    other = make_toy_dataset(3, 4, 32, 32, 3, seed=8)
    for one, two in zip(first, second):
        assert torch.equal(one.frames, two.frames)
        assert one.layouts == two.layouts
    assert not all(
        torch.equal(one.frames, two.frames) for one, two in zip(first, other)
    )


def test_toy_boxes_are_tight():
    for clip in make_toy_dataset(6, 5, 32, 32, 1, seed=2):
        for frame, layout in zip(clip.frames, clip.layouts):
            assert len(layout) == 1
            instance = layout.instances[0]
            assert 0 <= instance.category_id < TOY_NUM_CATEGORIES
            rows, cols = np.nonzero((frame > -1.0).any(dim=0).numpy())
            expected = BoundingBox.from_pixels(
                int(cols.min()),
                int(rows.min()),
                int(cols.max()) + 1,
                int(rows.max()) + 1,
                width=32,
                height=32,
            )
            assert instance.box == expected


def test_toy_shapes_move():
    clip = make_toy_dataset(1, 8, 32, 32, 1, seed=0, max_speed=2.0)[0]
    boxes = {layout.instances[0].box for layout in clip.layouts}
    assert len(boxes) > 1


@pytest.mark.parametrize(
    "args, kwargs",
    [
        ((0, 4, 32, 32, 1), {}),
        ((1, 4, 4, 32, 1), {}),
        ((1, 4, 32, 32, 0), {}),
        ((1, 4, 32, 32, 1), {"max_speed": -1.0}),
    ],
)
def test_toy_dataset_errors(args, kwargs):
    with pytest.raises(InputError):
        make_toy_dataset(*args, seed=0, **kwargs)


def test_write_frames(tmp_path, toy_clips):
    frames = toy_clips[0].frames
    paths = write_frames(tmp_path / "frames", frames)
    assert [fpath.name for fpath in paths] == [f"{i:04d}.png" for i in range(4)]
    for fpath, frame in zip(paths, to_uint8(frames)):
        image = cv2.cvtColor(cv2.imread(str(fpath)), cv2.COLOR_BGR2RGB)
        assert np.array_equal(image, frame.permute(1, 2, 0).numpy())


def test_layout_rows(toy_clips):
    layout = toy_clips[0].layouts[0]
    rows = layout_rows(layout)
    assert len(rows) == len(layout)
    assert rows[0][:2] == [layout.instances[0].category_id, 0]
