import json
import pathlib

import cv2
import numpy as np
import pytest  # pyright: ignore [reportMissingImports]

from movgan.data.toy import make_toy_dataset
from movgan.inputs.mainconfig import RunConfig
from movgan.inputs.model import ModelConfig

MINI_MODEL = {
    "num_categories": 6,
    "max_instances": 3,
    "embed_dim": 8,
    "content_dim": 8,
    "motion_dim": 8,
    "layout_resolution": 16,
    "global_channels": 8,
    "local_channels": 8,
    "local_size": 4,
    "style_layers": 2,
    "motion_code_dim": 8,
    "decoder_channels": 8,
    "hidden_dim": 16,
    "synthesis_layers": 2,
    "discriminator_channels": 8,
    "discriminator_crop_size": 4,
}

MINI_TRAIN = {
    "resolution": 16,
    "clip_length": 4,
    "batch_size": 2,
    "max_steps": 3,
    "telemetry_interval": 1,
    "checkpoint_interval": 2,
    "r1_interval": 2,
    "seed": 0,
}


def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False, help="run slow tests"
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: mark test as slow to run")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="need --runslow option to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def mini_model_config() -> ModelConfig:
    return ModelConfig(resolution=16, clip_length=4, **MINI_MODEL)


@pytest.fixture
def mini_run_config() -> RunConfig:
    return RunConfig(model=dict(MINI_MODEL), train=dict(MINI_TRAIN))


@pytest.fixture(scope="session")
def mini_config_yaml():
    yield """
---
model:
  num_categories: 6
  max_instances: 3
  embed_dim: 8
  content_dim: 8
  motion_dim: 8
  layout_resolution: 16
  global_channels: 8
  local_channels: 8
  local_size: 4
  style_layers: 2
  motion_code_dim: 8
  decoder_channels: 8
  hidden_dim: 16
  synthesis_layers: 2
  discriminator_channels: 8
  discriminator_crop_size: 4
train:
  resolution: 16
  clip_length: 4
  batch_size: 2
  learning_rate: 0.005
  frames_per_epoch: 1k
  max_steps: 3
  telemetry_interval: 1
  checkpoint_interval: 2
  r1_interval: 2
  conditioning_mode: multi_object_layout+identification
  seed: 0
"""


@pytest.fixture(scope="session")
def toy_clips():
    return make_toy_dataset(8, 4, 16, 16, 3, seed=0)


@pytest.fixture(scope="session")
def annotations_dir(tmp_path_factory) -> pathlib.Path:
    """two annotated videos (3 objects total) with their frame images"""
    root = tmp_path_factory.mktemp("annotations")
    videos = {
        "video-a": {
            "frame_count": 5,
            "objects": [
                {"tid": 0, "category": "dog"},
                {"tid": 1, "category": "ball"},
            ],
            "trajectories": [
                [
                    {"tid": 0, "bbox": {"xmin": 0, "ymin": 0, "xmax": 32, "ymax": 32}},
                    {
                        "tid": 1,
                        "bbox": {"xmin": 40, "ymin": 40, "xmax": 60, "ymax": 60},
                    },
                ],
                [{"tid": 0, "bbox": {"xmin": 2, "ymin": 0, "xmax": 34, "ymax": 32}}],
                [],
                [{"tid": 0, "bbox": {"xmin": 4, "ymin": 0, "xmax": 36, "ymax": 32}}],
                [{"tid": 0, "bbox": {"xmin": 6, "ymin": 0, "xmax": 38, "ymax": 32}}],
            ],
        },
        "video-b": {
            "frame_count": 3,
            "objects": [{"tid": 3, "category": "cat"}],
            "trajectories": [
                [{"tid": 3, "bbox": {"xmin": -5, "ymin": 8, "xmax": 20, "ymax": 24}}],
                [{"tid": 3, "bbox": {"xmin": 0, "ymin": 8, "xmax": 22, "ymax": 24}}],
                [{"tid": 3, "bbox": {"xmin": 2, "ymin": 8, "xmax": 24, "ymax": 80}}],
            ],
        },
    }
    for video_id, payload in videos.items():
        frames_dir = root / "frames" / video_id
        frames_dir.mkdir(parents=True)
        for index in range(payload["frame_count"]):
            image = np.full((64, 64, 3), 40 * index, dtype=np.uint8)
            cv2.imwrite(str(frames_dir / f"{index:06d}.png"), image)
        document = {
            "video_id": video_id,
            "width": 64,
            "height": 64,
            "frames_dir": f"frames/{video_id}",
            **payload,
        }
        (root / f"{video_id}.json").write_text(json.dumps(document))
    return root
