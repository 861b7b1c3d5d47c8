from __future__ import annotations

# checkpoints and clip caches refuse files with another major format
CHECKPOINT_FORMAT_VERSION: int = 1
CLIP_CACHE_FORMAT_VERSION: int = 1
CLIP_CACHE_FILENAME: str = "clips.pt"
MANIFEST_FILENAME: str = "manifest.yaml"
TELEMETRY_FILENAME: str = "telemetry.jsonl"
CHECKPOINT_FILENAME: str = "checkpoint.pt"

# dataset-scale presets (category count, max instances per frame)
VIDVRD_NUM_CATEGORIES: int = 36
VIDVRD_MAX_INSTANCES: int = 11
VIDVOR_NUM_CATEGORIES: int = 80
VIDVOR_MAX_INSTANCES: int = 20
DATASET_PRESETS: dict[str, tuple[int, int]] = {
    "vidvrd": (VIDVRD_NUM_CATEGORIES, VIDVRD_MAX_INSTANCES),
    "vidvor": (VIDVOR_NUM_CATEGORIES, VIDVOR_MAX_INSTANCES),
}

DEFAULT_CLIP_LENGTH: int = 16
DEFAULT_BATCH_SIZE: int = 8
DEFAULT_LEARNING_RATE: float = 5e-3
DEFAULT_FRAMES_PER_EPOCH: int = 25_000
DEFAULT_TELEMETRY_INTERVAL: int = 500

# Δt channel + two RGB frames
MOTION_BASE_CHANNELS: int = 7

FRAME_EXTENSIONS: tuple[str, ...] = (".png", ".jpg", ".jpeg", ".bmp")
