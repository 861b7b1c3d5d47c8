from __future__ import annotations

import enum

from attrs import asdict, define, field
from typeguard import typechecked

from movgan.constants import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_CLIP_LENGTH,
    DEFAULT_FRAMES_PER_EPOCH,
    DEFAULT_LEARNING_RATE,
    DEFAULT_TELEMETRY_INTERVAL,
)
from movgan.errors import ConfigurationError
from movgan.utils.misc import parse_count
from movgan.utils.yaml import custom_yaml_repr


class ConditioningMode(str, enum.Enum):
    """Ablation ladder, from clip-level labels up to the full layout model"""

    ACTION_LABEL = "action_label"
    MULTI_CLASS_OBJECT_LABEL = "multi_class_object_label"
    MULTI_CLASS_OBJECT_LABEL_CENTER_CROP = "multi_class_object_label+center_crop"
    MULTI_OBJECT_LAYOUT = "multi_object_layout"
    MULTI_OBJECT_LAYOUT_IDENTIFICATION = "multi_object_layout+identification"

    @property
    def uses_boxes(self) -> bool:
        return self in (
            ConditioningMode.MULTI_OBJECT_LAYOUT,
            ConditioningMode.MULTI_OBJECT_LAYOUT_IDENTIFICATION,
        )

    @property
    def uses_identity(self) -> bool:
        return self == ConditioningMode.MULTI_OBJECT_LAYOUT_IDENTIFICATION

    @property
    def uses_center_crop(self) -> bool:
        return self == ConditioningMode.MULTI_CLASS_OBJECT_LABEL_CENTER_CROP

    @property
    def uses_global_raster(self) -> bool:
        return self.uses_boxes

    @classmethod
    def parse(cls, value: str | ConditioningMode) -> ConditioningMode:
        try:
            return cls(value)
        except ValueError as exc:
            raise ConfigurationError(
                f"Unknown conditioning mode `{value}`. "
                f"Supported: {', '.join(mode.value for mode in cls)}"
            ) from exc


@custom_yaml_repr
@typechecked
@define(kw_only=True)
class TrainConfig:
    batch_size: int = DEFAULT_BATCH_SIZE
    learning_rate: float = DEFAULT_LEARNING_RATE
    frames_per_epoch: int | str = DEFAULT_FRAMES_PER_EPOCH
    clip_length: int = DEFAULT_CLIP_LENGTH
    resolution: int = 32
    conditioning_mode: str | ConditioningMode = (
        ConditioningMode.MULTI_OBJECT_LAYOUT_IDENTIFICATION
    )
    discriminator_half_precision: bool = False
    seed: int = 0
    betas: tuple[float, float] | list[float] = field(default=(0.5, 0.99))
    epochs: int = 1
    max_steps: int | None = None
    telemetry_interval: int = DEFAULT_TELEMETRY_INTERVAL
    checkpoint_interval: int = 1000
    r1_gamma: float = 1.0
    r1_interval: int = 16
    center_crop_fraction: float = 0.75

    def __attrs_post_init__(self):
        self.conditioning_mode = ConditioningMode.parse(self.conditioning_mode)
        try:
            self.frames_per_epoch = parse_count(self.frames_per_epoch)
        except Exception as exc:
            raise ConfigurationError(
                f"Unable to parse `{self.frames_per_epoch}` into a frame count "
                f"for {type(self).__name__}.frames_per_epoch ({exc})"
            ) from exc
        self.betas = tuple(float(beta) for beta in self.betas)

        if self.batch_size < 1:
            raise ConfigurationError(f"{type(self).__name__}.batch_size must be >= 1")
        if not self.learning_rate > 0:
            raise ConfigurationError(
                f"{type(self).__name__}.learning_rate must be > 0"
            )
        if len(self.betas) != 2 or not all(0 <= beta < 1 for beta in self.betas):
            raise ConfigurationError(
                f"{type(self).__name__}.betas must be two values in [0, 1)"
            )
        if self.clip_length < 2:
            raise ConfigurationError(
                f"{type(self).__name__}.clip_length must be >= 2 (frame pairs)"
            )
        for name in ("epochs", "telemetry_interval", "checkpoint_interval"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{type(self).__name__}.{name} must be >= 1")
        if self.max_steps is not None and self.max_steps < 0:
            raise ConfigurationError(f"{type(self).__name__}.max_steps must be >= 0")
        if self.frames_per_epoch < 1:
            raise ConfigurationError(
                f"{type(self).__name__}.frames_per_epoch must be >= 1"
            )
        if self.r1_gamma < 0 or self.r1_interval < 0:
            raise ConfigurationError(
                f"{type(self).__name__}.r1_gamma and r1_interval must be >= 0"
            )
        if not 0 < self.center_crop_fraction <= 1:
            raise ConfigurationError(
                f"{type(self).__name__}.center_crop_fraction must be in (0, 1]"
            )

    @property
    def mode(self) -> ConditioningMode:
        return ConditioningMode.parse(self.conditioning_mode)

    @property
    def steps_per_epoch(self) -> int:
        """optimization steps needed to show frames_per_epoch frames"""
        frames_per_step = self.batch_size * self.clip_length
        return max(1, -(-int(self.frames_per_epoch) // frames_per_step))

    @property
    def total_steps(self) -> int:
        if self.max_steps is not None:
            return self.max_steps
        return self.epochs * self.steps_per_epoch

    @property
    def r1_enabled(self) -> bool:
        return self.r1_gamma > 0 and self.r1_interval > 0

    def to_dict(self) -> dict:
        payload = asdict(self)
        payload["conditioning_mode"] = self.mode.value
        payload["betas"] = list(self.betas)
        return payload

    @staticmethod
    def __yaml_repr__(dumper, data):
        return dumper.represent_dict(data.to_dict())
