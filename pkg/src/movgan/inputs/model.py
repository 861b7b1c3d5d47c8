from __future__ import annotations

from attrs import asdict, define
from typeguard import typechecked

from movgan.checks import is_valid_resolution
from movgan.constants import (
    DEFAULT_CLIP_LENGTH,
    VIDVRD_MAX_INSTANCES,
    VIDVRD_NUM_CATEGORIES,
)
from movgan.errors import ConfigurationError
from movgan.utils.yaml import custom_yaml_repr


@custom_yaml_repr
@typechecked
@define(kw_only=True)
class ModelConfig:
    """Architecture of the generator and discriminator

    sigma_t defaults to a quarter of sigma_x (slow temporal frequency)."""

    resolution: int = 32
    clip_length: int = DEFAULT_CLIP_LENGTH
    num_categories: int = VIDVRD_NUM_CATEGORIES
    max_instances: int = VIDVRD_MAX_INSTANCES
    embed_dim: int = 32
    content_dim: int = 64
    motion_dim: int = 32
    base_resolution: int = 4
    layout_resolution: int = 16
    global_channels: int = 64
    local_channels: int = 32
    local_size: int = 4
    style_layers: int = 4
    motion_code_dim: int = 32
    decoder_channels: int = 64
    hidden_dim: int = 64
    synthesis_layers: int = 2
    sigma_x: float = 4.0
    sigma_y: float = 4.0
    sigma_t: float | None = None
    identity_embeddings: bool = True
    global_raster: bool = True
    discriminator_channels: int = 32
    discriminator_crop_size: int = 8

    def __attrs_post_init__(self):
        if self.sigma_t is None:
            self.sigma_t = self.sigma_x / 4
        for name in ("sigma_x", "sigma_y", "sigma_t"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(
                    f"{type(self).__name__}.{name} must be > 0, "
                    f"got {getattr(self, name)}"
                )
        for name in ("resolution", "layout_resolution"):
            is_valid_resolution(
                getattr(self, name), base=self.base_resolution
            ).raise_for_status(ConfigurationError)
        if self.resolution < 4 * self.base_resolution:
            raise ConfigurationError(
                f"{type(self).__name__}.resolution must be at least "
                f"{4 * self.base_resolution} (discriminator works at 1/4 scale)"
            )
        for name in (
            "clip_length",
            "num_categories",
            "max_instances",
            "embed_dim",
            "content_dim",
            "motion_dim",
            "global_channels",
            "local_channels",
            "local_size",
            "style_layers",
            "motion_code_dim",
            "decoder_channels",
            "hidden_dim",
            "discriminator_channels",
            "discriminator_crop_size",
        ):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{type(self).__name__}.{name} must be >= 1")
        if self.synthesis_layers < 0:
            raise ConfigurationError(
                f"{type(self).__name__}.synthesis_layers must be >= 0"
            )

    @property
    def feature_resolution(self) -> int:
        """resolution of the discriminator layout features f_t"""
        return self.resolution // 4

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def __yaml_repr__(dumper, data):
        return dumper.represent_dict(asdict(data))
