"""Two-head discriminator: per-frame image head and frame-pair motion head,
both reading layout features fused from the frame and its layout"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from typing import NamedTuple

import torch
import torch.nn.functional as F
from attrs import define, field
from torch import nn

from movgan.checks import is_valid_frame_pair
from movgan.constants import MOTION_BASE_CHANNELS
from movgan.errors import ConfigurationError, InputError
from movgan.geometry import (
    LabelEmbeddingTable,
    crop_instances,
    place_instances,
    rasterize_layout,
)
from movgan.inputs.model import ModelConfig
from movgan.layout import LayoutBatch, gather_layouts

logger = logging.getLogger(__name__)


def as_index_tensor(value: int | torch.Tensor, batch_size: int) -> torch.Tensor:
    if isinstance(value, torch.Tensor):
        return value.to(torch.long).reshape(-1).expand(batch_size).clone()
    return torch.full((batch_size,), int(value), dtype=torch.long)


def check_frame_indices(t1: torch.Tensor, t2: torch.Tensor, clip_length: int):
    for first, second in zip(t1.tolist(), t2.tolist()):
        is_valid_frame_pair(first, second, clip_length).raise_for_status()


@define(frozen=True, eq=False)
class FramePairSample:
    """Two frames of the same clips, (B, 3, H, W) each, at indices t1 and t2"""

    frame1: torch.Tensor
    frame2: torch.Tensor
    t1: torch.Tensor = field()
    t2: torch.Tensor = field()
    clip_length: int = field()

    def __attrs_post_init__(self):
        if self.frame1.shape != self.frame2.shape:
            raise InputError("Frames of a pair must share their shape")
        batch_size = self.frame1.shape[0]
        object.__setattr__(self, "t1", as_index_tensor(self.t1, batch_size))
        object.__setattr__(self, "t2", as_index_tensor(self.t2, batch_size))
        check_frame_indices(self.t1, self.t2, self.clip_length)

    @property
    def delta_t(self) -> torch.Tensor:
        return (self.t1 - self.t2).abs()

    def delta_plane(self) -> torch.Tensor:
        """(B, 1, H, W) constant plane of Δt / (T − 1)"""
        scale = max(self.clip_length - 1, 1)
        normalized = self.delta_t.to(self.frame1.dtype) / scale
        return normalized[:, None, None, None].expand(
            -1, 1, *self.frame1.shape[-2:]
        )

    def motion_stack(self) -> torch.Tensor:
        """(B, 7, H, W): [Δt plane, frame1 RGB, frame2 RGB] in that order"""
        return torch.cat([self.delta_plane(), self.frame1, self.frame2], dim=1)

    @classmethod
    def from_clip(
        cls, clip: torch.Tensor, t1: int | torch.Tensor, t2: int | torch.Tensor
    ) -> FramePairSample:
        """pair out of a (B, T, 3, H, W) clip batch"""
        batch_size, clip_length = clip.shape[:2]
        t1 = as_index_tensor(t1, batch_size)
        t2 = as_index_tensor(t2, batch_size)
        check_frame_indices(t1, t2, clip_length)
        rows = torch.arange(batch_size)
        return cls(
            frame1=clip[rows, t1],
            frame2=clip[rows, t2],
            t1=t1,
            t2=t2,
            clip_length=clip_length,
        )


class DiscriminatorScores(NamedTuple):
    """raw logits (B,) of each head and their weighted total"""

    image1: torch.Tensor
    image2: torch.Tensor
    motion: torch.Tensor
    total: torch.Tensor


def aggregate(d_i1, d_i2, d_m):
    """D(v, L) = ¼·(D_I(i_t1) + D_I(i_t2)) + ½·D_M(i_t1, i_t2, Δt)"""
    return (d_i1 + d_i2) / 4 + d_m / 2


class LayoutFusion(nn.Module):
    """D_layout: f_t from a frame and its layout at a quarter of the resolution

    The global branch encodes the label raster; the local branch encodes every
    instance crop and scatters it back into its box. f_t stacks both."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        channels = config.discriminator_channels
        self.label_table = LabelEmbeddingTable(config.num_categories, config.embed_dim)
        self.global_encoder = nn.Conv2d(config.embed_dim, channels, 3, padding=1)
        self.local_encoder = nn.Sequential(
            nn.Conv2d(3, channels, 3, padding=1),
            nn.LeakyReLU(0.2),
            nn.Conv2d(channels, channels, 3, padding=1),
        )
        self.local_label = nn.Linear(config.embed_dim, channels)

    @property
    def out_channels(self) -> int:
        return 2 * self.config.discriminator_channels

    def forward(
        self, frame: torch.Tensor, layouts: LayoutBatch, *, crop_gradients: bool = True
    ) -> torch.Tensor:
        size = self.config.feature_resolution
        raster = rasterize_layout(layouts, self.label_table, size, size)
        global_features = F.leaky_relu(self.global_encoder(raster), 0.2)

        crop = self.config.discriminator_crop_size
        source = frame if crop_gradients else frame.detach()
        crops = crop_instances(source, layouts, crop, crop)
        batch_size, capacity = crops.shape[:2]
        encoded = self.local_encoder(crops.flatten(0, 1)).unflatten(
            0, (batch_size, capacity)
        )
        labels = self.local_label(self.label_table(layouts.categories))
        encoded = F.leaky_relu(encoded + labels[..., None, None], 0.2)
        local_features = place_instances(encoded, layouts, size, size)
        return torch.cat([global_features, local_features], dim=1)


class ConvClassifier(nn.Module):
    """strided conv stack down to 4×4 followed by a linear logit"""

    def __init__(self, in_channels: int, channels: int, resolution: int):
        super().__init__()
        layers: list[nn.Module] = [
            nn.Conv2d(in_channels, channels, 3, padding=1),
            nn.LeakyReLU(0.2),
        ]
        for _ in range(int(round(math.log2(resolution // 4)))):
            layers += [nn.Conv2d(channels, channels, 4, stride=2, padding=1)]
            layers += [nn.LeakyReLU(0.2)]
        self.features = nn.Sequential(*layers)
        self.logit = nn.Linear(channels * 16, 1)

    def forward(self, inputs: torch.Tensor) -> torch.Tensor:
        return self.logit(self.features(inputs).flatten(1))[:, 0]


class Discriminator(nn.Module):
    """D_layout shared by the image head D_I and the motion head D_M

    With half_precision on, parameters are kept at float16-representable values
    (see `quantize_`) and inputs are rounded to float16 before scoring."""

    def __init__(self, config: ModelConfig, *, half_precision: bool = False):
        super().__init__()
        self.config = config
        self.half_precision = half_precision
        channels = config.discriminator_channels
        self.layout = LayoutFusion(config)
        fused = self.layout.out_channels
        self.image_head = ConvClassifier(3 + fused, channels, config.resolution)
        self.motion_head = ConvClassifier(
            MOTION_BASE_CHANNELS + 2 * fused, channels, config.resolution
        )
        if half_precision:
            logger.debug("discriminator kept at float16 precision")
            self.quantize_()

    @torch.no_grad()
    def quantize_(self):
        """round every parameter to the nearest float16 value, in place"""
        if not self.half_precision:
            return
        for parameter in self.parameters():
            parameter.copy_(parameter.half().to(parameter.dtype))

    def prepare(self, inputs: torch.Tensor) -> torch.Tensor:
        if self.half_precision:
            return inputs.half().to(inputs.dtype)
        return inputs

    def check_frame(self, frame: torch.Tensor):
        resolution = self.config.resolution
        if tuple(frame.shape[-2:]) != (resolution, resolution):
            raise ConfigurationError(
                f"Frame of {tuple(frame.shape[-2:])} does not match discriminator "
                f"resolution {resolution}x{resolution}"
            )

    def fuse_layout(
        self, frame: torch.Tensor, layouts: LayoutBatch, *, crop_gradients: bool = True
    ) -> torch.Tensor:
        """(B, F_t, H/4, W/4) layout features f_t

        Without crop_gradients, no gradient flows back to frame through the
        instance crops (double backward of bilinear sampling is unsupported)."""
        self.check_frame(frame)
        return self.layout(
            self.prepare(frame), layouts, crop_gradients=crop_gradients
        )

    def upsample(self, features: torch.Tensor) -> torch.Tensor:
        size = (self.config.resolution, self.config.resolution)
        return F.interpolate(features, size=size, mode="bilinear", align_corners=False)

    def score_image(self, frame: torch.Tensor, features: torch.Tensor) -> torch.Tensor:
        """(B,) D_I logits of frames concatenated with their f_t"""
        self.check_frame(frame)
        inputs = torch.cat([self.prepare(frame), self.upsample(features)], dim=1)
        return self.image_head(inputs)

    def score_motion(
        self, pair: FramePairSample, features1: torch.Tensor, features2: torch.Tensor
    ) -> torch.Tensor:
        """(B,) D_M logits of the 7-channel pair stack with both f_t"""
        self.check_frame(pair.frame1)
        return self.score_motion_stack(pair.motion_stack(), features1, features2)

    def score_motion_stack(
        self, stack: torch.Tensor, features1: torch.Tensor, features2: torch.Tensor
    ) -> torch.Tensor:
        inputs = torch.cat(
            [
                self.prepare(stack),
                self.upsample(features1),
                self.upsample(features2),
            ],
            dim=1,
        )
        return self.motion_head(inputs)

    def score_parts(
        self,
        clip: torch.Tensor,
        layouts: Sequence[LayoutBatch],
        t1: int | torch.Tensor,
        t2: int | torch.Tensor,
        *,
        crop_gradients: bool = True,
    ) -> DiscriminatorScores:
        """every head on clips (B, T, 3, H, W) with per-frame layouts[t]"""
        if len(layouts) != clip.shape[1]:
            raise InputError(
                f"{len(layouts)} per-frame layouts for a {clip.shape[1]}-frame clip"
            )
        pair = FramePairSample.from_clip(clip, t1, t2)
        features1 = self.fuse_layout(
            pair.frame1,
            gather_layouts(layouts, pair.t1),
            crop_gradients=crop_gradients,
        )
        features2 = self.fuse_layout(
            pair.frame2,
            gather_layouts(layouts, pair.t2),
            crop_gradients=crop_gradients,
        )
        image1 = self.score_image(pair.frame1, features1)
        image2 = self.score_image(pair.frame2, features2)
        motion = self.score_motion(pair, features1, features2)
        return DiscriminatorScores(
            image1, image2, motion, aggregate(image1, image2, motion)
        )

    def discriminate(
        self,
        clip: torch.Tensor,
        layouts: Sequence[LayoutBatch],
        t1: int | torch.Tensor,
        t2: int | torch.Tensor,
        *,
        crop_gradients: bool = True,
    ) -> torch.Tensor:
        """(B,) D(v, L) logits"""
        return self.score_parts(
            clip, layouts, t1, t2, crop_gradients=crop_gradients
        ).total

    def forward(self, clip, layouts, t1, t2) -> torch.Tensor:
        return self.discriminate(clip, layouts, t1, t2)
