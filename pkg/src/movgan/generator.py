"""Layout-to-video generator: global and local layout pathways feeding an
implicit video representation evaluated on a (t, y, x) coordinate grid"""

from __future__ import annotations

import math
from collections.abc import Sequence

import torch
import torch.nn.functional as F
from attrs import define
from torch import nn
from typeguard import typechecked

from movgan.errors import ConfigurationError
from movgan.geometry import LabelEmbeddingTable, place_instances, rasterize_layout
from movgan.inputs.model import ModelConfig
from movgan.layout import FrameLayout, LayoutBatch, pack_layouts


@typechecked
@define(frozen=True)
class FrequencyConfig:
    sigma_x: float
    sigma_y: float
    sigma_t: float

    def __attrs_post_init__(self):
        for name in ("sigma_x", "sigma_y", "sigma_t"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{type(self).__name__}.{name} must be > 0")

    @classmethod
    def from_model_config(cls, config: ModelConfig) -> FrequencyConfig:
        return cls(
            sigma_x=config.sigma_x, sigma_y=config.sigma_y, sigma_t=config.sigma_t
        )


@define(frozen=True, eq=False)
class CoordinateGrid:
    """Coordinates at which the video representation is decoded

    x (W,) and y (H,) are equally spaced over [0, 1]; t (T,) holds frame indices
    k normalized as k / (clip_length − 1)."""

    x: torch.Tensor
    y: torch.Tensor
    t: torch.Tensor

    def __attrs_post_init__(self):
        for name in ("x", "y", "t"):
            values = getattr(self, name)
            if values.dim() != 1 or not values.numel():
                raise ConfigurationError(f"Grid axis `{name}` must be a non-empty 1-d")
            if values.numel() > 1 and not bool((values[1:] > values[:-1]).all()):
                raise ConfigurationError(f"Grid axis `{name}` not strictly increasing")

    @classmethod
    def regular(
        cls,
        clip_length: int,
        height: int,
        width: int,
        *,
        dtype: torch.dtype = torch.float32,
        device: torch.device | str = "cpu",
    ) -> CoordinateGrid:
        frames = torch.arange(clip_length, dtype=torch.float64)
        times = frames / max(clip_length - 1, 1)
        return cls(
            x=torch.linspace(0.0, 1.0, width, dtype=torch.float64).to(device, dtype),
            y=torch.linspace(0.0, 1.0, height, dtype=torch.float64).to(device, dtype),
            t=times.to(device, dtype),
        )

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.t.numel(), self.y.numel(), self.x.numel())

    def select_times(self, indices: Sequence[int]) -> CoordinateGrid:
        """same grid restricted to the frames at indices"""
        return CoordinateGrid(
            x=self.x, y=self.y, t=self.t[torch.as_tensor(list(indices))]
        )

    def to(self, dtype: torch.dtype) -> CoordinateGrid:
        return CoordinateGrid(
            x=self.x.to(dtype), y=self.y.to(dtype), t=self.t.to(dtype)
        )


@define(frozen=True, eq=False)
class LatentPair:
    """z = (z_I, z_M): per-clip content latent and motion latent, batched"""

    content: torch.Tensor
    motion: torch.Tensor

    def __attrs_post_init__(self):
        if self.content.shape[0] != self.motion.shape[0]:
            raise ConfigurationError("Content and motion latents batch sizes differ")
        finite = bool(torch.isfinite(self.content).all()) and bool(
            torch.isfinite(self.motion).all()
        )
        if not finite:
            raise ConfigurationError("Latents must be finite")

    @classmethod
    def sample(
        cls,
        batch_size: int,
        config: ModelConfig,
        generator: torch.Generator | None = None,
        *,
        dtype: torch.dtype = torch.float32,
    ) -> LatentPair:
        return cls(
            content=torch.randn(
                batch_size, config.content_dim, generator=generator, dtype=dtype
            ),
            motion=torch.randn(
                batch_size, config.motion_dim, generator=generator, dtype=dtype
            ),
        )

    @property
    def batch_size(self) -> int:
        return self.content.shape[0]


class ResidualConv(nn.Module):
    """3×3 conv block with identity skip, no normalization"""

    def __init__(self, channels: int):
        super().__init__()
        self.conv = nn.Conv2d(channels, channels, 3, padding=1)

    def forward(self, inputs: torch.Tensor) -> torch.Tensor:
        return inputs + F.leaky_relu(self.conv(inputs), 0.2)


class UpBlock(nn.Module):
    """nearest ×2 upsampling followed by a skip-connected conv"""

    def __init__(self, channels: int):
        super().__init__()
        self.conv = nn.Conv2d(channels, channels, 3, padding=1)

    def forward(self, inputs: torch.Tensor) -> torch.Tensor:
        upsampled = F.interpolate(inputs, scale_factor=2, mode="nearest")
        return upsampled + F.leaky_relu(self.conv(upsampled), 0.2)


class StyleMapping(nn.Module):
    """stack of linear style layers turning an embedding into a style vector"""

    def __init__(self, dim: int, num_layers: int):
        super().__init__()
        self.layers = nn.ModuleList(nn.Linear(dim, dim) for _ in range(num_layers))

    def forward(self, inputs: torch.Tensor) -> torch.Tensor:
        hidden = inputs
        for layer in self.layers:
            hidden = F.leaky_relu(layer(hidden), 0.2)
        return hidden


def log2_ratio(high: int, low: int) -> int:
    return int(round(math.log2(high // low)))


class GlobalPathway(nn.Module):
    """rasterized layout → strided conv encoder at base resolution"""

    def __init__(self, config: ModelConfig):
        super().__init__()
        channels = config.global_channels
        layers: list[nn.Module] = [
            nn.Conv2d(config.embed_dim, channels, 3, padding=1),
            nn.LeakyReLU(0.2),
        ]
        for _ in range(log2_ratio(config.layout_resolution, config.base_resolution)):
            layers += [nn.Conv2d(channels, channels, 4, stride=2, padding=1)]
            layers += [nn.LeakyReLU(0.2)]
        self.encoder = nn.Sequential(*layers)

    def forward(self, raster: torch.Tensor) -> torch.Tensor:
        return self.encoder(raster)


class LocalPathway(nn.Module):
    """per-instance feature maps from object identities alone"""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.identity_table = (
            nn.Embedding(config.max_instances, config.embed_dim)
            if config.identity_embeddings
            else None
        )
        self.style = StyleMapping(config.embed_dim, config.style_layers)
        size = config.local_size
        self.constant = nn.Parameter(torch.randn(config.local_channels, size, size))
        self.to_scale = nn.Linear(config.embed_dim, config.local_channels)
        self.to_shift = nn.Linear(config.embed_dim, config.local_channels)
        self.block = ResidualConv(config.local_channels)

    def forward(
        self, embeddings: torch.Tensor, identities: torch.Tensor
    ) -> torch.Tensor:
        """(B, N, F_l, s, s) instance features from (B, N, E) label embeddings"""
        if self.identity_table is not None:
            embeddings = embeddings + self.identity_table(identities)
        styles = self.style(embeddings)
        scale = 1.0 + self.to_scale(styles)
        shift = self.to_shift(styles)
        features = self.constant * scale[..., None, None] + shift[..., None, None]
        batch_size, capacity = features.shape[:2]
        return self.block(features.flatten(0, 1)).unflatten(
            0, (batch_size, capacity)
        )


class MotionNetwork(nn.Module):
    """G_M: motion latent → motion code f_m (ignores the layout)"""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.layers = nn.Sequential(
            nn.Linear(config.motion_dim, config.motion_code_dim),
            nn.LeakyReLU(0.2),
            nn.Linear(config.motion_code_dim, config.motion_code_dim),
            nn.LeakyReLU(0.2),
            nn.Linear(config.motion_code_dim, config.motion_code_dim),
        )

    def forward(self, motion: torch.Tensor) -> torch.Tensor:
        return self.layers(motion)


class Synthesis(nn.Module):
    """Coordinate network: first layer f = σx·wx·x + σy·wy·y + σt·wt·t + b,
    then sine layers over [coordinate features, content features]

    The motion code only enters through terms proportional to t: a trajectory
    velocity added to the time term and per-layer modulations (1 + t·γ, t·β).
    Frame t = 0 is therefore independent of the motion latent."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        hidden = config.hidden_dim
        self.frequencies = FrequencyConfig.from_model_config(config)
        self.w_x = nn.Parameter(torch.randn(hidden))
        self.w_y = nn.Parameter(torch.randn(hidden))
        self.w_t = nn.Parameter(torch.randn(hidden))
        self.bias = nn.Parameter(torch.empty(hidden).uniform_(-math.pi, math.pi))
        self.velocity = nn.Linear(config.motion_code_dim, hidden)
        in_dim = hidden + config.decoder_channels
        self.layers = nn.ModuleList()
        self.modulations = nn.ModuleList()
        for _ in range(config.synthesis_layers):
            self.layers.append(nn.Linear(in_dim, hidden))
            self.modulations.append(nn.Linear(config.motion_code_dim, 2 * hidden))
            in_dim = hidden
        self.to_rgb = nn.Linear(in_dim, 3)

    def first_layer(self, grid: CoordinateGrid) -> torch.Tensor:
        """(T, H, W, hidden) affine coordinate features"""
        freq = self.frequencies
        x_term = freq.sigma_x * self.w_x * grid.x[None, None, :, None]
        y_term = freq.sigma_y * self.w_y * grid.y[None, :, None, None]
        t_term = freq.sigma_t * self.w_t * grid.t[:, None, None, None]
        return x_term + y_term + t_term + self.bias

    def forward(
        self, content: torch.Tensor, motion_code: torch.Tensor, grid: CoordinateGrid
    ) -> torch.Tensor:
        """(B, T, 3, H, W) video from content (B, C, H, W) and f_m (B, D)"""
        times = grid.t[None, :, None, None, None]
        trajectory = (
            self.frequencies.sigma_t
            * times
            * self.velocity(motion_code)[:, None, None, None, :]
        )
        coords = torch.sin(self.first_layer(grid)[None] + trajectory)
        num_frames = coords.shape[1]
        content = content.permute(0, 2, 3, 1)[:, None]
        content = content.expand(-1, num_frames, -1, -1, -1)
        hidden = torch.cat([coords, content], dim=-1)
        for layer, modulation in zip(self.layers, self.modulations):
            gamma, beta = modulation(motion_code)[:, None, None, None, :].chunk(2, -1)
            hidden = torch.sin((1.0 + times * gamma) * layer(hidden) + times * beta)
        rgb = torch.tanh(self.to_rgb(hidden))
        return rgb.permute(0, 1, 4, 2, 3)


class Generator(nn.Module):
    """G(z, L) = G_comb(G_I(z_I, L), G_M(z_M))"""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.label_table = LabelEmbeddingTable(config.num_categories, config.embed_dim)
        self.global_pathway = GlobalPathway(config)
        self.local_pathway = LocalPathway(config)
        in_channels = (
            config.global_channels + config.content_dim + config.local_channels
        )
        self.fuse = nn.Conv2d(in_channels, config.decoder_channels, 1)
        self.decoder = nn.Sequential(
            *(
                UpBlock(config.decoder_channels)
                for _ in range(log2_ratio(config.resolution, config.base_resolution))
            )
        )
        self.motion_network = MotionNetwork(config)
        self.synthesis = Synthesis(config)

    @property
    def frequencies(self) -> FrequencyConfig:
        return self.synthesis.frequencies

    def grid(self, clip_length: int | None = None) -> CoordinateGrid:
        """regular grid at the configured resolution"""
        parameter = next(self.parameters())
        return CoordinateGrid.regular(
            clip_length or self.config.clip_length,
            self.config.resolution,
            self.config.resolution,
            dtype=parameter.dtype,
            device=parameter.device,
        )

    def encode_global(
        self, content: torch.Tensor, layouts: LayoutBatch
    ) -> torch.Tensor:
        """(B, F_g, h0, w0) global feature f_g: layout encoding ⊕ broadcast z_I"""
        size = self.config.layout_resolution
        raster = rasterize_layout(layouts, self.label_table, size, size)
        if not self.config.global_raster:
            raster = torch.zeros_like(raster)
        encoded = self.global_pathway(raster)
        broadcast = content[:, :, None, None].expand(-1, -1, *encoded.shape[-2:])
        return torch.cat([encoded, broadcast.to(encoded.dtype)], dim=1)

    def encode_local(self, layouts: LayoutBatch) -> torch.Tensor:
        """(B, F_l, h0, w0) local feature f_l: instance features placed in boxes"""
        embeddings = self.label_table(layouts.categories)
        features = self.local_pathway(embeddings, layouts.identities)
        size = self.config.layout_resolution
        canvas = place_instances(features, layouts, size, size)
        return F.avg_pool2d(canvas, size // self.config.base_resolution)

    def motion_features(self, motion: torch.Tensor) -> torch.Tensor:
        """(B, motion_code_dim) motion code f_m = G_M(z_M)"""
        return self.motion_network(motion)

    def first_layer(self, grid: CoordinateGrid) -> torch.Tensor:
        return self.synthesis.first_layer(grid)

    def content_features(
        self, content: torch.Tensor, layouts: LayoutBatch
    ) -> torch.Tensor:
        """(B, C, H, W) upsampled f_g ⊕ f_l"""
        features = torch.cat(
            [self.encode_global(content, layouts), self.encode_local(layouts)], dim=1
        )
        return self.decoder(self.fuse(features))

    def forward(
        self, latents: LatentPair, layouts: LayoutBatch, grid: CoordinateGrid
    ) -> torch.Tensor:
        """(B, T, 3, H, W) clip in [-1, 1] conditioned on single-frame layouts"""
        self.check_grid(grid)
        if layouts.batch_size != latents.batch_size:
            raise ConfigurationError(
                f"{layouts.batch_size} layouts for {latents.batch_size} latents"
            )
        content = self.content_features(latents.content, layouts)
        return self.synthesis(content, self.motion_features(latents.motion), grid)

    def generate_video(
        self, latents: LatentPair, layouts: LayoutBatch, grid: CoordinateGrid
    ) -> torch.Tensor:
        return self(latents, layouts, grid)

    def check_grid(self, grid: CoordinateGrid):
        _, height, width = grid.shape
        resolution = self.config.resolution
        if (height, width) != (resolution, resolution):
            raise ConfigurationError(
                f"Grid of {height}x{width} does not match generator "
                f"resolution {resolution}x{resolution}"
            )


@torch.no_grad()
def render_layouts(
    generator: Generator,
    layouts: Sequence[FrameLayout],
    latents: LatentPair,
    clip_length: int | None = None,
) -> torch.Tensor:
    """(B, T, 3, H, W) clips for first-frame layouts on the regular grid"""
    parameter = next(generator.parameters())
    batch = pack_layouts(
        layouts,
        generator.config.max_instances,
        dtype=parameter.dtype,
        device=parameter.device,
    )
    latents = LatentPair(
        content=latents.content.to(parameter.device, parameter.dtype),
        motion=latents.motion.to(parameter.device, parameter.dtype),
    )
    return generator(latents, batch, generator.grid(clip_length))
