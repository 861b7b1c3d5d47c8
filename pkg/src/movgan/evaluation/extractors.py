"""Surrogate feature extractors for FID/FVD-style scores

These are fixed random convolution stacks, not the pretrained networks the
canonical metrics use: scores compare runs against each other, they are not
comparable to published values."""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from movgan.errors import InputError
from movgan.utils.misc import torch_generator

EXTRACTOR_MODES = ("image", "video")


class FeatureExtractor(nn.Module):
    """seeded random conv features; image mode scores frames, video mode clips"""

    canonical = False

    def __init__(self, mode: str, *, dim: int = 64, seed: int = 0, width: int = 32):
        super().__init__()
        if mode not in EXTRACTOR_MODES:
            raise InputError(
                f"Unknown extractor mode `{mode}`. "
                f"Supported: {', '.join(EXTRACTOR_MODES)}"
            )
        self.mode = mode
        self.dim = dim
        self.seed = seed
        conv = nn.Conv2d if mode == "image" else nn.Conv3d
        self.layers = nn.ModuleList(
            [
                conv(3, width, 3, stride=2, padding=1),
                conv(width, width, 3, stride=2, padding=1),
                conv(width, dim, 3, stride=2, padding=1),
            ]
        )
        generator = torch_generator(seed)
        with torch.no_grad():
            for layer in self.layers:
                fan_in = layer.weight[0].numel()
                layer.weight.copy_(
                    torch.randn(layer.weight.shape, generator=generator)
                    * (2.0 / fan_in) ** 0.5
                )
                layer.bias.zero_()
        self.requires_grad_(False)
        self.eval()

    @property
    def identity(self) -> str:
        kind = "conv2d" if self.mode == "image" else "conv3d"
        return f"surrogate-{kind}-d{self.dim}-seed{self.seed} (non-canonical)"

    def embed(self, inputs: torch.Tensor) -> torch.Tensor:
        hidden = inputs
        for layer in self.layers[:-1]:
            hidden = F.relu(layer(hidden))
        hidden = self.layers[-1](hidden)
        return hidden.flatten(2).mean(dim=-1)

    @torch.no_grad()
    def forward(self, clips: torch.Tensor) -> torch.Tensor:
        """(N, D) features of clips (B, T, 3, H, W): one row per frame in image
        mode (N = B·T), one per clip in video mode (N = B)"""
        if clips.dim() != 5:
            raise InputError(
                f"Expecting clips (B, T, 3, H, W), got {tuple(clips.shape)}"
            )
        clips = clips.float()
        if self.mode == "image":
            return self.embed(clips.flatten(0, 1))
        return self.embed(clips.transpose(1, 2))
