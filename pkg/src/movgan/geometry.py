"""Layout geometry: label rasterization and spatial-transformer placement

Grid convention, shared by placement and cropping: sampling grids use [-1, 1]
normalized coordinates with align_corners=False, so a box (x0, y0, x1, y1)
spans [2·x0 − 1, 2·x1 − 1] horizontally on any canvas."""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from movgan.errors import ConfigurationError, InputError
from movgan.layout import LayoutBatch

MIN_CANVAS_SIZE = 4


class LabelEmbeddingTable(nn.Module):
    """One learnable embedding vector per category"""

    def __init__(self, num_categories: int, embed_dim: int):
        super().__init__()
        self.num_categories = num_categories
        self.embed_dim = embed_dim
        self.embedding = nn.Embedding(num_categories, embed_dim)
        nn.init.normal_(self.embedding.weight, std=1.0)

    def forward(self, categories: torch.Tensor) -> torch.Tensor:
        return self.embedding(categories)


def box_coverage(boxes: torch.Tensor, height: int, width: int) -> torch.Tensor:
    """(..., H, W) 0/1 mask of pixels whose center lies inside boxes (..., 4)"""
    rows = (
        torch.arange(height, device=boxes.device, dtype=torch.float64) + 0.5
    ) / height
    cols = (torch.arange(width, device=boxes.device, dtype=torch.float64) + 0.5) / width
    coords = boxes.to(torch.float64)
    x0, y0, x1, y1 = (coords[..., index, None] for index in range(4))
    inside_cols = (cols >= x0) & (cols < x1)
    inside_rows = (rows >= y0) & (rows < y1)
    return (inside_rows[..., :, None] & inside_cols[..., None, :]).to(boxes.dtype)


def rasterize_embeddings(
    boxes: torch.Tensor,
    embeddings: torch.Tensor,
    mask: torch.Tensor,
    height: int,
    width: int,
) -> torch.Tensor:
    """(B, E, H, W) canvas summing embeddings (B, N, E) over covering boxes (B, N, 4)

    Instances are accumulated one at a time in slot order; pixels covered by no
    valid instance are exactly zero."""
    if height < MIN_CANVAS_SIZE or width < MIN_CANVAS_SIZE:
        raise InputError(
            f"Canvas {height}x{width} smaller than "
            f"{MIN_CANVAS_SIZE}x{MIN_CANVAS_SIZE}"
        )
    if embeddings.dim() != 3 or embeddings.shape[:2] != boxes.shape[:2]:
        raise ConfigurationError(
            f"Embeddings of shape {tuple(embeddings.shape)} do not match "
            f"boxes of shape {tuple(boxes.shape)}"
        )
    batch_size, capacity, embed_dim = embeddings.shape
    coverage = box_coverage(boxes, height, width).to(embeddings.dtype)
    coverage = coverage * mask.to(embeddings.dtype)[..., None, None]
    canvas = embeddings.new_zeros(batch_size, embed_dim, height, width)
    for slot in range(capacity):
        canvas = canvas + (
            coverage[:, slot, None] * embeddings[:, slot, :, None, None]
        )
    return canvas


def rasterize_layout(
    layouts: LayoutBatch, table: LabelEmbeddingTable, height: int, width: int
) -> torch.Tensor:
    """(B, E, H, W) label canvas: per-pixel sum of covering category embeddings"""
    embeddings = table(layouts.categories)
    if embeddings.shape[-1] != table.embed_dim:
        raise ConfigurationError(
            f"Embedding table yields {embeddings.shape[-1]}-d vectors, "
            f"declared {table.embed_dim}"
        )
    return rasterize_embeddings(
        layouts.boxes.to(embeddings.dtype), embeddings, layouts.mask, height, width
    )


def box_to_affine(boxes: torch.Tensor) -> torch.Tensor:
    """(..., 2, 3) affines mapping the unit grid onto the box region

    scale is the box extent, translation the box center, both in [-1, 1] grid
    units: sampling a canvas through it reads the box region (crop direction)."""
    x0, y0, x1, y1 = boxes.unbind(-1)
    zeros = torch.zeros_like(x0)
    row_x = torch.stack([x1 - x0, zeros, x0 + x1 - 1.0], dim=-1)
    row_y = torch.stack([zeros, y1 - y0, y0 + y1 - 1.0], dim=-1)
    return torch.stack([row_x, row_y], dim=-2)


def placement_affine(boxes: torch.Tensor) -> torch.Tensor:
    """(..., 2, 3) inverse of box_to_affine: canvas grid into the feature's grid"""
    affine = box_to_affine(boxes)
    scale = torch.diagonal(affine[..., :2], dim1=-2, dim2=-1)
    translation = affine[..., 2]
    inv_scale = 1.0 / scale
    zeros = torch.zeros_like(inv_scale[..., 0])
    row_x = torch.stack(
        [inv_scale[..., 0], zeros, -translation[..., 0] * inv_scale[..., 0]], dim=-1
    )
    row_y = torch.stack(
        [zeros, inv_scale[..., 1], -translation[..., 1] * inv_scale[..., 1]], dim=-1
    )
    return torch.stack([row_x, row_y], dim=-2)


def stn_place(
    feature: torch.Tensor, boxes: torch.Tensor, height: int, width: int
) -> torch.Tensor:
    """(B, F, H, W) canvas with feature (B, F, h, w) resampled into boxes (B, 4)

    Bilinear resampling clamps at the feature border; every pixel whose center
    falls outside the box is exactly zero."""
    batch_size, channels = feature.shape[:2]
    grid = F.affine_grid(
        placement_affine(boxes.to(feature.dtype)),
        [batch_size, channels, height, width],
        align_corners=False,
    )
    canvas = F.grid_sample(
        feature, grid, mode="bilinear", padding_mode="border", align_corners=False
    )
    return canvas * box_coverage(boxes.to(feature.dtype), height, width)[:, None]


def stn_crop(
    image: torch.Tensor, boxes: torch.Tensor, out_height: int, out_width: int
) -> torch.Tensor:
    """(B, F, out_h, out_w) bilinear crop-and-resize of boxes (B, 4) from image"""
    batch_size, channels = image.shape[:2]
    grid = F.affine_grid(
        box_to_affine(boxes.to(image.dtype)),
        [batch_size, channels, out_height, out_width],
        align_corners=False,
    )
    return F.grid_sample(
        image, grid, mode="bilinear", padding_mode="border", align_corners=False
    )


def place_instances(
    features: torch.Tensor, layouts: LayoutBatch, height: int, width: int
) -> torch.Tensor:
    """(B, F, H, W) sum of instance features (B, N, F, h, w) placed in their boxes"""
    batch_size, capacity = features.shape[:2]
    placed = stn_place(
        features.flatten(0, 1), layouts.boxes.flatten(0, 1), height, width
    ).unflatten(0, (batch_size, capacity))
    placed = placed * layouts.mask.to(placed.dtype)[..., None, None, None]
    canvas = placed.new_zeros(placed.shape[:1] + placed.shape[2:])
    for slot in range(capacity):
        canvas = canvas + placed[:, slot]
    return canvas


def crop_instances(
    image: torch.Tensor, layouts: LayoutBatch, out_height: int, out_width: int
) -> torch.Tensor:
    """(B, N, F, out_h, out_w) crops of every instance box of image (B, F, H, W)"""
    capacity = layouts.capacity
    repeated = image.repeat_interleave(capacity, dim=0)
    crops = stn_crop(repeated, layouts.boxes.flatten(0, 1), out_height, out_width)
    crops = crops.unflatten(0, (image.shape[0], capacity))
    return crops * layouts.mask.to(crops.dtype)[..., None, None, None]
