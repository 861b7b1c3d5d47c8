"""Fréchet scores of generated clips and the layout-adherence measure"""

from __future__ import annotations

import logging
from collections.abc import Iterator, Sequence

import torch
from attrs import define

from movgan.conditioning import condition_layout
from movgan.data.clips import ClipRecord
from movgan.data.toy import TOY_PALETTE, ToyCategory
from movgan.errors import InputError
from movgan.evaluation.extractors import FeatureExtractor
from movgan.evaluation.frechet import FeatureStats, frechet_distance
from movgan.generator import Generator, LatentPair, render_layouts
from movgan.geometry import box_coverage
from movgan.inputs.train import ConditioningMode
from movgan.layout import FrameLayout
from movgan.utils.misc import derive_seed, torch_generator

logger = logging.getLogger(__name__)

# palette colors farther than this (RGB in [0, 1]) carry no mass
COLOR_TOLERANCE = 0.5


@define(frozen=True, kw_only=True)
class EvaluationResult:
    score: float
    mode: str
    real_samples: int
    generated_samples: int
    extractor: str

    def to_dict(self) -> dict:
        return {
            "score": self.score,
            "mode": self.mode,
            "real_samples": self.real_samples,
            "generated_samples": self.generated_samples,
            "extractor": self.extractor,
        }


def clip_stats(
    clips: torch.Tensor | Sequence[torch.Tensor],
    extractor: FeatureExtractor,
    batch_size: int = 16,
) -> FeatureStats:
    """feature stats of clips (B, T, 3, H, W), batch by batch"""
    stats = FeatureStats.empty(extractor.dim)
    for start in range(0, len(clips), batch_size):
        chunk = clips[start : start + batch_size]
        if not isinstance(chunk, torch.Tensor):
            chunk = torch.stack(list(chunk))
        stats = stats.update(extractor(chunk).double().numpy())
    return stats


def clip_distance(
    clips_a: torch.Tensor | Sequence[torch.Tensor],
    clips_b: torch.Tensor | Sequence[torch.Tensor],
    extractor: FeatureExtractor,
) -> float:
    stats_a = clip_stats(clips_a, extractor)
    stats_b = clip_stats(clips_b, extractor)
    for stats in (stats_a, stats_b):
        if not stats.valid:
            raise InputError("Fréchet scores need at least 2 feature samples per side")
    return frechet_distance(stats_a, stats_b)


def first_frame_layouts(
    clips: Sequence[ClipRecord], count: int
) -> list[FrameLayout]:
    """first-frame layouts of clips, cycled in order up to count"""
    return [clips[index % len(clips)].layouts[0] for index in range(count)]


def generate_clips(
    generator: Generator,
    layouts: Sequence[FrameLayout],
    *,
    seed: int,
    conditioning: ConditioningMode | str,
    batch_size: int = 16,
) -> Iterator[torch.Tensor]:
    """(b, T, 3, H, W) CPU batches of clips generated for layouts

    Latents of the k-th batch come from (seed, k) so results only depend on
    seed and batch_size."""
    generator.eval()
    for chunk, start in enumerate(range(0, len(layouts), batch_size)):
        conditions = [
            condition_layout(layout, conditioning)
            for layout in layouts[start : start + batch_size]
        ]
        latents = LatentPair.sample(
            len(conditions),
            generator.config,
            torch_generator(derive_seed(seed, chunk)),
        )
        yield render_layouts(generator, conditions, latents).cpu()


def evaluate(
    generator: Generator,
    clips: Sequence[ClipRecord],
    extractor: FeatureExtractor,
    n_samples: int,
    *,
    seed: int = 0,
    conditioning: ConditioningMode | str = (
        ConditioningMode.MULTI_OBJECT_LAYOUT_IDENTIFICATION
    ),
    batch_size: int = 16,
) -> EvaluationResult:
    """Fréchet score of n_samples generated clips against the real clips

    Generated clips are conditioned on the real first-frame layouts, cycled
    in dataset order. The extractor mode decides between per-frame (FID-style)
    and per-clip (FVD-style) features."""
    if n_samples < 2:
        raise InputError(f"n_samples must be >= 2, got {n_samples}")
    if not clips:
        raise InputError("No real clip to evaluate against")
    real = [clip.frames for clip in clips]
    real_stats = clip_stats(real, extractor, batch_size)

    fake_stats = FeatureStats.empty(extractor.dim)
    for videos in generate_clips(
        generator,
        first_frame_layouts(clips, n_samples),
        seed=seed,
        conditioning=conditioning,
        batch_size=batch_size,
    ):
        fake_stats = fake_stats.update(extractor(videos).double().numpy())

    if not real_stats.valid or not fake_stats.valid:
        raise InputError("Fréchet scores need at least 2 feature samples per side")
    score = frechet_distance(real_stats, fake_stats)
    mode = "fid" if extractor.mode == "image" else "fvd"
    logger.debug(f"{mode}={score:.4f} ({fake_stats.n} vs {real_stats.n} samples)")
    return EvaluationResult(
        score=score,
        mode=mode,
        real_samples=len(clips),
        generated_samples=n_samples,
        extractor=extractor.identity,
    )


def category_mass(
    frame: torch.Tensor, category: ToyCategory, tolerance: float = COLOR_TOLERANCE
) -> torch.Tensor:
    """(H, W) soft color-match weight of a (3, H, W) frame in [-1, 1]"""
    pixels = (frame.double().clamp(-1, 1) + 1.0) / 2
    color = torch.tensor(category.unit_color, dtype=torch.float64)[:, None, None]
    distance = (pixels - color).norm(dim=0)
    return (1.0 - distance / tolerance).clamp(min=0.0)


def category_region(layout: FrameLayout, category: int, height: int, width: int):
    """(H, W) bool union of the boxes of category in layout"""
    boxes = torch.tensor(
        [
            instance.box.as_tuple()
            for instance in layout.instances
            if instance.category_id == category
        ],
        dtype=torch.float64,
    )
    return box_coverage(boxes, height, width).bool().any(dim=0)


def check_palette(layouts: Sequence[FrameLayout], palette: Sequence[ToyCategory]):
    for layout in layouts:
        for category in layout.category_ids:
            if category >= len(palette):
                raise InputError(f"No color known for category {category}")


def layout_adherence(
    clips: torch.Tensor | Sequence[torch.Tensor],
    layouts: Sequence[FrameLayout],
    palette: Sequence[ToyCategory] = TOY_PALETTE,
) -> float:
    """share of category-colored mass of frame 1 inside the requested boxes

    For each instance, the soft color-match mass of its category is measured
    over the whole first frame and the part inside the union of that
    category's boxes is kept. Instances whose color does not show at all are
    left out; the result averages the others over all clips."""
    if len(clips) != len(layouts):
        raise InputError(f"{len(clips)} clips for {len(layouts)} layouts")
    check_palette(layouts, palette)
    fractions: list[float] = []
    for clip, layout in zip(clips, layouts):
        frame = clip[0]
        height, width = frame.shape[-2:]
        for instance in layout.instances:
            mass = category_mass(frame, palette[instance.category_id])
            total = float(mass.sum())
            if total <= 0:
                continue
            region = category_region(layout, instance.category_id, height, width)
            fractions.append(min(float(mass[region].sum()) / total, 1.0))
    if not fractions:
        return 0.0
    return sum(fractions) / len(fractions)


def chance_adherence(layouts: Sequence[FrameLayout], height: int, width: int) -> float:
    """mean box-area fraction: the adherence of spatially uniform color mass"""
    fractions = [
        float(
            category_region(layout, instance.category_id, height, width)
            .double()
            .mean()
        )
        for layout in layouts
        for instance in layout.instances
    ]
    if not fractions:
        return 0.0
    return sum(fractions) / len(fractions)
