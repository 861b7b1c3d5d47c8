import pytest  # pyright: ignore [reportMissingImports]
import torch

from movgan.data.toy import make_toy_dataset
from movgan.errors import InputError
from movgan.evaluation.extractors import FeatureExtractor
from movgan.evaluation.metrics import (
    chance_adherence,
    clip_distance,
    evaluate,
    first_frame_layouts,
    generate_clips,
    layout_adherence,
)
from movgan.generator import Generator
from movgan.layout import BoundingBox, FrameLayout, LayoutInstance


@pytest.fixture(scope="module")
def generator(mini_model_config) -> Generator:
    torch.manual_seed(0)
    return Generator(mini_model_config).eval()


def test_ground_truth_adherence():
    clips = make_toy_dataset(16, 2, 32, 32, 3, seed=0)
    score = layout_adherence(
        [clip.frames for clip in clips], [clip.layouts[0] for clip in clips]
    )
    assert score == pytest.approx(1.0)


def test_noise_adherence_is_chance():
    clips = make_toy_dataset(32, 1, 64, 64, 3, seed=1)
    layouts = [clip.layouts[0] for clip in clips]
    noise = torch.rand(32, 1, 3, 64, 64, generator=torch.Generator().manual_seed(0))
    score = layout_adherence(noise * 2 - 1, layouts)
    assert score == pytest.approx(chance_adherence(layouts, 64, 64), abs=0.05)


def test_adherence_ignores_missing_colors():
    layout = FrameLayout(
        instances=[
            LayoutInstance(
                category_id=0, instance_id=0, box=BoundingBox(0, 0, 0.5, 0.5)
            )
        ]
    )
    black = -torch.ones(1, 1, 3, 8, 8)
    assert layout_adherence(black, [layout]) == 0.0
    assert chance_adherence([layout], 8, 8) == 0.25
    assert chance_adherence([FrameLayout()], 8, 8) == 0.0


def test_adherence_errors(toy_clips):
    frames = [clip.frames for clip in toy_clips]
    with pytest.raises(InputError):
        layout_adherence(frames, [clip.layouts[0] for clip in toy_clips[:2]])
    unknown = FrameLayout(
        instances=[
            LayoutInstance(category_id=6, instance_id=0, box=BoundingBox(0, 0, 1, 1))
        ]
    )
    with pytest.raises(InputError):
        layout_adherence(frames[:1], [unknown])


@pytest.mark.parametrize("mode, rows_per_clip", [("image", 4), ("video", 1)])
def test_extractor(toy_clips, mode: str, rows_per_clip: int):
    extractor = FeatureExtractor(mode, dim=16, seed=3)
    clips = torch.stack([clip.frames for clip in toy_clips[:2]])
    features = extractor(clips)
    assert features.shape == (2 * rows_per_clip, 16)
    assert torch.equal(features, FeatureExtractor(mode, dim=16, seed=3)(clips))
    assert "seed3" in extractor.identity
    assert "non-canonical" in extractor.identity
    assert not any(param.requires_grad for param in extractor.parameters())


def test_extractor_errors(toy_clips):
    with pytest.raises(InputError):
        FeatureExtractor("audio")
    with pytest.raises(InputError):
        FeatureExtractor("image")(toy_clips[0].frames)


def test_identical_distributions_score_low():
    extractor = FeatureExtractor("image", dim=8, seed=0)
    first = torch.stack([clip.frames for clip in make_toy_dataset(64, 4, 32, 32, 3, 1)])
    second = torch.stack(
        [clip.frames for clip in make_toy_dataset(64, 4, 32, 32, 3, 2)]
    )
    noise = torch.rand(first.shape, generator=torch.Generator().manual_seed(0))
    same = clip_distance(first, second, extractor)
    different = clip_distance(first, noise * 2 - 1, extractor)
    assert same < 0.1 * different


def test_first_frame_layouts_cycle(toy_clips):
    layouts = first_frame_layouts(toy_clips, 10)
    assert len(layouts) == 10
    assert layouts[8] == toy_clips[0].layouts[0]


def test_generate_clips_batches(generator, toy_clips):
    layouts = first_frame_layouts(toy_clips, 5)
    batches = list(
        generate_clips(generator, layouts, seed=0, conditioning="multi_object_layout")
    )
    assert [batch.shape for batch in batches] == [(5, 4, 3, 16, 16)]
    again = list(
        generate_clips(generator, layouts, seed=0, conditioning="multi_object_layout")
    )
    assert torch.equal(batches[0], again[0])


@pytest.mark.parametrize("mode, expected", [("image", "fid"), ("video", "fvd")])
def test_evaluate(generator, toy_clips, mode: str, expected: str):
    extractor = FeatureExtractor(mode, dim=8)
    result = evaluate(generator, toy_clips, extractor, 4, seed=1, batch_size=3)
    assert result.mode == expected
    assert result.score >= 0
    assert result.real_samples == len(toy_clips)
    assert result.generated_samples == 4
    assert result.extractor == extractor.identity
    assert set(result.to_dict()) == {
        "score",
        "mode",
        "real_samples",
        "generated_samples",
        "extractor",
    }
    again = evaluate(generator, toy_clips, extractor, 4, seed=1, batch_size=3)
    assert again.score == result.score


def test_evaluate_errors(generator, toy_clips):
    extractor = FeatureExtractor("image", dim=8)
    with pytest.raises(InputError):
        evaluate(generator, toy_clips, extractor, 1)
    with pytest.raises(InputError):
        evaluate(generator, [], extractor, 4)
