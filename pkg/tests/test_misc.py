import pytest  # pyright: ignore [reportMissingImports]
import torch

from movgan.utils.misc import (
    derive_seed,
    ensure_dir,
    parse_count,
    sha256_of,
    torch_generator,
)


@pytest.mark.parametrize(
    "count, expected",
    [(2000, 2000), ("2000", 2000), ("25k", 25_000), ("1.5M", 1_500_000)],
)
def test_parse_count(count, expected: int):
    assert parse_count(count) == expected


def test_ensure_dir(tmp_path):
    target = tmp_path / "a" / "b"
    ensure_dir(target)
    ensure_dir(target)
    assert target.is_dir()


def test_sha256_of():
    assert sha256_of("") == (
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
    )
    assert sha256_of("model: {}") != sha256_of("model: {} ")


def test_derive_seed():
    seeds = {derive_seed(0, step) for step in range(100)}
    assert len(seeds) == 100
    assert all(0 <= seed < 2**63 for seed in seeds)
    assert derive_seed(3, 1, 2) == derive_seed(3, 1, 2)
    assert derive_seed(3, 1, 2) != derive_seed(3, 2, 1)
    assert derive_seed(4, 1) != derive_seed(3, 1)


def test_torch_generator():
    first = torch.rand(4, generator=torch_generator(5))
    assert torch.equal(first, torch.rand(4, generator=torch_generator(5)))
