from __future__ import annotations

import datetime
import hashlib
import pathlib

import humanfriendly
import numpy as np
import torch


def format_size(size: int) -> str:
    """human-readable representation of a size in bytes"""
    return humanfriendly.format_size(size, binary=True)


def parse_count(count: str | int) -> int:
    """integer from a human-readable count (`25k`, `1.5M`, `2000`)"""
    if isinstance(count, int):
        return count
    # humanfriendly only knows about bytes; counts use decimal multipliers
    return int(humanfriendly.parse_size(str(count).strip().rstrip("bB")))


def format_dt(dt: datetime.datetime) -> str:
    """std formatted datetime"""
    return dt.strftime("%Y-%m-%d %H:%M:%S")


def format_duration(duration: float) -> str:
    """human-readable duration from seconds (1 minute and 2.5 seconds)"""
    return humanfriendly.format_timespan(duration)


def utcnow() -> datetime.datetime:
    return datetime.datetime.now(tz=datetime.timezone.utc)


def ensure_dir(fpath: pathlib.Path):
    """recursively creating a folder (mkdir -p)"""
    fpath.mkdir(parents=True, exist_ok=True)


def sha256_of(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def derive_seed(seed: int, *streams: int) -> int:
    """stable 63-bit seed for a sub-stream (step, clip index…) of a base seed"""
    sequence = np.random.SeedSequence([seed, *streams])
    return int(sequence.generate_state(2, dtype=np.uint32).view(np.uint64)[0]) >> 1


def torch_generator(seed: int) -> torch.Generator:
    """CPU generator seeded with seed"""
    generator = torch.Generator()
    generator.manual_seed(seed)
    return generator
