"""Checkpoint file: generator and discriminator parameter trees, optimizer states,
step counter and the run configuration, with shape/dtype metadata"""

from __future__ import annotations

import logging
import pathlib
from typing import Any

import torch
from attrs import define, field
from torch import nn

from movgan.constants import CHECKPOINT_FORMAT_VERSION
from movgan.errors import CheckpointError
from movgan.inputs.mainconfig import RunConfig
from movgan.utils.misc import ensure_dir, format_size

logger = logging.getLogger(__name__)


def tree_metadata(state: dict[str, torch.Tensor]) -> dict[str, dict[str, Any]]:
    return {
        name: {"shape": list(tensor.shape), "dtype": str(tensor.dtype)}
        for name, tensor in state.items()
    }


def check_tree(
    name: str, state: dict[str, torch.Tensor], metadata: dict, module: nn.Module
):
    """raise CheckpointError unless state matches its metadata and module"""
    expected = module.state_dict()
    if set(state) != set(expected):
        missing = sorted(set(expected) - set(state))
        extra = sorted(set(state) - set(expected))
        raise CheckpointError(
            f"{name} tree mismatch: missing={missing[:5]} unexpected={extra[:5]}"
        )
    for key, tensor in state.items():
        recorded = metadata.get(key, {})
        if recorded.get("shape") != list(tensor.shape) or recorded.get(
            "dtype"
        ) != str(tensor.dtype):
            raise CheckpointError(f"{name}.{key} differs from its recorded metadata")
        if tensor.shape != expected[key].shape:
            raise CheckpointError(
                f"{name}.{key} has shape {tuple(tensor.shape)}, "
                f"model expects {tuple(expected[key].shape)}"
            )
        if tensor.dtype != expected[key].dtype:
            raise CheckpointError(
                f"{name}.{key} has dtype {tensor.dtype}, model expects "
                f"{expected[key].dtype}"
            )


@define(kw_only=True)
class Checkpoint:
    step: int
    config: RunConfig
    generator: dict[str, torch.Tensor]
    discriminator: dict[str, torch.Tensor]
    generator_optimizer: dict | None = None
    discriminator_optimizer: dict | None = None
    format_version: int = CHECKPOINT_FORMAT_VERSION
    metadata: dict = field(factory=dict)

    def __attrs_post_init__(self):
        if not self.metadata:
            self.metadata = {
                "generator": tree_metadata(self.generator),
                "discriminator": tree_metadata(self.discriminator),
            }

    @classmethod
    def capture(
        cls,
        *,
        step: int,
        config: RunConfig,
        generator: nn.Module,
        discriminator: nn.Module,
        generator_optimizer: torch.optim.Optimizer | None = None,
        discriminator_optimizer: torch.optim.Optimizer | None = None,
    ) -> Checkpoint:
        def detached(module: nn.Module):
            return {
                key: tensor.detach().cpu().clone()
                for key, tensor in module.state_dict().items()
            }

        return cls(
            step=step,
            config=config,
            generator=detached(generator),
            discriminator=detached(discriminator),
            generator_optimizer=(
                generator_optimizer.state_dict() if generator_optimizer else None
            ),
            discriminator_optimizer=(
                discriminator_optimizer.state_dict()
                if discriminator_optimizer
                else None
            ),
        )

    def to_payload(self) -> dict[str, Any]:
        return {
            "format_version": self.format_version,
            "step": self.step,
            "config": self.config.to_dict(),
            "generator": self.generator,
            "discriminator": self.discriminator,
            "generator_optimizer": self.generator_optimizer,
            "discriminator_optimizer": self.discriminator_optimizer,
            "metadata": self.metadata,
        }

    def save(self, fpath: pathlib.Path) -> pathlib.Path:
        fpath = pathlib.Path(fpath)
        ensure_dir(fpath.parent)
        partial = fpath.with_suffix(fpath.suffix + ".partial")
        torch.save(self.to_payload(), partial)
        partial.replace(fpath)
        logger.debug(
            f"saved step {self.step} to {fpath} "
            f"({format_size(fpath.stat().st_size)})"
        )
        return fpath

    @classmethod
    def load(cls, fpath: pathlib.Path) -> Checkpoint:
        fpath = pathlib.Path(fpath)
        if not fpath.is_file():
            raise CheckpointError(f"Checkpoint not found: {fpath}")
        try:
            payload = torch.load(fpath, map_location="cpu", weights_only=True)
        except Exception as exc:
            raise CheckpointError(f"Unable to read checkpoint {fpath}: {exc}") from exc
        if not isinstance(payload, dict):
            raise CheckpointError(f"Unexpected checkpoint content in {fpath}")
        version = payload.get("format_version")
        if version != CHECKPOINT_FORMAT_VERSION:
            raise CheckpointError(
                f"Checkpoint format version {version} not supported "
                f"(expecting {CHECKPOINT_FORMAT_VERSION})"
            )
        try:
            config = RunConfig(**payload["config"])
            return cls(
                step=int(payload["step"]),
                config=config,
                generator=payload["generator"],
                discriminator=payload["discriminator"],
                generator_optimizer=payload.get("generator_optimizer"),
                discriminator_optimizer=payload.get("discriminator_optimizer"),
                format_version=version,
                metadata=payload["metadata"],
            )
        except KeyError as exc:
            raise CheckpointError(f"Checkpoint {fpath} lacks {exc}") from exc

    def restore(
        self,
        generator: nn.Module,
        discriminator: nn.Module | None = None,
        generator_optimizer: torch.optim.Optimizer | None = None,
        discriminator_optimizer: torch.optim.Optimizer | None = None,
    ):
        """load parameter trees (and optimizer states) after validating every shape"""
        check_tree(
            "generator", self.generator, self.metadata.get("generator", {}), generator
        )
        generator.load_state_dict(self.generator)
        if discriminator is not None:
            check_tree(
                "discriminator",
                self.discriminator,
                self.metadata.get("discriminator", {}),
                discriminator,
            )
            discriminator.load_state_dict(self.discriminator)
        for optimizer, state, name in (
            (generator_optimizer, self.generator_optimizer, "generator"),
            (discriminator_optimizer, self.discriminator_optimizer, "discriminator"),
        ):
            if optimizer is None:
                continue
            if state is None:
                raise CheckpointError(f"Checkpoint holds no {name} optimizer state")
            optimizer.load_state_dict(state)
