from __future__ import annotations

import pathlib
from typing import Any

from attrs import define, evolve, field, fields
from typeguard import TypeCheckError, typechecked

from movgan.errors import ConfigurationError
from movgan.inputs.model import ModelConfig
from movgan.inputs.train import TrainConfig
from movgan.utils.misc import sha256_of
from movgan.utils.yaml import yaml_dump, yaml_load

# model fields that are dictated by the training setup
SHARED_FIELDS = ("resolution", "clip_length")


@typechecked
@define(kw_only=True)
class RunConfig:
    """Complete configuration of a training run: a `model:` and a `train:` part"""

    model: dict | ModelConfig = field(factory=ModelConfig)
    train: dict | TrainConfig = field(factory=TrainConfig)

    def __attrs_post_init__(self):
        if isinstance(self.train, dict):
            self.train = build_section(TrainConfig, self.train, "train")

        if isinstance(self.model, dict):
            for name in SHARED_FIELDS:
                requested = self.model.get(name)
                if requested is not None and requested != getattr(self.train, name):
                    raise ConfigurationError(
                        f"model.{name}={requested} contradicts "
                        f"train.{name}={getattr(self.train, name)}"
                    )
                self.model[name] = getattr(self.train, name)
            self.model = build_section(ModelConfig, self.model, "model")

        for name in SHARED_FIELDS:
            if getattr(self.model_config, name) != getattr(self.train_config, name):
                raise ConfigurationError(
                    f"model.{name}={getattr(self.model_config, name)} contradicts "
                    f"train.{name}={getattr(self.train_config, name)}"
                )

        # the conditioning mode decides which generator pathways exist
        mode = self.train_config.mode
        self.model = evolve(
            self.model_config,
            identity_embeddings=mode.uses_identity,
            global_raster=mode.uses_global_raster,
        )

    @property
    def model_config(self) -> ModelConfig:
        if not isinstance(self.model, ModelConfig):
            raise ConfigurationError("Model config not ready")
        return self.model

    @property
    def train_config(self) -> TrainConfig:
        if not isinstance(self.train, TrainConfig):
            raise ConfigurationError("Train config not ready")
        return self.train

    @classmethod
    def read_from(cls, text: str) -> RunConfig:
        """Config from a YAML string config"""
        try:
            payload = yaml_load(text) or {}
        except Exception as exc:
            raise ConfigurationError(f"Unable to parse YAML config: {exc}") from exc

        if not isinstance(payload, dict):
            raise ConfigurationError(
                f"Unexpected type for config document: {type(payload).__name__}"
            )

        unknown = set(payload) - {"model", "train"}
        if unknown:
            raise ConfigurationError(
                f"Unknown top-level key(s): {', '.join(sorted(unknown))}"
            )
        for name in ("model", "train"):
            if not isinstance(payload.get(name) or {}, dict):
                raise ConfigurationError(f"Unexpected type for Config.{name}")
        return cls(
            model=dict(payload.get("model") or {}),
            train=dict(payload.get("train") or {}),
        )

    @classmethod
    def read_file(cls, fpath: pathlib.Path) -> RunConfig:
        fpath = pathlib.Path(fpath).expanduser()
        if not fpath.is_file():
            raise ConfigurationError(f"Config file not found: {fpath}")
        return cls.read_from(fpath.read_text())

    def to_dict(self) -> dict[str, Any]:
        return {
            "model": self.model_config.to_dict(),
            "train": self.train_config.to_dict(),
        }

    def to_yaml(self) -> str:
        return yaml_dump(self.to_dict())

    @property
    def digest(self) -> str:
        """sha256 of the canonical YAML form, recorded in run manifests"""
        return sha256_of(self.to_yaml())


def build_section(cls, payload: dict, name: str):
    """cls(**payload) turning unknown keys and type errors into ConfigurationError"""
    known = {attribute.name for attribute in fields(cls)}
    unknown = set(payload) - known
    if unknown:
        raise ConfigurationError(
            f"Unknown key(s) in `{name}`: {', '.join(sorted(unknown))}"
        )
    try:
        return cls(**payload)
    except ConfigurationError:
        raise
    except (TypeError, TypeCheckError, ValueError) as exc:
        raise ConfigurationError(f"Invalid `{name}` config: {exc}") from exc
