"""Adversarial training: losses, frame-pair sampling, the alternating
discriminator/generator step, telemetry and the resumable training loop"""

from __future__ import annotations

import json
import logging
import pathlib
import time
from collections.abc import Callable, Sequence
from typing import NamedTuple

import numpy as np
import torch
import torch.nn.functional as F
from attrs import asdict, define, field
from tqdm import tqdm

from movgan.checkpoint import Checkpoint
from movgan.checks import is_valid_clip_record
from movgan.conditioning import condition_clip
from movgan.constants import CHECKPOINT_FILENAME, TELEMETRY_FILENAME
from movgan.data.clips import ClipBatch, ClipRecord, collate
from movgan.discriminator import Discriminator
from movgan.errors import ConfigurationError, InputError, NonFiniteLossError
from movgan.generator import Generator, LatentPair
from movgan.inputs.mainconfig import RunConfig
from movgan.utils.misc import derive_seed, ensure_dir, format_duration, torch_generator

logger = logging.getLogger(__name__)

# sub-streams of the run seed
INIT_STREAM = 0
STEP_STREAM = 1


def as_score(score: torch.Tensor | float) -> torch.Tensor:
    if isinstance(score, torch.Tensor):
        return score
    return torch.as_tensor(score, dtype=torch.get_default_dtype())


def gan_losses(
    real_score: torch.Tensor | float, fake_score: torch.Tensor | float
) -> tuple[torch.Tensor, torch.Tensor]:
    """non-saturating losses (d_loss, g_loss), elementwise on raw logits

    d_loss = softplus(−real) + softplus(fake) ; g_loss = softplus(−fake)"""
    real_score = as_score(real_score)
    fake_score = as_score(fake_score).to(real_score.dtype)
    d_loss = F.softplus(-real_score) + F.softplus(fake_score)
    g_loss = F.softplus(-fake_score)
    return d_loss, g_loss


def logit_gap(real_score: torch.Tensor, fake_score: torch.Tensor) -> torch.Tensor:
    """log D(v, L) − log D(v̂, L) with D = sigmoid(logit)"""
    return F.logsigmoid(real_score) - F.logsigmoid(fake_score)


class FramePair(NamedTuple):
    t1: int
    t2: int
    delta_t: int


def sample_frame_pair(
    clip_length: int, rng: torch.Generator | None = None
) -> FramePair:
    """two distinct frame indices, uniformly without replacement"""
    if clip_length < 2:
        raise InputError(f"Frame pairs need clip_length >= 2, got {clip_length}")
    t1, t2 = torch.randperm(clip_length, generator=rng)[:2].tolist()
    return FramePair(t1, t2, abs(t1 - t2))


def sample_frame_pairs(
    batch_size: int, clip_length: int, rng: torch.Generator | None = None
) -> tuple[torch.Tensor, torch.Tensor]:
    """(t1, t2) index tensors (B,), one independent pair per clip"""
    pairs = [sample_frame_pair(clip_length, rng) for _ in range(batch_size)]
    return (
        torch.tensor([pair.t1 for pair in pairs]),
        torch.tensor([pair.t2 for pair in pairs]),
    )


@define(kw_only=True)
class TrainTelemetry:
    """one training step, as written to the telemetry log"""

    step: int
    generator_loss: float
    discriminator_loss: float
    logit_gap_mean: float
    logit_gap_std: float
    real_scores: list[float]
    fake_scores: list[float]
    batch_seed: int
    r1_penalty: float | None = None
    wall_clock: float = 0.0

    @classmethod
    def from_scores(
        cls,
        *,
        step: int,
        generator_loss: float,
        discriminator_loss: float,
        real_scores: torch.Tensor,
        fake_scores: torch.Tensor,
        batch_seed: int,
        r1_penalty: float | None = None,
        wall_clock: float = 0.0,
    ) -> TrainTelemetry:
        gaps = logit_gap(real_scores.double(), fake_scores.double()).numpy()
        return cls(
            step=step,
            generator_loss=generator_loss,
            discriminator_loss=discriminator_loss,
            logit_gap_mean=float(np.mean(gaps)),
            logit_gap_std=float(np.std(gaps)),
            real_scores=real_scores.double().tolist(),
            fake_scores=fake_scores.double().tolist(),
            batch_seed=batch_seed,
            r1_penalty=r1_penalty,
            wall_clock=wall_clock,
        )

    def to_dict(self) -> dict:
        return asdict(self)

    def deterministic_dict(self) -> dict:
        """every field but the wall clock"""
        payload = self.to_dict()
        payload.pop("wall_clock")
        return payload


@define
class TelemetryWriter:
    """append-only JSON-lines telemetry file"""

    fpath: pathlib.Path = field(converter=pathlib.Path)

    def write(self, record: TrainTelemetry):
        ensure_dir(self.fpath.parent)
        with open(self.fpath, "a") as fh:
            fh.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")

    def truncate_after(self, step: int):
        """drop records past step (resuming from an earlier checkpoint)"""
        if not self.fpath.exists():
            return
        records = [
            line
            for line in self.fpath.read_text().splitlines()
            if line.strip() and json.loads(line)["step"] <= step
        ]
        self.fpath.write_text("".join(f"{line}\n" for line in records))

    @staticmethod
    def read(fpath: pathlib.Path) -> list[TrainTelemetry]:
        return [
            TrainTelemetry(**json.loads(line))
            for line in pathlib.Path(fpath).read_text().splitlines()
            if line.strip()
        ]


def build_models(config: RunConfig) -> tuple[Generator, Discriminator]:
    """freshly initialized models, seeded from the run seed"""
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(derive_seed(config.train_config.seed, INIT_STREAM))
        generator = Generator(config.model_config)
        discriminator = Discriminator(
            config.model_config,
            half_precision=config.train_config.discriminator_half_precision,
        )
    return generator, discriminator


def check_finite(value: torch.Tensor, *, step: int, name: str, batch_seed: int):
    if not bool(torch.isfinite(value).all()):
        raise NonFiniteLossError(step, name, batch_seed, float(value.detach().sum()))


class Trainer:
    """Optimization state of a run: both models, their optimizers, the step"""

    def __init__(
        self,
        config: RunConfig,
        *,
        generator: Generator | None = None,
        discriminator: Discriminator | None = None,
        train_generator: bool = True,
    ):
        self.config = config
        if generator is None or discriminator is None:
            generator, discriminator = build_models(config)
        self.generator = generator
        self.discriminator = discriminator
        self.train_generator = train_generator
        train = config.train_config
        self.generator_optimizer = torch.optim.Adam(
            generator.parameters(), lr=train.learning_rate, betas=train.betas
        )
        self.discriminator_optimizer = torch.optim.Adam(
            discriminator.parameters(), lr=train.learning_rate, betas=train.betas
        )
        self.step = 0

    @property
    def train_config(self):
        return self.config.train_config

    def batch_seed(self, step: int) -> int:
        return derive_seed(self.train_config.seed, STEP_STREAM, step)

    def r1_penalty(
        self, batch: ClipBatch, t1: torch.Tensor, t2: torch.Tensor
    ) -> tuple[torch.Tensor, torch.Tensor]:
        """real scores and the lazily-scaled R1 penalty on real frames"""
        frames = batch.frames.detach().requires_grad_(True)
        scores = self.discriminator.discriminate(
            frames, batch.layouts, t1, t2, crop_gradients=False
        )
        (gradients,) = torch.autograd.grad(scores.sum(), frames, create_graph=True)
        penalty = gradients.pow(2).flatten(1).sum(1).mean()
        train = self.train_config
        return scores, penalty * (train.r1_gamma / 2) * train.r1_interval

    def train_step(self, batch: ClipBatch, *, batch_seed: int | None = None):
        """one discriminator update then one generator update"""
        step = self.step + 1
        if batch_seed is None:
            batch_seed = self.batch_seed(step)
        rng = torch_generator(batch_seed)
        train = self.train_config
        batch_size, clip_length = batch.frames.shape[:2]
        if clip_length != self.generator.config.clip_length:
            raise ConfigurationError(
                f"Clips of {clip_length} frames for a "
                f"{self.generator.config.clip_length}-frame generator"
            )
        self.generator.train()
        self.discriminator.train()

        latents = LatentPair.sample(
            batch_size, self.generator.config, rng, dtype=batch.frames.dtype
        )
        t1, t2 = sample_frame_pairs(batch_size, clip_length, rng)
        fake = self.generator(latents, batch.first_layouts, self.generator.grid())

        # discriminator
        self.discriminator.requires_grad_(True)
        self.discriminator_optimizer.zero_grad(set_to_none=True)
        penalty = None
        if train.r1_enabled and step % train.r1_interval == 0:
            real_scores, penalty = self.r1_penalty(batch, t1, t2)
        else:
            real_scores = self.discriminator.discriminate(
                batch.frames, batch.layouts, t1, t2
            )
        fake_scores = self.discriminator.discriminate(
            fake.detach(), batch.layouts, t1, t2
        )
        d_losses, _ = gan_losses(real_scores, fake_scores)
        d_loss = d_losses.mean()
        check_finite(
            d_loss, step=step, name="discriminator_loss", batch_seed=batch_seed
        )
        total = d_loss
        if penalty is not None:
            check_finite(penalty, step=step, name="r1_penalty", batch_seed=batch_seed)
            total = total + penalty
        total.backward()
        self.discriminator_optimizer.step()
        self.discriminator.quantize_()

        # generator
        self.discriminator.requires_grad_(False)
        self.generator_optimizer.zero_grad(set_to_none=True)
        _, g_losses = gan_losses(
            real_scores.detach(),
            self.discriminator.discriminate(fake, batch.layouts, t1, t2),
        )
        g_loss = g_losses.mean()
        check_finite(g_loss, step=step, name="generator_loss", batch_seed=batch_seed)
        if self.train_generator:
            g_loss.backward()
            self.generator_optimizer.step()
        self.discriminator.requires_grad_(True)

        self.step = step
        return TrainTelemetry.from_scores(
            step=step,
            generator_loss=float(g_loss.detach()),
            discriminator_loss=float(d_loss.detach()),
            real_scores=real_scores.detach(),
            fake_scores=fake_scores.detach(),
            batch_seed=batch_seed,
            r1_penalty=None if penalty is None else float(penalty.detach()),
        )

    def checkpoint(self) -> Checkpoint:
        return Checkpoint.capture(
            step=self.step,
            config=self.config,
            generator=self.generator,
            discriminator=self.discriminator,
            generator_optimizer=self.generator_optimizer,
            discriminator_optimizer=self.discriminator_optimizer,
        )

    @classmethod
    def from_checkpoint(cls, checkpoint: Checkpoint) -> Trainer:
        trainer = cls(checkpoint.config)
        checkpoint.restore(
            trainer.generator,
            trainer.discriminator,
            trainer.generator_optimizer,
            trainer.discriminator_optimizer,
        )
        trainer.step = checkpoint.step
        return trainer


def prepare_dataset(
    clips: Sequence[ClipRecord], config: RunConfig
) -> list[ClipRecord]:
    """clips conditioned for the run's mode, checked against the model"""
    if not clips:
        raise InputError("Training dataset is empty")
    model, train = config.model_config, config.train_config
    prepared = []
    for clip in clips:
        is_valid_clip_record(
            clip,
            clip_length=model.clip_length,
            resolution=model.resolution,
            max_instances=model.max_instances,
            num_categories=model.num_categories,
        ).raise_for_status(ConfigurationError)
        prepared.append(condition_clip(clip, train.mode, train.center_crop_fraction))
    return prepared


def draw_batch(
    clips: Sequence[ClipRecord], batch_size: int, batch_seed: int, capacity: int
) -> ClipBatch:
    """batch of clips drawn with replacement from the step's seed"""
    rng = torch_generator(derive_seed(batch_seed, 0))
    indices = torch.randint(len(clips), (batch_size,), generator=rng).tolist()
    return collate([clips[index] for index in indices], capacity)


def train_loop(
    clips: Sequence[ClipRecord],
    config: RunConfig,
    *,
    output_dir: pathlib.Path | None = None,
    trainer: Trainer | None = None,
    total_steps: int | None = None,
    on_step: Callable[[TrainTelemetry], None] | None = None,
) -> tuple[Trainer, list[TrainTelemetry]]:
    """train until total_steps (defaults to the config's) and return the
    trainer and the recorded telemetry

    Telemetry is recorded at step 1 and every telemetry_interval steps;
    with an output_dir it is appended to its telemetry log and checkpoints are
    written every checkpoint_interval steps and at the end. A trainer restored
    from a checkpoint resumes exactly where the checkpointed run was."""
    dataset = prepare_dataset(clips, config)
    train = config.train_config
    trainer = trainer or Trainer(config)
    total_steps = train.total_steps if total_steps is None else total_steps
    writer = None
    if output_dir is not None:
        writer = TelemetryWriter(pathlib.Path(output_dir) / TELEMETRY_FILENAME)
        writer.truncate_after(trainer.step)

    records: list[TrainTelemetry] = []
    started_on = time.monotonic()
    capacity = config.model_config.max_instances
    logger.info(
        f"training {train.mode.value} from step {trainer.step} to {total_steps} "
        f"on {len(dataset)} clip(s)"
    )
    progress = tqdm(
        total=max(total_steps - trainer.step, 0), desc="train", disable=None
    )
    while trainer.step < total_steps:
        batch_seed = trainer.batch_seed(trainer.step + 1)
        batch = draw_batch(dataset, train.batch_size, batch_seed, capacity)
        record = trainer.train_step(batch, batch_seed=batch_seed)
        record.wall_clock = time.monotonic() - started_on
        progress.update(1)
        if on_step is not None:
            on_step(record)
        if record.step == 1 or record.step % train.telemetry_interval == 0:
            records.append(record)
            if writer:
                writer.write(record)
            logger.debug(
                f"step {record.step}: d={record.discriminator_loss:.4f} "
                f"g={record.generator_loss:.4f} gap={record.logit_gap_mean:.4f}"
            )
        if output_dir is not None and record.step % train.checkpoint_interval == 0:
            trainer.checkpoint().save(pathlib.Path(output_dir) / CHECKPOINT_FILENAME)
    progress.close()

    if output_dir is not None:
        trainer.checkpoint().save(pathlib.Path(output_dir) / CHECKPOINT_FILENAME)
    logger.info(
        f"reached step {trainer.step} in "
        f"{format_duration(time.monotonic() - started_on)}"
    )
    return trainer, records

