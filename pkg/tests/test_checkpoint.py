import pytest  # pyright: ignore [reportMissingImports]
import torch
from attrs import evolve

from movgan.checkpoint import Checkpoint
from movgan.constants import CHECKPOINT_FILENAME
from movgan.errors import CheckpointError
from movgan.generator import Generator
from movgan.inputs.mainconfig import RunConfig
from movgan.training import Trainer, build_models


@pytest.fixture
def saved(mini_run_config: RunConfig, tmp_path):
    trainer = Trainer(mini_run_config)
    fpath = trainer.checkpoint().save(tmp_path / CHECKPOINT_FILENAME)
    return trainer, fpath


def test_round_trip(saved, mini_run_config: RunConfig):
    trainer, fpath = saved
    checkpoint = Checkpoint.load(fpath)
    assert checkpoint.step == 0
    assert checkpoint.config.digest == mini_run_config.digest

    generator = Generator(mini_run_config.model_config)
    checkpoint.restore(generator)
    for key, value in trainer.generator.state_dict().items():
        assert torch.equal(generator.state_dict()[key], value)
    assert not (fpath.parent / f"{fpath.name}.partial").exists()


def test_restore_optimizers(saved, mini_run_config: RunConfig):
    _, fpath = saved
    trainer = Trainer.from_checkpoint(Checkpoint.load(fpath))
    assert trainer.step == 0
    assert trainer.config.digest == mini_run_config.digest


def test_missing_file(tmp_path):
    with pytest.raises(CheckpointError):
        Checkpoint.load(tmp_path / "nope.pt")


def test_format_version(saved):
    _, fpath = saved
    payload = torch.load(fpath, weights_only=True)
    payload["format_version"] = 99
    torch.save(payload, fpath)
    with pytest.raises(CheckpointError, match="format version"):
        Checkpoint.load(fpath)


def test_shape_mismatch(saved, mini_run_config: RunConfig):
    _, fpath = saved
    larger = Generator(evolve(mini_run_config.model_config, hidden_dim=32))
    with pytest.raises(CheckpointError):
        Checkpoint.load(fpath).restore(larger)


def test_dtype_mismatch(saved, mini_run_config: RunConfig):
    _, fpath = saved
    generator = Generator(mini_run_config.model_config).double()
    with pytest.raises(CheckpointError):
        Checkpoint.load(fpath).restore(generator)


def test_missing_optimizer_state(mini_run_config: RunConfig, tmp_path):
    generator, discriminator = build_models(mini_run_config)
    checkpoint = Checkpoint.capture(
        step=0,
        config=mini_run_config,
        generator=generator,
        discriminator=discriminator,
    )
    checkpoint.save(tmp_path / CHECKPOINT_FILENAME)
    with pytest.raises(CheckpointError):
        Trainer.from_checkpoint(Checkpoint.load(tmp_path / CHECKPOINT_FILENAME))
