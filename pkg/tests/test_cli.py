import pathlib

import pytest  # pyright: ignore [reportMissingImports]

from movgan.checkpoint import Checkpoint
from movgan.data.clips import load_clips
from movgan.utils.yaml import yaml_load
from movgan_cli.main import run
from movgan_cli.manifest import RunManifest


@pytest.fixture(scope="module")
def toy_data(tmp_path_factory) -> pathlib.Path:
    out = tmp_path_factory.mktemp("toy")
    args = ["--clips", "8", "--clip-length", "4", "--resolution", "16"]
    assert run(["toy", *args, "--out", str(out)]) == 0
    return out


@pytest.fixture(scope="module")
def config_path(tmp_path_factory, mini_config_yaml) -> pathlib.Path:
    fpath = tmp_path_factory.mktemp("config") / "config.yaml"
    fpath.write_text(mini_config_yaml)
    return fpath


def train(config_path, toy_data, out, *extra: str) -> int:
    return run(
        [
            "train",
            "--config",
            str(config_path),
            "--data",
            str(toy_data),
            "--out",
            str(out),
            *extra,
        ]
    )


@pytest.fixture(scope="module")
def trained(tmp_path_factory, config_path, toy_data) -> pathlib.Path:
    out = tmp_path_factory.mktemp("run")
    assert train(config_path, toy_data, out, "--steps", "2") == 0
    return out


@pytest.fixture
def layout_file(tmp_path) -> pathlib.Path:
    fpath = tmp_path / "layout.txt"
    fpath.write_text("# one shape\n1 0.1 0.1 0.6 0.6\n")
    return fpath


def test_usage_errors(capsys):
    assert run([]) == 2
    assert run(["train", "--bogus"]) == 2
    assert run(["dream"]) == 2
    assert run(["--version"]) == 0
    assert "0.1.0" in capsys.readouterr().out


def test_missing_config_is_a_validation_failure(tmp_path, toy_data, capsys):
    assert train(tmp_path / "missing.yaml", toy_data, tmp_path / "run") == 3
    assert "error: configuration-error:" in capsys.readouterr().err


def test_toy(toy_data):
    clips, metadata = load_clips(toy_data)
    assert len(clips) == 8
    assert clips[0].frames.shape == (4, 3, 16, 16)
    assert metadata["source"] == "toy"
    assert metadata["num_categories"] == 6
    manifest = RunManifest.read(toy_data)
    assert manifest["command"] == "toy"
    assert manifest["outputs"] == ["clips.pt"]


def test_prep(tmp_path, annotations_dir):
    out = tmp_path / "prepared"
    args = ["--clip-length", "2", "--resolution", "16"]
    command = ["prep", "--annotations", str(annotations_dir), "--out", str(out)]
    assert run([*command, *args]) == 0
    clips, metadata = load_clips(out)
    assert sorted(clip.source_id for clip in clips) == ["video-a", "video-b"]
    assert metadata["source"] == "annotations"
    assert metadata["categories"] == ["ball", "cat", "dog"]
    assert yaml_load((out / "stats.yaml").read_text())["valid_frames"] == 7
    assert RunManifest.read(out)["outputs"] == ["clips.pt", "stats.yaml"]


def test_prep_preset(tmp_path, annotations_dir):
    out = tmp_path / "prepared"
    command = ["prep", "--annotations", str(annotations_dir), "--out", str(out)]
    args = ["--preset", "vidvor", "--clip-length", "2", "--resolution", "16"]
    assert run([*command, *args]) == 0
    _, metadata = load_clips(out)
    assert metadata["max_instances"] == 20
    assert run([*command, "--preset", "other"]) == 2


def test_train(trained):
    checkpoint = Checkpoint.load(trained / "checkpoint.pt")
    assert checkpoint.step == 2
    assert checkpoint.config.train_config.max_steps == 2
    manifest = RunManifest.read(trained)
    assert manifest["command"] == "train"
    assert manifest["outputs"] == ["checkpoint.pt", "config.yaml", "telemetry.jsonl"]


def test_resume(tmp_path, config_path, toy_data):
    out = tmp_path / "run"
    assert train(config_path, toy_data, out, "--steps", "1") == 0
    assert train(config_path, toy_data, out, "--steps", "3", "--resume") == 0
    assert Checkpoint.load(out / "checkpoint.pt").step == 3

    other = tmp_path / "other.yaml"
    other.write_text(config_path.read_text().replace("batch_size: 2", "batch_size: 1"))
    assert train(other, toy_data, out, "--resume") == 3


def test_category_overflow(tmp_path, config_path, toy_data):
    narrow = tmp_path / "narrow.yaml"
    narrow.write_text(
        config_path.read_text().replace("num_categories: 6", "num_categories: 4")
    )
    assert train(narrow, toy_data, tmp_path / "run") == 3


def generate(trained, layout_file, out, *extra: str) -> int:
    return run(
        [
            "generate",
            "--checkpoint",
            str(trained),
            "--layout",
            str(layout_file),
            "--out",
            str(out),
            *extra,
        ]
    )


def test_generate_is_reproducible(tmp_path, trained, layout_file):
    first, second = tmp_path / "first", tmp_path / "second"
    assert generate(trained, layout_file, first, "--seed", "3") == 0
    assert generate(trained, layout_file, second, "--seed", "3") == 0
    frames = sorted((first / "frames").iterdir())
    assert [fpath.name for fpath in frames] == [f"{i:04d}.png" for i in range(4)]
    for fpath in frames:
        assert fpath.read_bytes() == (second / "frames" / fpath.name).read_bytes()
    metadata = yaml_load((first / "metadata.yaml").read_text())
    assert metadata["seed"] == 3
    assert metadata["clip_length"] == 4
    assert metadata["layout"] == ["1 0.1 0.1 0.6 0.6"]
    manifest = RunManifest.read(first)
    assert "metadata.yaml" in manifest["outputs"]
    digest = Checkpoint.load(trained / "checkpoint.pt").config.digest
    assert manifest["config_hash"] == digest


def test_generate_longer_clip(tmp_path, trained, layout_file):
    assert generate(trained, layout_file, tmp_path, "--clip-length", "6") == 0
    assert len(list((tmp_path / "frames").iterdir())) == 6


def test_generate_invalid_layout(tmp_path, trained, capsys):
    fpath = tmp_path / "layout.txt"
    fpath.write_text("9 0.1 0.1 0.6 0.6\n")
    assert generate(trained, fpath, tmp_path / "out") == 3
    assert "error: layout-validation-error:" in capsys.readouterr().err
    assert generate(trained, tmp_path / "missing.txt", tmp_path / "out") == 3


def test_edit(tmp_path, trained, layout_file):
    script = tmp_path / "edits.txt"
    script.write_text("add 2 0.5 0.5 1 1\n")
    out = tmp_path / "edited"
    command = ["edit", "--checkpoint", str(trained), "--layout", str(layout_file)]
    assert run([*command, "--script", str(script), "--out", str(out)]) == 0
    assert len(list((out / "original").iterdir())) == 4
    assert len(list((out / "edited").iterdir())) == 4
    assert (out / "edited_layout.txt").read_text().splitlines() == [
        "1 0.1 0.1 0.6 0.6",
        "2 0.5 0.5 1 1",
    ]
    digest = Checkpoint.load(trained / "checkpoint.pt").config.digest
    assert RunManifest.read(out)["config_hash"] == digest
    missing = tmp_path / "missing.txt"
    assert run([*command, "--script", str(missing), "--out", str(out)]) == 3


def test_edit_unknown_instance(tmp_path, trained, layout_file, capsys):
    script = tmp_path / "edits.txt"
    script.write_text("remove 5\n")
    command = ["edit", "--checkpoint", str(trained), "--layout", str(layout_file)]
    out = tmp_path / "edited"
    assert run([*command, "--script", str(script), "--out", str(out)]) == 3
    assert "error: input-error: Unknown instance_id 5" in capsys.readouterr().err
    assert not out.exists()


@pytest.mark.parametrize("mode", ["fid", "fvd"])
def test_eval_frechet(tmp_path, trained, toy_data, mode: str, capsys):
    command = ["eval", "--checkpoint", str(trained), "--data", str(toy_data)]
    assert run([*command, "--mode", mode, "--samples", "4"]) == 0
    record = yaml_load(capsys.readouterr().out)
    assert record["mode"] == mode
    assert record["score"] >= 0
    assert "non-canonical" in record["extractor"]


def test_eval_adherence(tmp_path, trained, toy_data):
    command = ["eval", "--checkpoint", str(trained), "--data", str(toy_data)]
    options = ["--mode", "adherence", "--samples", "4", "--out", str(tmp_path)]
    assert run([*command, *options]) == 0
    record = yaml_load((tmp_path / "results.yaml").read_text())
    assert record["mode"] == "adherence"
    assert 0 <= record["score"] <= 1
    assert 0 < record["chance"] <= 1
    assert RunManifest.read(tmp_path)["outputs"] == ["results.yaml"]
