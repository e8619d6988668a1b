"""Training-stage behavior at smoke scale."""

import numpy as np
import pytest
import torch

from ddugm_server.ddt import write_tensor
from ddugm_server.dsm import dsm_loss, sample_sigmas
from ddugm_server.train import TrainConfig, config_from_dict, load_frames, load_model, train


@pytest.fixture
def toy_file(tmp_path):
    rng = np.random.default_rng(11)
    frames = 0.4 + 0.2 * (rng.standard_normal((8, 16, 16)) + 1j * rng.standard_normal((8, 16, 16)))
    path = tmp_path / "frames.ddt"
    write_tensor(path, frames.astype(np.complex64))
    return str(path)


def _smoke_config(toy_file, **overrides):
    base = dict(
        domain="image",
        sigma_min=0.05,
        sigma_max=2.0,
        recon_sigma_max=1.0,
        epochs=1,
        batch_size=4,
        dataset=[toy_file],
        seed=0,
        model_width=8,
    )
    base.update(overrides)
    return TrainConfig(**base)


def test_one_epoch_smoke_run_finite_loss(tmp_path, toy_file):
    ckpt_path = tmp_path / "model.pt"
    curve_path = tmp_path / "curve.csv"
    checkpoint = train(_smoke_config(toy_file), ckpt_path, curve_path=curve_path)
    assert np.isfinite(checkpoint["final_loss"])
    assert ckpt_path.exists()
    lines = curve_path.read_text().strip().splitlines()
    assert lines[0] == "epoch,loss,lr"
    assert len(lines) == 2


def test_kspace_training_marks_weighted_inputs(tmp_path, toy_file):
    checkpoint = train(_smoke_config(toy_file, domain="kspace"), tmp_path / "k.pt")
    assert checkpoint["weighted"] is True
    checkpoint = train(_smoke_config(toy_file, domain="image"), tmp_path / "i.pt")
    assert checkpoint["weighted"] is False


def test_kspace_frames_are_weighted_on_load(toy_file):
    image_cfg = _smoke_config(toy_file)
    kspace_cfg = _smoke_config(toy_file, domain="kspace")
    img = load_frames(image_cfg)
    ksp = load_frames(kspace_cfg)
    assert img.shape == ksp.shape == (8, 2, 16, 16)
    # weighting suppresses the k-space center: the DC magnitude must shrink
    dc = torch.sqrt(ksp[:, 0, 8, 8] ** 2 + ksp[:, 1, 8, 8] ** 2)
    assert float(dc.max()) < 0.1


def test_checkpoint_round_trip_restores_outputs(tmp_path, toy_file):
    cfg = _smoke_config(toy_file, epochs=2)
    train(cfg, tmp_path / "model.pt")
    model, checkpoint = load_model(tmp_path / "model.pt")
    assert checkpoint["config"]["domain"] == "image"
    x = torch.randn(2, 2, 16, 16, generator=torch.Generator().manual_seed(0))
    with torch.no_grad():
        out1 = model(x, torch.tensor([0.3, 1.1]))
        out2 = model(x, torch.tensor([0.3, 1.1]))
    assert torch.equal(out1, out2)
    assert out1.shape == x.shape


def test_training_deterministic_given_seed(tmp_path, toy_file):
    a = train(_smoke_config(toy_file, epochs=2), tmp_path / "a.pt")
    b = train(_smoke_config(toy_file, epochs=2), tmp_path / "b.pt")
    assert a["final_loss"] == pytest.approx(b["final_loss"], rel=1e-6)


def test_config_validation(toy_file):
    with pytest.raises(ValueError):
        TrainConfig(domain="frequency")
    with pytest.raises(ValueError):
        TrainConfig(sigma_min=1.0, sigma_max=0.5)
    # training ladder must top out above the reconstruction ladder
    with pytest.raises(ValueError):
        TrainConfig(sigma_max=2.0, recon_sigma_max=4.0)
    with pytest.raises(ValueError):
        config_from_dict({"domain": "image", "sigma_mx": 3.0})
    with pytest.raises(ValueError):
        train(TrainConfig(dataset=[]), "/tmp/never.pt")


def test_dataset_shape_rejected_before_training(tmp_path):
    path = tmp_path / "bad.ddt"
    write_tensor(path, np.zeros((2, 3, 4, 5), dtype=np.complex64))
    cfg = TrainConfig(domain="image", dataset=[str(path)], epochs=1, sigma_max=378.0)
    with pytest.raises(ValueError):
        train(cfg, tmp_path / "model.pt")


def test_sigma_sampler_log_uniform_bounds():
    g = torch.Generator().manual_seed(3)
    s = sample_sigmas(4096, 0.01, 10.0, g)
    assert float(s.min()) >= 0.01
    assert float(s.max()) <= 10.0
    # log-uniform: the median sits near the geometric mean
    assert float(s.log().median().exp()) == pytest.approx(np.sqrt(0.01 * 10.0), rel=0.2)


def test_dsm_loss_rejects_bad_batch():
    with pytest.raises(ValueError):
        dsm_loss(lambda x, s: x, torch.zeros(3, 16, 16), torch.ones(3))
