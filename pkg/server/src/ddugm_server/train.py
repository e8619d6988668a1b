"""Training stage: fit the score network by denoising score matching.

Each dataset file holds a stack of complex frames; frames are treated as
independent samples (the engine scores one frame at a time, so the model
never sees the time axis). For the k-space domain the frames are Fourier
transformed and multiplied by the frequency weight before training, and the
checkpoint records that the inputs were weighted.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import torch

from .ddt import read_tensor
from .dsm import dsm_loss, sample_sigmas
from .model import ScoreNet


@dataclass
class TrainConfig:
    """Hyperparameters of one training run.

    ``sigma_max`` must exceed the reconstruction-time ceiling
    ``recon_sigma_max``: the sampler never asks for noise levels the model
    was not trained on.
    """

    domain: str = "image"
    sigma_min: float = 0.01
    sigma_max: float = 378.0
    recon_sigma_max: float = 4.0
    epochs: int = 50
    batch_size: int = 32
    learning_rate: float = 0.005
    lr_decay: float = 0.98
    beta1: float = 0.9
    beta2: float = 0.999
    weight_p: float = 1.0
    weight_q: float = 0.5
    weight_floor: float = 1e-3
    dataset: list[str] = field(default_factory=list)
    seed: int = 0
    model_width: int = 32

    def __post_init__(self):
        if self.domain not in ("image", "kspace"):
            raise ValueError(f"domain must be 'image' or 'kspace', got {self.domain!r}")
        if not 0 < self.sigma_min < self.sigma_max:
            raise ValueError(f"need 0 < sigma_min < sigma_max, got ({self.sigma_min}, {self.sigma_max})")
        if self.sigma_max <= self.recon_sigma_max:
            raise ValueError(
                f"training sigma_max {self.sigma_max} must exceed the reconstruction ceiling {self.recon_sigma_max}"
            )
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")


def load_frames(cfg: TrainConfig) -> torch.Tensor:
    """Read all dataset files into a (N, 2, H, W) float32 tensor of samples."""
    if not cfg.dataset:
        raise ValueError("training config lists no dataset files")
    stacks = []
    for path in cfg.dataset:
        arr = np.asarray(read_tensor(path))
        if arr.ndim == 2:
            arr = arr[None]
        if arr.ndim != 3:
            raise ValueError(f"{path}: expected (N, H, W) frames, got shape {arr.shape}")
        stacks.append(np.ascontiguousarray(arr.astype(np.complex128)))
    frames = np.concatenate(stacks, axis=0)
    if cfg.domain == "kspace":
        frames = _fft2c(frames) * _frequency_weight(frames.shape[-2:], cfg)
    planes = np.stack([frames.real, frames.imag], axis=1).astype(np.float32)
    return torch.from_numpy(planes)


def train(cfg: TrainConfig, checkpoint_path, curve_path=None) -> dict:
    """Run the fit and write the checkpoint; returns the checkpoint dict."""
    samples = load_frames(cfg)
    torch.manual_seed(cfg.seed)
    generator = torch.Generator().manual_seed(cfg.seed)
    model = ScoreNet(width=cfg.model_width)
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate, betas=(cfg.beta1, cfg.beta2))
    scheduler = torch.optim.lr_scheduler.ExponentialLR(optimizer, gamma=cfg.lr_decay)

    history = []
    n = samples.shape[0]
    for epoch in range(cfg.epochs):
        order = torch.randperm(n, generator=generator)
        epoch_losses = []
        for start in range(0, n, cfg.batch_size):
            batch = samples[order[start : start + cfg.batch_size]]
            sigmas = sample_sigmas(batch.shape[0], cfg.sigma_min, cfg.sigma_max, generator)
            loss = dsm_loss(model, batch, sigmas, generator=generator)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_losses.append(float(loss.detach()))
        scheduler.step()
        history.append((epoch, float(np.mean(epoch_losses)), scheduler.get_last_lr()[0]))

    checkpoint = {
        "state_dict": model.state_dict(),
        "config": asdict(cfg),
        "weighted": cfg.domain == "kspace",
        "final_loss": history[-1][1],
    }
    torch.save(checkpoint, checkpoint_path)
    if curve_path is not None:
        with open(curve_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "loss", "lr"])
            writer.writerows(history)
    return checkpoint


def load_model(checkpoint_path) -> tuple[ScoreNet, dict]:
    checkpoint = torch.load(checkpoint_path, map_location="cpu", weights_only=False)
    cfg = checkpoint["config"]
    model = ScoreNet(width=cfg.get("model_width", 32))
    model.load_state_dict(checkpoint["state_dict"])
    model.eval()
    return model, checkpoint


def _fft2c(x: np.ndarray) -> np.ndarray:
    """Centered orthonormal 2-D FFT over the last two axes (engine convention)."""
    axes = (-2, -1)
    return np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(x, axes=axes), axes=axes, norm="ortho"), axes=axes)


def _frequency_weight(shape: tuple[int, int], cfg: TrainConfig) -> np.ndarray:
    h, w = shape
    fy = (np.arange(h) - h // 2) / h
    fx = (np.arange(w) - w // 2) / w
    radius_sq = fy[:, None] ** 2 + fx[None, :] ** 2
    return np.maximum(cfg.weight_floor, (cfg.weight_p * radius_sq) ** cfg.weight_q)


def config_from_dict(data: dict) -> TrainConfig:
    known = set(TrainConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown training config keys: {sorted(unknown)}")
    if isinstance(data.get("recon_sigma_max"), str) and data["recon_sigma_max"].lower() == "inf":
        data = {**data, "recon_sigma_max": math.inf}
    return TrainConfig(**data)
