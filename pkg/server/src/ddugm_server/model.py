"""Noise-conditional convolutional score network, toy scale.

The network sees a two-channel (real, imaginary) frame perturbed at noise
level sigma and returns the estimated score. Conditioning enters as Fourier
features of log sigma mapped to per-channel biases; the raw output is
divided by sigma so the internal regression target is the well-conditioned
(-z) across all noise levels.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn


class SigmaEmbedding(nn.Module):
    """Fourier features of log sigma followed by a small MLP."""

    def __init__(self, dim: int = 64, n_freqs: int = 8):
        super().__init__()
        freqs = torch.tensor(np.geomspace(0.2, 20.0, n_freqs), dtype=torch.float32)
        self.register_buffer("freqs", freqs)
        self.mlp = nn.Sequential(nn.Linear(2 * n_freqs, dim), nn.SiLU(), nn.Linear(dim, dim))

    def forward(self, sigma: torch.Tensor) -> torch.Tensor:
        phases = torch.log(sigma)[:, None] * self.freqs[None, :]
        features = torch.cat([torch.sin(phases), torch.cos(phases)], dim=1)
        return self.mlp(features)


class ConvBlock(nn.Module):
    def __init__(self, in_ch: int, out_ch: int, emb_dim: int):
        super().__init__()
        self.conv = nn.Conv2d(in_ch, out_ch, 3, padding=1)
        self.norm = nn.GroupNorm(min(4, out_ch), out_ch)
        self.act = nn.SiLU()
        self.film = nn.Linear(emb_dim, out_ch)

    def forward(self, x: torch.Tensor, emb: torch.Tensor) -> torch.Tensor:
        h = self.conv(x)
        h = h + self.film(emb)[:, :, None, None]
        return self.act(self.norm(h))


class ScoreNet(nn.Module):
    """Small encoder-decoder estimating the score of noised frames."""

    def __init__(self, width: int = 32, emb_dim: int = 64):
        super().__init__()
        self.embed = SigmaEmbedding(dim=emb_dim)
        self.enc1 = ConvBlock(2, width, emb_dim)
        self.enc2 = ConvBlock(width, 2 * width, emb_dim)
        self.mid = ConvBlock(2 * width, 2 * width, emb_dim)
        self.dec1 = ConvBlock(2 * width + width, width, emb_dim)
        self.out = nn.Conv2d(width, 2, 1)

    def forward(self, x: torch.Tensor, sigma: torch.Tensor) -> torch.Tensor:
        """x is (B, 2, H, W); sigma is (B,) or scalar; returns the score."""
        if sigma.ndim == 0:
            sigma = sigma.expand(x.shape[0])
        emb = self.embed(sigma)
        h1 = self.enc1(x, emb)
        h2 = self.enc2(h1, emb)
        h3 = self.mid(h2, emb)
        h4 = self.dec1(torch.cat([h3, h1], dim=1), emb)
        raw = self.out(h4)
        return raw / sigma[:, None, None, None]
