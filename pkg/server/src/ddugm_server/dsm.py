"""Denoising score matching objective for the variance-exploding process.

Perturbing a sample with Gaussian noise of std sigma gives a closed-form
conditional score -z / sigma, so the training loss is

    E[ sigma^2 * || s(x + sigma z, sigma) + z / sigma ||^2 ]

with the sigma^2 weighting making every noise level contribute at the same
scale (a zero model scores exactly the element count in expectation).
"""

from __future__ import annotations

import torch


def sample_sigmas(batch: int, sigma_min: float, sigma_max: float, generator: torch.Generator) -> torch.Tensor:
    """Log-uniform noise levels over [sigma_min, sigma_max]."""
    u = torch.rand(batch, generator=generator)
    return sigma_min * (sigma_max / sigma_min) ** u


def dsm_loss(
    score_fn,
    batch: torch.Tensor,
    sigmas: torch.Tensor,
    noise: torch.Tensor | None = None,
    generator: torch.Generator | None = None,
) -> torch.Tensor:
    """Mean over the batch of sigma^2 * ||s(x + sigma z, sigma) + z / sigma||^2.

    ``score_fn`` is any callable (perturbed, sigmas) -> score, so the exact
    oracle s = -z / sigma can stand in for a network. ``noise`` may be
    supplied for oracle checks; otherwise it is drawn from ``generator``.
    """
    if batch.ndim != 4:
        raise ValueError(f"expected (B, C, H, W) batch, got shape {tuple(batch.shape)}")
    if noise is None:
        noise = torch.randn(batch.shape, generator=generator, dtype=batch.dtype)
    sig = sigmas[:, None, None, None]
    perturbed = batch + sig * noise
    score = score_fn(perturbed, sigmas)
    residual = score + noise / sig
    sq_norms = (sig**2 * residual**2).flatten(1).sum(dim=1)
    loss = sq_norms.mean()
    if not torch.isfinite(loss):
        raise FloatingPointError(f"non-finite DSM loss: {loss.item()}")
    return loss
