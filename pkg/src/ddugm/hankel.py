"""Temporal Hankel embedding and hard-threshold SVD rank projection.

Each k-space voxel's temporal signal s_0 .. s_{T-1} is arranged into an
L x w Hankel block (L = T - w + 1) whose anti-diagonals are constant; the
blocks of all voxels are stacked voxel-major into one tall matrix. Truncating
its SVD to rank ``a`` and averaging the anti-diagonals back out is the
low-rank projection that couples frames in the reconstruction loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class HankelConfig:
    """Temporal window length and retained rank for the projection."""

    window: int
    rank: int

    def __post_init__(self):
        if self.window < 2:
            raise ValueError(f"hankel window must be >= 2, got {self.window}")
        if not 1 <= self.rank <= self.window:
            raise ValueError(f"hankel rank must be in [1, window={self.window}], got {self.rank}")


def default_window(frames: int) -> int:
    """Default temporal window: floor(T / 2) + 1 (9 for a 16-frame sequence)."""
    return frames // 2 + 1


def hankel_embed(v: np.ndarray, window: int) -> np.ndarray:
    """Embed a (T, H, W) tensor into the stacked ((H*W)*L, window) Hankel matrix.

    Row block ``voxel * L + l`` holds samples ``s_l .. s_{l+window-1}`` of
    that voxel's temporal signal; voxels are ordered row-major over (ky, kx).
    """
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 3:
        raise ValueError(f"expected (T, H, W) tensor, got shape {v.shape}")
    t, h, w = v.shape
    if window > t:
        raise ValueError(f"hankel window {window} exceeds frame count {t}")
    if window < 1:
        raise ValueError(f"hankel window must be >= 1, got {window}")
    signals = np.ascontiguousarray(v.reshape(t, h * w).T)  # (voxels, T)
    blocks = np.lib.stride_tricks.sliding_window_view(signals, window, axis=1)  # (voxels, L, w)
    return blocks.reshape(-1, window).copy()


def hankel_adjoint_avg(matrix: np.ndarray, window: int, dims: tuple[int, int, int]) -> np.ndarray:
    """Map an embedded matrix back to (T, H, W) by anti-diagonal averaging.

    For each voxel block, time sample t is the mean of every entry (l, c)
    with l + c = t. On a true Hankel block the anti-diagonals are constant,
    so this is an exact left inverse of :func:`hankel_embed`; otherwise it
    is the least-squares fit of a Hankel-consistent signal.
    """
    t, h, w = dims
    length = t - window + 1
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.shape != (h * w * length, window):
        raise ValueError(f"embedded matrix shape {matrix.shape} does not match dims {dims} with window {window}")
    blocks = matrix.reshape(h * w, length, window)
    # Average each anti-diagonal as base + mean deviation so a constant
    # anti-diagonal returns its value bitwise (deviations are exactly zero).
    base = np.empty((h * w, t), dtype=np.complex128)
    base[:, :length] = blocks[:, :, 0]
    base[:, length:] = blocks[:, length - 1, 1:]
    deviations = np.zeros((h * w, t), dtype=np.complex128)
    counts = np.zeros(t)
    for c in range(window):
        deviations[:, c : c + length] += blocks[:, :, c] - base[:, c : c + length]
        counts[c : c + length] += 1
    signals = base + deviations / counts
    return signals.T.reshape(t, h, w)


def svd_hard_threshold(matrix: np.ndarray, rank: int) -> np.ndarray:
    """Best Frobenius rank-``rank`` approximation via truncated SVD.

    Singular values beyond the ``rank`` largest are zeroed; by the
    Eckart-Young theorem the result minimizes the Frobenius error among all
    matrices of rank at most ``rank``.
    """
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {matrix.shape}")
    if not 1 <= rank <= min(matrix.shape):
        raise ValueError(f"rank {rank} outside [1, {min(matrix.shape)}]")
    u, s, vh = np.linalg.svd(matrix, full_matrices=False)
    u, vh = _canonical_sign(u, vh)
    k = rank
    return (u[:, :k] * s[:k]) @ vh[:k, :]


def lowrank_project(v: np.ndarray, cfg: HankelConfig) -> np.ndarray:
    """Embed, hard-threshold the SVD, and average back: the full projection."""
    v = np.asarray(v, dtype=np.complex128)
    embedded = hankel_embed(v, cfg.window)
    truncated = svd_hard_threshold(embedded, cfg.rank)
    return hankel_adjoint_avg(truncated, cfg.window, v.shape)


def _canonical_sign(u: np.ndarray, vh: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rotate each singular pair so u's largest-magnitude entry is real-positive.

    The recomposition u @ diag(s) @ vh is unchanged; the convention just
    makes the factors themselves bit-reproducible across runs.
    """
    idx = np.argmax(np.abs(u), axis=0)
    pivots = u[idx, np.arange(u.shape[1])]
    mags = np.abs(pivots)
    phases = np.where(mags > 0, pivots / np.where(mags > 0, mags, 1.0), 1.0)
    return u / phases[None, :], vh * phases[:, None]
