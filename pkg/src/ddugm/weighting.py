"""K-space frequency weighting.

The weight grows with radial spatial frequency, so multiplying k-space by it
suppresses the dominant low-frequency energy and hands the score model a
sparser, better conditioned input. The raw weight is zero at DC, which would
make the inverse operation undefined, so values are clamped from below and
the clamp makes the multiply/divide round trip exact everywhere outside the
clamped disc.
"""

from __future__ import annotations

import numpy as np


def build_weight(height: int, width: int, p: float = 1.0, q: float = 0.5, floor: float = 1e-3) -> np.ndarray:
    """Build the (H, W) real weight matrix ``max(floor, (p * (fy^2 + fx^2))^q)``.

    fy, fx are centered frequencies normalized by the line counts, i.e.
    ``fy = (ky - H//2) / H`` in [-0.5, 0.5), matching the DC convention of
    :func:`ddugm.tensors.fft2c`. p scales, q shapes, and ``floor`` > 0 keeps
    division safe at and near DC.
    """
    if p <= 0:
        raise ValueError(f"weight scale p must be > 0, got {p}")
    if floor <= 0:
        raise ValueError(f"weight floor must be > 0, got {floor}")
    fy = (np.arange(height) - height // 2) / height
    fx = (np.arange(width) - width // 2) / width
    radius_sq = fy[:, None] ** 2 + fx[None, :] ** 2
    values = (p * radius_sq) ** q
    return np.maximum(floor, values)


def weight_apply(v: np.ndarray, weight: np.ndarray) -> np.ndarray:
    """Multiply each k-space frame elementwise by the weight."""
    v = np.asarray(v)
    _check_dims(v, weight)
    return v * weight


def weight_remove(v_weighted: np.ndarray, weight: np.ndarray) -> np.ndarray:
    """Divide each k-space frame elementwise by the weight (floor keeps this finite)."""
    v_weighted = np.asarray(v_weighted)
    _check_dims(v_weighted, weight)
    return v_weighted / weight


def _check_dims(v: np.ndarray, weight: np.ndarray) -> None:
    if v.shape[-2:] != weight.shape:
        raise ValueError(f"k-space spatial dims {v.shape[-2:]} do not match weight shape {weight.shape}")
