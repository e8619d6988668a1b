"""Dual-domain fusion and k-space data consistency.

Fusion forms the shared iterate from the two branch estimates as a convex
combination in k-space; data consistency then pins (or softly pulls) the
acquired coefficients back to the measurements.
"""

from __future__ import annotations

import math

import numpy as np

from .tensors import apply_mask, fft2c


def fuse(v_kspace: np.ndarray, u_image: np.ndarray, eta_kspace: float, eta_image: float) -> np.ndarray:
    """Weighted combination ``eta_kspace * v + eta_image * F(u)`` in k-space.

    A zero weight short-circuits its branch entirely, so the single-domain
    reductions (1, 0) and (0, 1) are bit-exact, not just close.
    """
    if eta_kspace < 0 or eta_image < 0:
        raise ValueError(f"fusion weights must be non-negative, got ({eta_kspace}, {eta_image})")
    v_kspace = np.asarray(v_kspace, dtype=np.complex128)
    u_image = np.asarray(u_image, dtype=np.complex128)
    if v_kspace.shape != u_image.shape:
        raise ValueError(f"branch shapes differ: {v_kspace.shape} vs {u_image.shape}")
    if eta_image == 0.0:
        return v_kspace if eta_kspace == 1.0 else eta_kspace * v_kspace
    if eta_kspace == 0.0:
        u_k = fft2c(u_image)
        return u_k if eta_image == 1.0 else eta_image * u_k
    return eta_kspace * v_kspace + eta_image * fft2c(u_image)


def data_consistency(
    g: np.ndarray,
    b: np.ndarray,
    mask: np.ndarray,
    mu: float = math.inf,
) -> np.ndarray:
    """Enforce agreement with the measurements ``b`` on the acquired set.

    Outside the mask ``g`` passes through. Inside, the coefficient becomes
    ``(g + mu * b) / (1 + mu)``; with ``mu = inf`` (the noiseless setting)
    that is exact replacement by ``b``.
    """
    g = np.asarray(g, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    m = np.asarray(mask, dtype=bool)
    if g.shape != b.shape or g.shape != m.shape:
        raise ValueError(f"shapes differ: g {g.shape}, b {b.shape}, mask {m.shape}")
    if mu <= 0:
        raise ValueError(f"consistency weight mu must be in (0, inf], got {mu}")
    if math.isinf(mu):
        return np.where(m, b, g)
    return np.where(m, (g + mu * b) / (1.0 + mu), g)


def check_measurements(b: np.ndarray, mask: np.ndarray) -> None:
    """Reject measurements with energy outside the acquired set."""
    if np.any(apply_mask(b, mask) != np.asarray(b, dtype=np.complex128)):
        raise ValueError("measurements must be zero outside the sampling mask")
