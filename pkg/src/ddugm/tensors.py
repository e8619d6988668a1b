"""Complex multi-frame tensors and the Fourier encoding operators.

Conventions used throughout the package:

* A dynamic tensor is a complex ``(T, H, W)`` ndarray, C-ordered, so frames
  are the slowest axis and each frame slices cheaply. Complex128 is the
  working precision; file I/O narrows to complex64.
* A sampling mask is a boolean ``(T, H, W)`` ndarray; ``True`` marks an
  acquired k-space location.
* All Fourier transforms are centered and orthonormal: the DC coefficient
  sits at index ``(H // 2, W // 2)`` of every frame and Parseval holds
  exactly (up to float rounding), so image and k-space magnitudes stay
  directly comparable.
"""

from __future__ import annotations

import numpy as np

_SPATIAL_AXES = (-2, -1)


def as_dynamic(data: np.ndarray) -> np.ndarray:
    """Validate and coerce ``data`` into a complex (T, H, W) dynamic tensor.

    Raises ``ValueError`` for wrong rank, empty dims, or non-finite values.
    """
    arr = np.asarray(data)
    if arr.ndim != 3:
        raise ValueError(f"dynamic tensor must be 3-D (T, H, W), got shape {arr.shape}")
    if min(arr.shape) < 1:
        raise ValueError(f"dynamic tensor dims must all be >= 1, got {arr.shape}")
    arr = np.ascontiguousarray(arr, dtype=np.complex128)
    require_finite(arr, "dynamic tensor")
    return arr


def require_finite(x: np.ndarray, what: str = "array") -> None:
    """Raise ``ValueError`` if ``x`` contains NaN or Inf."""
    if not np.isfinite(x).all():
        raise ValueError(f"{what} contains non-finite values")


def validate_mask(mask: np.ndarray) -> np.ndarray:
    """Validate a boolean (T, H, W) sampling mask.

    Every frame must keep at least one location, otherwise the acquisition
    it encodes is empty and the acceleration is undefined.
    """
    m = np.asarray(mask)
    if m.ndim != 3:
        raise ValueError(f"sampling mask must be 3-D (T, H, W), got shape {m.shape}")
    if m.dtype != np.bool_:
        m = m.astype(bool)
    kept_per_frame = m.reshape(m.shape[0], -1).sum(axis=1)
    if (kept_per_frame == 0).any():
        empty = int(np.argmin(kept_per_frame))
        raise ValueError(f"sampling mask keeps no locations in frame {empty}")
    return m


def acceleration(mask: np.ndarray) -> float:
    """Measured acceleration factor T*H*W / |kept|; always >= 1."""
    m = validate_mask(mask)
    return m.size / int(m.sum())


def fft2c(x: np.ndarray) -> np.ndarray:
    """Centered orthonormal 2-D FFT applied per frame (last two axes).

    ``ifftshift -> fft2(norm="ortho") -> fftshift`` places DC at
    ``(H // 2, W // 2)`` and preserves the l2 norm exactly.
    """
    x = np.asarray(x, dtype=np.complex128)
    return np.fft.fftshift(
        np.fft.fft2(np.fft.ifftshift(x, axes=_SPATIAL_AXES), axes=_SPATIAL_AXES, norm="ortho"),
        axes=_SPATIAL_AXES,
    )


def ifft2c(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`fft2c`; same centering and normalization."""
    v = np.asarray(v, dtype=np.complex128)
    return np.fft.fftshift(
        np.fft.ifft2(np.fft.ifftshift(v, axes=_SPATIAL_AXES), axes=_SPATIAL_AXES, norm="ortho"),
        axes=_SPATIAL_AXES,
    )


def apply_mask(v: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Zero-fill k-space outside the acquired set: ``v`` where kept, 0 elsewhere."""
    v = np.asarray(v, dtype=np.complex128)
    m = np.asarray(mask, dtype=bool)
    if v.shape != m.shape:
        raise ValueError(f"k-space shape {v.shape} does not match mask shape {m.shape}")
    return np.where(m, v, 0.0 + 0.0j)
