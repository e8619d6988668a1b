"""Reconstruction quality metrics on magnitude images: MSE, PSNR, SSIM.

Complex inputs are reduced to magnitudes before any comparison, matching how
reconstructions are displayed and scored. Two PSNR variants are provided:

* :func:`psnr` (default) normalizes the error by the element count, i.e.
  uses the RMSE. This is the standard definition and the one consistent
  with typical reported dB ranges on unit-scaled images.
* :func:`psnr_l2` uses the raw l2 error norm without mean normalization.
  The two differ by exactly ``10 * log10(T * H * W)``.

PSNR of identical images is the ``math.inf`` sentinel (serialized as the
string ``"inf"``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import convolve2d

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _magnitude(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x)
    return np.abs(x) if np.iscomplexobj(x) else x.astype(np.float64)


def _check_pair(x_ori: np.ndarray, x_rec: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a, b = _magnitude(x_ori), _magnitude(x_rec)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def mse(x_ori: np.ndarray, x_rec: np.ndarray) -> float:
    """Mean squared magnitude error over all T*H*W elements."""
    a, b = _check_pair(x_ori, x_rec)
    return float(np.mean((a - b) ** 2))


def psnr(x_ori: np.ndarray, x_rec: np.ndarray) -> float:
    """20 * log10(peak / RMSE) in dB; ``inf`` when the images are identical."""
    a, b = _check_pair(x_ori, x_rec)
    peak = float(a.max())
    if peak <= 0:
        raise ValueError("reference image is all zero; peak is undefined")
    err = float(np.mean((a - b) ** 2))
    if err == 0.0:
        return math.inf
    return 20.0 * math.log10(peak / math.sqrt(err))


def psnr_l2(x_ori: np.ndarray, x_rec: np.ndarray) -> float:
    """PSNR with the un-normalized l2 error norm in place of the RMSE."""
    a, b = _check_pair(x_ori, x_rec)
    peak = float(a.max())
    if peak <= 0:
        raise ValueError("reference image is all zero; peak is undefined")
    err = float(np.linalg.norm(a - b))
    if err == 0.0:
        return math.inf
    return 20.0 * math.log10(peak / err)


def _gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    offsets = np.arange(size) - (size - 1) / 2
    g = np.exp(-(offsets**2) / (2.0 * sigma**2))
    kernel = np.outer(g, g)
    return kernel / kernel.sum()


def ssim(x_ori: np.ndarray, x_rec: np.ndarray) -> float:
    """Mean local structural similarity over frames.

    Local statistics are computed with an 11x11 Gaussian window (sigma 1.5)
    over the valid interior of each frame; both images share one dynamic
    range L (the larger of the two peaks, which is the reference peak in the
    usual case), and the usual stabilizers c1 = (0.01 L)^2, c2 = (0.03 L)^2
    apply. The shared L keeps the formula exactly symmetric in its
    arguments. Frames are averaged with equal weight.
    """
    a, b = _check_pair(x_ori, x_rec)
    if a.ndim == 2:
        a, b = a[None], b[None]
    if a.ndim != 3:
        raise ValueError(f"expected (T, H, W) or (H, W) images, got shape {a.shape}")
    if a.shape[-2] < SSIM_WINDOW or a.shape[-1] < SSIM_WINDOW:
        raise ValueError(f"frames {a.shape[-2:]} are smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window")
    peak = float(max(a.max(), b.max()))
    c1 = (SSIM_K1 * peak) ** 2
    c2 = (SSIM_K2 * peak) ** 2
    window = _gaussian_window()
    values = [_ssim_frame(a[t], b[t], window, c1, c2) for t in range(a.shape[0])]
    return float(np.mean(values))


def _ssim_frame(x: np.ndarray, y: np.ndarray, window: np.ndarray, c1: float, c2: float) -> float:
    mu_x = convolve2d(x, window, mode="valid")
    mu_y = convolve2d(y, window, mode="valid")
    var_x = convolve2d(x * x, window, mode="valid") - mu_x**2
    var_y = convolve2d(y * y, window, mode="valid") - mu_y**2
    cov = convolve2d(x * y, window, mode="valid") - mu_x * mu_y
    num = (2 * mu_x * mu_y + c1) * (2 * cov + c2)
    den = (mu_x**2 + mu_y**2 + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


@dataclass
class MetricReport:
    """Per-frame metric values plus their aggregates.

    ``psnr_db`` and ``mse`` aggregate over every element of the tensor;
    ``ssim`` is the across-frame mean. Per-frame PSNR shares the global
    reference peak so frames stay comparable.
    """

    psnr_db: float
    ssim: float
    mse: float
    per_frame_psnr: list[float] = field(default_factory=list)
    per_frame_ssim: list[float] = field(default_factory=list)
    per_frame_mse: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "psnr_db": _jsonable(self.psnr_db),
            "ssim": self.ssim,
            "mse": self.mse,
            "per_frame_psnr": [_jsonable(v) for v in self.per_frame_psnr],
            "per_frame_ssim": list(self.per_frame_ssim),
            "per_frame_mse": list(self.per_frame_mse),
        }


def _jsonable(value: float):
    return "inf" if math.isinf(value) else value


def compare(x_ori: np.ndarray, x_rec: np.ndarray) -> MetricReport:
    """Full metric report for a pair of (T, H, W) dynamic images."""
    a, b = _check_pair(x_ori, x_rec)
    if a.ndim == 2:
        a, b = a[None], b[None]
    peak = float(a.max())
    if peak <= 0:
        raise ValueError("reference image is all zero; peak is undefined")
    frame_mse = [float(np.mean((a[t] - b[t]) ** 2)) for t in range(a.shape[0])]
    frame_psnr = [math.inf if m == 0 else 20.0 * math.log10(peak / math.sqrt(m)) for m in frame_mse]
    window = _gaussian_window()
    ssim_range = float(max(a.max(), b.max()))
    c1 = (SSIM_K1 * ssim_range) ** 2
    c2 = (SSIM_K2 * ssim_range) ** 2
    frame_ssim = [_ssim_frame(a[t], b[t], window, c1, c2) for t in range(a.shape[0])]
    return MetricReport(
        psnr_db=psnr(a, b),
        ssim=float(np.mean(frame_ssim)),
        mse=float(np.mean(frame_mse)),
        per_frame_psnr=frame_psnr,
        per_frame_ssim=frame_ssim,
        per_frame_mse=frame_mse,
    )
