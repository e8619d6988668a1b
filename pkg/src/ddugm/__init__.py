"""Dual-domain generative reconstruction of dynamic MR images.

The engine recovers a multi-frame complex image from undersampled k-space by
reverse variance-exploding diffusion with pluggable score providers in both
the (frequency-weighted) k-space and image domains, a temporal Hankel
low-rank projection across frames, weighted dual-domain fusion, and hard or
soft data consistency against the measurements.
"""

from .engine import ConvergenceLog, ReconConfig, ReconstructionError, reconstruct, zero_filled
from .hankel import HankelConfig, hankel_adjoint_avg, hankel_embed, lowrank_project, svd_hard_threshold
from .masks import MaskSpec, cartesian_mask, generate_mask, parse_mask_spec, radial_mask
from .metrics import MetricReport, compare, mse, psnr, psnr_l2, ssim
from .phantom import Ellipse, PhantomSpec, make_phantom
from .sampler import corrector, predictor, sample_prior
from .schedule import NoiseSchedule
from .scores import GaussianScore, RemoteScore, ZeroScore, fit_gaussian_score
from .tensors import acceleration, apply_mask, fft2c, ifft2c
from .weighting import build_weight, weight_apply, weight_remove

__all__ = [
    "ConvergenceLog",
    "Ellipse",
    "GaussianScore",
    "HankelConfig",
    "MaskSpec",
    "MetricReport",
    "NoiseSchedule",
    "PhantomSpec",
    "ReconConfig",
    "ReconstructionError",
    "RemoteScore",
    "ZeroScore",
    "acceleration",
    "apply_mask",
    "build_weight",
    "cartesian_mask",
    "compare",
    "corrector",
    "fft2c",
    "fit_gaussian_score",
    "generate_mask",
    "hankel_adjoint_avg",
    "hankel_embed",
    "ifft2c",
    "lowrank_project",
    "make_phantom",
    "mse",
    "parse_mask_spec",
    "predictor",
    "psnr",
    "psnr_l2",
    "radial_mask",
    "reconstruct",
    "sample_prior",
    "ssim",
    "svd_hard_threshold",
    "weight_apply",
    "weight_remove",
    "zero_filled",
]

__version__ = "0.1.0"
