"""Predictor-corrector steps for reverse variance-exploding sampling.

One predictor step discretizes the reverse-time SDE between adjacent noise
levels; one corrector sweep is an annealed Langevin refinement at a fixed
level. Both are domain-agnostic: they act on complex frames and only talk
to the score provider and a random lane. All randomness is injected through
the ``rng`` argument so callers control determinism.
"""

from __future__ import annotations

import numpy as np

from .rng import complex_normal
from .schedule import NoiseSchedule

# Below this score norm the corrector step size blows up; treat as a no-op.
_ZERO_SCORE_NORM = 1e-12


def sample_prior(shape: tuple[int, ...], sigma_max: float, rng: np.random.Generator) -> np.ndarray:
    """Draw the starting iterate: i.i.d. complex Gaussian, per-component std sigma_max."""
    return sigma_max * complex_normal(rng, shape)


def predictor(
    x: np.ndarray,
    score_fn,
    i: int,
    schedule: NoiseSchedule,
    rng: np.random.Generator,
) -> np.ndarray:
    """Reverse-SDE step from noise level sigma_{i+1} down to sigma_i.

    x_i = x_{i+1} + (sigma_{i+1}^2 - sigma_i^2) * s(x_{i+1}, sigma_{i+1})
          + sqrt(sigma_{i+1}^2 - sigma_i^2) * z

    valid for 0 <= i <= I-2; z has independent N(0,1) real/imaginary parts.
    """
    if not 0 <= i <= schedule.n_steps - 2:
        raise IndexError(f"predictor step index {i} outside [0, {schedule.n_steps - 2}]")
    x = np.asarray(x, dtype=np.complex128)
    sigma_hi = schedule.sigma(i + 1)
    sigma_lo = schedule.sigma(i)
    gap = sigma_hi**2 - sigma_lo**2
    z = complex_normal(rng, x.shape)
    return x + gap * score_fn(x, sigma_hi) + np.sqrt(gap) * z


def corrector(
    x: np.ndarray,
    score_fn,
    i: int,
    schedule: NoiseSchedule,
    rng: np.random.Generator,
) -> np.ndarray:
    """One Langevin sweep at noise level sigma_i.

    The step size follows the SNR rule eps = 2 * (r * ||z|| / ||g||)^2 with
    g the score at sigma_i, then x <- x + eps * g + sqrt(2 eps) * z. A
    vanishing score norm would make eps unbounded, so that case returns x
    unchanged.
    """
    if not 0 <= i <= schedule.n_steps - 1:
        raise IndexError(f"corrector step index {i} outside [0, {schedule.n_steps - 1}]")
    x = np.asarray(x, dtype=np.complex128)
    sigma = schedule.sigma(i)
    z = complex_normal(rng, x.shape)
    g = score_fn(x, sigma)
    g_norm = float(np.linalg.norm(g))
    if g_norm < _ZERO_SCORE_NORM:
        return x
    z_norm = float(np.linalg.norm(z))
    eps = 2.0 * (schedule.snr * z_norm / g_norm) ** 2
    return x + eps * g + np.sqrt(2.0 * eps) * z
