"""Discretized variance-exploding noise ladder.

The reverse sampler walks a geometric ladder of noise standard deviations
sigma_0 = sigma_min < ... < sigma_{I-1} = sigma_max. Geometric spacing is
the standard discretization for variance-exploding diffusion and is pinned
here so runs are reproducible from the config alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class NoiseSchedule:
    """Noise ladder with ``n_steps`` levels plus the corrector SNR parameter.

    ``snr`` is the signal-to-noise ratio r used by the Langevin corrector
    step-size rule; it rides along here because sampler and schedule are
    always configured together.
    """

    n_steps: int
    sigma_min: float = 0.01
    sigma_max: float = 4.0
    snr: float = 0.075

    def __post_init__(self):
        if self.n_steps < 2:
            raise ValueError(f"schedule needs at least 2 steps, got {self.n_steps}")
        if not 0 < self.sigma_min < self.sigma_max:
            raise ValueError(f"need 0 < sigma_min < sigma_max, got ({self.sigma_min}, {self.sigma_max})")
        if self.snr <= 0:
            raise ValueError(f"corrector snr must be > 0, got {self.snr}")

    def sigma(self, i: int) -> float:
        """sigma_i = sigma_min * (sigma_max / sigma_min)^(i / (I - 1)) for 0 <= i <= I-1."""
        if not 0 <= i <= self.n_steps - 1:
            raise IndexError(f"step index {i} outside [0, {self.n_steps - 1}]")
        exponent = i / (self.n_steps - 1)
        return float(self.sigma_min * (self.sigma_max / self.sigma_min) ** exponent)

    def sigmas(self) -> np.ndarray:
        """The whole ladder as a float64 array of length ``n_steps``."""
        grid = np.arange(self.n_steps) / (self.n_steps - 1)
        return self.sigma_min * (self.sigma_max / self.sigma_min) ** grid
