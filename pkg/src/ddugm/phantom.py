"""Synthetic beating-ellipse dynamic phantom.

A desk-scale stand-in for dynamic acquisitions: a static arrangement of
soft-edged ellipses plus one "cardiac" ellipse whose axes swell and shrink
sinusoidally over the sequence (one beat per sequence). The oscillation is
cosine-phased, so frame t and frame T - t share a beat phase, and with zero
beat amplitude every frame is identical, giving the sequence exact temporal
rank one for the low-rank machinery to exploit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Ellipse:
    """One ellipse in normalized coordinates.

    Center and axes live in the [-1, 1] box (axes as fractions of the half
    side); angle is radians counter-clockwise; intensity is additive in
    [0, 1] (can be negative to carve holes).
    """

    cy: float
    cx: float
    ay: float
    ax: float
    angle: float = 0.0
    intensity: float = 1.0


DEFAULT_BACKGROUND = (
    Ellipse(0.0, 0.0, 0.88, 0.72, 0.0, 0.55),
    Ellipse(0.0, 0.0, 0.80, 0.64, 0.0, 0.15),
    Ellipse(-0.35, 0.35, 0.18, 0.14, 0.5, 0.22),
    Ellipse(0.42, -0.30, 0.14, 0.20, -0.4, -0.25),
    Ellipse(0.40, 0.38, 0.10, 0.10, 0.0, 0.18),
)

DEFAULT_BEATING = Ellipse(-0.05, -0.18, 0.30, 0.24, 0.3, 0.30)


@dataclass(frozen=True)
class PhantomSpec:
    """Dimensions, beat strength and optional static background texture."""

    frames: int = 8
    height: int = 64
    width: int = 64
    beat_amplitude: float = 0.15
    noise_std: float = 0.0
    seed: int = 0
    background: tuple[Ellipse, ...] = field(default_factory=lambda: DEFAULT_BACKGROUND)
    beating: Ellipse = DEFAULT_BEATING

    def __post_init__(self):
        if min(self.frames, self.height, self.width) < 1:
            raise ValueError("frames/height/width must all be >= 1")
        if not 0 <= self.beat_amplitude < 1:
            raise ValueError(f"beat amplitude must be in [0, 1), got {self.beat_amplitude}")
        if self.noise_std < 0:
            raise ValueError(f"noise std must be >= 0, got {self.noise_std}")


def make_phantom(spec: PhantomSpec) -> np.ndarray:
    """Render the phantom as a complex (T, H, W) tensor with zero imaginary part.

    The optional background texture is drawn once from the seed and shared
    by every frame, so it never adds temporal rank. Intensities are clipped
    to [0, 1].
    """
    ys = np.linspace(-1.0, 1.0, spec.height)
    xs = np.linspace(-1.0, 1.0, spec.width)
    grid_y, grid_x = np.meshgrid(ys, xs, indexing="ij")

    static = np.zeros((spec.height, spec.width))
    for e in spec.background:
        static += _render_ellipse(grid_y, grid_x, e, spec.height, spec.width)
    if spec.noise_std > 0:
        texture_rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(spec.seed)))
        static = static + spec.noise_std * texture_rng.standard_normal(static.shape)

    frames = np.empty((spec.frames, spec.height, spec.width))
    beat = spec.beating
    for t in range(spec.frames):
        scale = 1.0 + spec.beat_amplitude * np.cos(2.0 * np.pi * t / spec.frames)
        beating = Ellipse(beat.cy, beat.cx, beat.ay * scale, beat.ax * scale, beat.angle, beat.intensity)
        frames[t] = static + _render_ellipse(grid_y, grid_x, beating, spec.height, spec.width)

    return np.clip(frames, 0.0, 1.0).astype(np.complex128)


def _render_ellipse(grid_y, grid_x, e: Ellipse, height: int, width: int) -> np.ndarray:
    """Antialiased coverage of one ellipse times its intensity.

    Coverage ramps linearly over roughly one pixel across the boundary of
    the normalized ellipse distance, which keeps rendering deterministic and
    resolution-consistent without supersampling.
    """
    dy = grid_y - e.cy
    dx = grid_x - e.cx
    cos_a, sin_a = np.cos(e.angle), np.sin(e.angle)
    ry = (dy * cos_a - dx * sin_a) / e.ay
    rx = (dy * sin_a + dx * cos_a) / e.ax
    dist = np.sqrt(ry**2 + rx**2)
    # Edge width: one pixel expressed in normalized ellipse-distance units.
    pixel = 2.0 / min(height, width)
    edge = pixel / min(e.ay, e.ax)
    coverage = np.clip(0.5 + (1.0 - dist) / edge, 0.0, 1.0)
    return e.intensity * coverage
