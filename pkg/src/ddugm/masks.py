"""Undersampling mask generators: time-interleaved Cartesian and pseudo-radial.

Both patterns are generated deterministically from a :class:`MaskSpec`.
No autocalibration region is added; the requested acceleration is the
acceleration you get (exactly for Cartesian, within rasterization
tolerance for radial).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensors import validate_mask

# Sub-pixel step used when rasterizing radial spokes.
_SPOKE_STEP = 0.25


@dataclass(frozen=True)
class MaskSpec:
    """Parameters of an undersampling pattern.

    kind is "cartesian" or "radial"; acceleration is the requested R >= 1.
    seed is reserved for jittered radial variants and unused by default.
    """

    kind: str
    acceleration: float
    frames: int
    height: int
    width: int
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("cartesian", "radial"):
            raise ValueError(f"unknown mask kind {self.kind!r}")
        if self.acceleration < 1.0:
            raise ValueError(f"acceleration must be >= 1, got {self.acceleration}")
        if min(self.frames, self.height, self.width) < 1:
            raise ValueError("frames/height/width must all be >= 1")


def parse_mask_spec(text: str, frames: int, height: int, width: int, seed: int = 0) -> MaskSpec:
    """Parse the CLI string form ``cartesian:R=8`` / ``radial:R=10``."""
    try:
        kind, arg = text.split(":", 1)
        key, value = arg.split("=", 1)
    except ValueError:
        raise ValueError(f"mask spec {text!r} is not of the form kind:R=<value>") from None
    if key != "R":
        raise ValueError(f"mask spec {text!r}: only the R parameter is supported")
    return MaskSpec(kind=kind, acceleration=float(value), frames=frames, height=height, width=width, seed=seed)


def generate_mask(spec: MaskSpec) -> np.ndarray:
    """Dispatch on ``spec.kind``; returns a boolean (T, H, W) mask."""
    if spec.kind == "cartesian":
        return cartesian_mask(spec)
    return radial_mask(spec)


def cartesian_mask(spec: MaskSpec) -> np.ndarray:
    """Time-interleaved Cartesian pattern.

    Frame t keeps the full readout rows ky with ``(ky - t) % round(R) == 0``,
    so consecutive frames are cyclic row-shifts of each other and the union
    over round(R) consecutive frames covers every row.
    """
    if spec.kind != "cartesian":
        raise ValueError("cartesian_mask requires a cartesian spec")
    step = int(round(spec.acceleration))
    if step < 1:
        step = 1
    if step > spec.height:
        raise ValueError(
            f"acceleration {spec.acceleration} exceeds height {spec.height}; some frames would keep no rows"
        )
    ky = np.arange(spec.height)
    mask = np.zeros((spec.frames, spec.height, spec.width), dtype=bool)
    for t in range(spec.frames):
        rows = (ky - t) % step == 0
        mask[t, rows, :] = True
    return validate_mask(mask)


def radial_mask(spec: MaskSpec) -> np.ndarray:
    """Pseudo-radial pattern: uniformly spaced spokes rasterized on the grid.

    The spoke count S is picked by brute-force search over [1, H + W] so the
    kept fraction of a single frame is closest to 1/R. Frame t rotates the
    whole set by t * pi / (S * T) for temporal incoherence; S itself never
    varies across frames.
    """
    if spec.kind != "radial":
        raise ValueError("radial_mask requires a radial spec")
    h, w, t_frames = spec.height, spec.width, spec.frames
    target = 1.0 / spec.acceleration

    best_s, best_err = 1, np.inf
    for s in range(1, h + w + 1):
        frac = _rasterize_spokes(h, w, s, 0.0).mean()
        err = abs(frac - target)
        if err < best_err:
            best_s, best_err = s, err

    mask = np.zeros((t_frames, h, w), dtype=bool)
    for t in range(t_frames):
        theta0 = t * np.pi / (best_s * t_frames)
        mask[t] = _rasterize_spokes(h, w, best_s, theta0)
    return validate_mask(mask)


def _rasterize_spokes(height: int, width: int, n_spokes: int, theta0: float) -> np.ndarray:
    """Rasterize ``n_spokes`` center-crossing lines onto an (H, W) grid.

    Each spoke at angle theta walks from one grid edge to the other in
    sub-pixel steps through the center (H//2, W//2); every visited position
    rounds to its nearest pixel. Angles span [theta0, theta0 + pi).
    """
    frame = np.zeros((height, width), dtype=bool)
    cy, cx = height // 2, width // 2
    half_span = 0.5 * float(np.hypot(height, width))
    steps = np.arange(-half_span, half_span + _SPOKE_STEP, _SPOKE_STEP)
    for s in range(n_spokes):
        theta = theta0 + s * np.pi / n_spokes
        dy, dx = np.sin(theta), np.cos(theta)
        ys = np.rint(cy + steps * dy).astype(int)
        xs = np.rint(cx + steps * dx).astype(int)
        inside = (ys >= 0) & (ys < height) & (xs >= 0) & (xs < width)
        frame[ys[inside], xs[inside]] = True
    return frame
