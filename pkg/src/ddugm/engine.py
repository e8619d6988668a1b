"""Dual-domain reconstruction loop.

Runs the reverse-diffusion reconstruction: per outer noise level, each frame
takes a predictor step and corrector sweeps in both the weighted k-space
branch and the image branch, with data consistency enforced between phases;
the k-space branch is then projected through the temporal Hankel low-rank
constraint, the branches are fused into a single k-space iterate, and data
consistency is applied once more before the state is re-split for the next
level.

Everything is deterministic given the config: noise comes from counter-keyed
lanes (seed, branch, frame, step, sweep, phase), so frame order never
affects results.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, fields

import numpy as np

from . import rng as rng_mod
from .fusion import check_measurements, data_consistency, fuse
from .hankel import HankelConfig, default_window, lowrank_project
from .metrics import psnr
from .sampler import corrector, predictor, sample_prior
from .schedule import NoiseSchedule
from .scores import ScoreProtocolError, ScoreTransportError
from .tensors import apply_mask, as_dynamic, fft2c, ifft2c, validate_mask
from .weighting import build_weight, weight_apply, weight_remove

DOMAIN_MODES = ("dual", "kspace_only", "image_only")


class ReconstructionError(RuntimeError):
    """The engine aborted; the message carries step and frame context."""


@dataclass
class ReconConfig:
    """All reconstruction hyperparameters, JSON-round-trippable.

    ``hankel_window`` and ``hankel_rank`` may be left as None to resolve at
    runtime against the frame count (window = T // 2 + 1, rank clamped to
    the window). ``mu`` is the data-consistency weight; infinity means hard
    replacement of acquired coefficients.
    """

    n_steps: int = 1000
    n_corrector: int = 1
    sigma_min: float = 0.01
    sigma_max: float = 4.0
    snr: float = 0.075
    weight_p: float = 1.0
    weight_q: float = 0.5
    weight_floor: float = 1e-3
    hankel_window: int | None = None
    hankel_rank: int | None = None
    eta_kspace: float = 0.75
    eta_image: float = 0.25
    mu: float = math.inf
    seed: int = 0
    domain_mode: str = "dual"
    log_every: int = 10
    lowrank_every: int = 1

    def __post_init__(self):
        if self.n_steps < 2:
            raise ValueError(f"n_steps must be >= 2, got {self.n_steps}")
        if self.n_corrector < 0:
            raise ValueError(f"n_corrector must be >= 0, got {self.n_corrector}")
        if self.domain_mode not in DOMAIN_MODES:
            raise ValueError(f"domain_mode must be one of {DOMAIN_MODES}, got {self.domain_mode!r}")
        if abs(self.eta_kspace + self.eta_image - 1.0) > 1e-12:
            raise ValueError(f"fusion weights must sum to 1, got {self.eta_kspace} + {self.eta_image}")
        if min(self.eta_kspace, self.eta_image) < 0:
            raise ValueError("fusion weights must be non-negative")
        if self.mu <= 0:
            raise ValueError(f"mu must be in (0, inf], got {self.mu}")
        if self.log_every < 1 or self.lowrank_every < 1:
            raise ValueError("log_every and lowrank_every must be >= 1")
        # Schedule and weighting bounds are validated by their own builders.
        self.schedule()
        build_weight(2, 2, self.weight_p, self.weight_q, self.weight_floor)

    def schedule(self) -> NoiseSchedule:
        return NoiseSchedule(self.n_steps, self.sigma_min, self.sigma_max, self.snr)

    def hankel(self, frames: int) -> HankelConfig:
        window = self.hankel_window if self.hankel_window is not None else min(default_window(frames), frames)
        rank = self.hankel_rank if self.hankel_rank is not None else min(6, window)
        return HankelConfig(window=window, rank=rank)

    def effective_etas(self) -> tuple[float, float]:
        if self.domain_mode == "kspace_only":
            return 1.0, 0.0
        if self.domain_mode == "image_only":
            return 0.0, 1.0
        return self.eta_kspace, self.eta_image

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "mu" and math.isinf(value):
                value = "inf"
            out[f.name] = value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ReconConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(data)
        if isinstance(kwargs.get("mu"), str):
            if kwargs["mu"].lower() not in ("inf", "infinity"):
                raise ValueError(f"mu must be a number or 'inf', got {kwargs['mu']!r}")
            kwargs["mu"] = math.inf
        return cls(**kwargs)


@dataclass
class StepRecord:
    step: int
    sigma: float
    psnr: float | None
    dc_residual: float


@dataclass
class ConvergenceLog:
    """Per logged outer step: noise level, PSNR vs reference, DC residual."""

    records: list[StepRecord] = field(default_factory=list)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "sigma", "psnr", "dc_residual"])
            for r in self.records:
                psnr_cell = "" if r.psnr is None else ("inf" if math.isinf(r.psnr) else repr(r.psnr))
                writer.writerow([r.step, repr(r.sigma), psnr_cell, repr(r.dc_residual)])

    def psnr_series(self) -> list[float]:
        return [r.psnr for r in self.records if r.psnr is not None]


def zero_filled(b: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Inverse FFT of the zero-filled measurements: the no-prior baseline."""
    b = as_dynamic(b)
    mask = validate_mask(mask)
    return ifft2c(apply_mask(b, mask))


def reconstruct(
    b: np.ndarray,
    mask: np.ndarray,
    cfg: ReconConfig,
    k_score=None,
    i_score=None,
    reference: np.ndarray | None = None,
) -> tuple[np.ndarray, ConvergenceLog]:
    """Run the full reconstruction; returns the dynamic image and the log.

    ``b`` is the measured k-space, zero outside ``mask``. ``k_score`` scores
    weighted k-space frames and ``i_score`` scores image frames; each may be
    omitted when its branch is disabled by ``cfg.domain_mode``.
    """
    b = as_dynamic(b)
    mask = validate_mask(mask)
    if b.shape != mask.shape:
        raise ValueError(f"measurement shape {b.shape} does not match mask shape {mask.shape}")
    check_measurements(b, mask)
    if reference is not None:
        reference = as_dynamic(reference)

    use_k = cfg.domain_mode in ("dual", "kspace_only")
    use_i = cfg.domain_mode in ("dual", "image_only")
    if use_k and k_score is None:
        raise ValueError(f"domain_mode {cfg.domain_mode!r} needs a k-space score provider")
    if use_i and i_score is None:
        raise ValueError(f"domain_mode {cfg.domain_mode!r} needs an image score provider")
    _check_provider_domain(k_score, "kspace")
    _check_provider_domain(i_score, "image")

    n_frames, height, width = b.shape
    sched = cfg.schedule()
    weights = build_weight(height, width, cfg.weight_p, cfg.weight_q, cfg.weight_floor)
    hankel_cfg = cfg.hankel(n_frames)
    if hankel_cfg.window > n_frames:
        raise ValueError(f"hankel window {hankel_cfg.window} exceeds frame count {n_frames}")
    eta_k, eta_i = cfg.effective_etas()
    top = cfg.n_steps - 1

    v_w = np.zeros_like(b)
    u = np.zeros_like(b)
    for t in range(n_frames):
        if use_k:
            v_w[t] = sample_prior(
                (height, width), cfg.sigma_max, rng_mod.lane(cfg.seed, rng_mod.BRANCH_KSPACE, t, top, 0, rng_mod.PHASE_PRIOR)
            )
        if use_i:
            u[t] = sample_prior(
                (height, width), cfg.sigma_max, rng_mod.lane(cfg.seed, rng_mod.BRANCH_IMAGE, t, top, 0, rng_mod.PHASE_PRIOR)
            )

    log = ConvergenceLog()
    g = None
    for i in range(cfg.n_steps - 2, -1, -1):
        # Predictor from sigma_{i+1} down to sigma_i, per frame and branch.
        if use_k:
            v_w = _per_frame(predictor, v_w, k_score, i, sched, cfg.seed, rng_mod.BRANCH_KSPACE, 0, rng_mod.PHASE_PREDICTOR)
        if use_i:
            u = _per_frame(predictor, u, i_score, i, sched, cfg.seed, rng_mod.BRANCH_IMAGE, 0, rng_mod.PHASE_PREDICTOR)

        # Mid-step data consistency on the unweighted data.
        if use_k:
            v = data_consistency(weight_remove(v_w, weights), b, mask, cfg.mu)
            v_w = weight_apply(v, weights)
        if use_i:
            u = ifft2c(data_consistency(fft2c(u), b, mask, cfg.mu))

        # Langevin corrector sweeps at sigma_i.
        for j in range(1, cfg.n_corrector + 1):
            if use_k:
                v_w = _per_frame(corrector, v_w, k_score, i, sched, cfg.seed, rng_mod.BRANCH_KSPACE, j, rng_mod.PHASE_CORRECTOR)
            if use_i:
                u = _per_frame(corrector, u, i_score, i, sched, cfg.seed, rng_mod.BRANCH_IMAGE, j, rng_mod.PHASE_CORRECTOR)

        # Post-corrector consistency gives the branch estimates.
        v_star = data_consistency(weight_remove(v_w, weights), b, mask, cfg.mu) if use_k else None
        u_star = ifft2c(data_consistency(fft2c(u), b, mask, cfg.mu)) if use_i else None

        # Temporal low-rank projection couples the frames of the k-space branch.
        if use_k and i % cfg.lowrank_every == 0:
            try:
                v_star = lowrank_project(v_star, hankel_cfg)
            except np.linalg.LinAlgError as exc:
                raise ReconstructionError(f"low-rank projection failed at outer step {i}: {exc}") from exc

        if cfg.domain_mode == "kspace_only":
            g = v_star
        elif cfg.domain_mode == "image_only":
            g = fft2c(u_star)
        else:
            g = fuse(v_star, u_star, eta_k, eta_i)
        g = data_consistency(g, b, mask, cfg.mu)

        if not np.isfinite(g).all():
            raise ReconstructionError(f"non-finite state at outer step {i} (sigma={sched.sigma(i):.4g})")

        # Both branches restart from the fused, consistent iterate.
        if use_k:
            v_w = weight_apply(g, weights)
        image = ifft2c(g) if (use_i or i % cfg.log_every == 0) else None
        if use_i:
            u = image

        if i % cfg.log_every == 0:
            residual = float(np.linalg.norm(apply_mask(g, mask) - b))
            if math.isinf(cfg.mu) and residual != 0.0:
                raise ReconstructionError(f"data consistency violated at logged step {i}: residual {residual}")
            step_psnr = psnr(reference, image) if reference is not None else None
            log.records.append(StepRecord(step=i, sigma=sched.sigma(i), psnr=step_psnr, dc_residual=residual))

    return ifft2c(g), log


def _per_frame(step_fn, state, provider, i, sched, seed, branch, sweep, phase):
    out = np.empty_like(state)
    branch_name = "kspace" if branch == rng_mod.BRANCH_KSPACE else "image"
    phase_name = "corrector" if phase == rng_mod.PHASE_CORRECTOR else "predictor"
    for t in range(state.shape[0]):
        lane = rng_mod.lane(seed, branch, t, i, sweep, phase)
        try:
            out[t] = step_fn(state[t], provider, i, sched, lane)
        except (ScoreTransportError, ScoreProtocolError) as exc:
            raise ReconstructionError(f"score provider failed at step {i}, frame {t}, branch {branch_name}: {exc}") from exc
        if not np.isfinite(out[t]).all():
            raise ReconstructionError(f"non-finite {branch_name} state after {phase_name} at step {i}, frame {t}")
    return out


def _check_provider_domain(provider, expected: str) -> None:
    domain = getattr(provider, "domain", None)
    if domain is not None and domain != expected:
        raise ValueError(f"provider for the {expected} branch reports domain {domain!r}")
