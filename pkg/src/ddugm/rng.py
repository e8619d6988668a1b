"""Counter-keyed deterministic random streams.

Every noise draw in the engine comes from a lane: a Philox generator keyed
by the run seed plus a small integer tuple (branch, frame, step, sweep,
phase). Identical keys give identical draws on every platform and distinct
keys give statistically independent streams, so frames can be processed in
any order, or concurrently, without changing results.
"""

from __future__ import annotations

import numpy as np

# Phase codes used by the engine when keying lanes.
PHASE_PREDICTOR = 0
PHASE_CORRECTOR = 1
PHASE_PRIOR = 2

# Branch codes.
BRANCH_KSPACE = 0
BRANCH_IMAGE = 1


def lane(seed: int, *key: int) -> np.random.Generator:
    """A fresh generator for (seed, key); same arguments, same stream."""
    if any(k < 0 for k in key):
        raise ValueError(f"lane key must be non-negative integers, got {key}")
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def complex_normal(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """Complex noise with independent N(0, 1) real and imaginary parts.

    The real plane is drawn before the imaginary plane; the score wire
    protocol uses the same channel order.
    """
    parts = rng.standard_normal((2,) + tuple(shape))
    return parts[0] + 1j * parts[1]
