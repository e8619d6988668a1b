import numpy as np
import numpy.testing as npt
import pytest

from ddugm.rng import complex_normal, lane
from ddugm.sampler import corrector, predictor, sample_prior
from ddugm.schedule import NoiseSchedule
from ddugm.scores import GaussianScore, ZeroScore


class _ZeroNoise:
    """Stand-in rng lane forcing z = 0."""

    def standard_normal(self, shape):
        return np.zeros(shape)


class _FixedNoise:
    def __init__(self, z):
        self._z = z  # complex frame to inject

    def standard_normal(self, shape):
        return np.stack([self._z.real, self._z.imag])


def test_predictor_zero_score_zero_noise_is_identity(rng):
    sched = NoiseSchedule(n_steps=8)
    x = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    for i in range(sched.n_steps - 1):
        npt.assert_array_equal(predictor(x, ZeroScore(), i, sched, _ZeroNoise()), x)


def test_predictor_constant_score_shift():
    # adjacent levels sigma_0 = 1, sigma_1 = 2 -> gap 3; s = 0.5 -> +1.5 shift
    sched = NoiseSchedule(n_steps=2, sigma_min=1.0, sigma_max=2.0)
    x = np.full((4, 4), 1.0 - 2.0j)
    shifted = predictor(x, lambda x_, s_: np.full_like(x_, 0.5 + 0.0j), 0, sched, _ZeroNoise())
    npt.assert_allclose(shifted, x + 1.5, rtol=1e-15)


def test_predictor_index_bounds():
    sched = NoiseSchedule(n_steps=4)
    x = np.zeros((2, 2), dtype=complex)
    with pytest.raises(IndexError):
        predictor(x, ZeroScore(), 3, sched, _ZeroNoise())
    with pytest.raises(IndexError):
        predictor(x, ZeroScore(), -1, sched, _ZeroNoise())


def test_predictor_chain_contracts_with_gaussian_score(rng):
    tau = 0.5
    sched = NoiseSchedule(n_steps=32, sigma_min=0.05, sigma_max=3.0)
    score = GaussianScore(0.0, tau)
    x = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    norms = [np.linalg.norm(x)]
    for i in range(sched.n_steps - 2, -1, -1):
        sigma_hi = sched.sigma(i + 1)
        gap = sigma_hi**2 - sched.sigma(i) ** 2
        factor = 1.0 - gap / (tau**2 + sigma_hi**2)
        expected = np.linalg.norm(x) * factor
        x = predictor(x, score, i, sched, _ZeroNoise())
        # closed-form linear recursion: norm shrinks by exactly (1 - gap / (tau^2 + sigma^2))
        assert np.linalg.norm(x) == pytest.approx(expected, rel=1e-12)
        norms.append(np.linalg.norm(x))
    assert all(b < a for a, b in zip(norms, norms[1:]))


def test_corrector_zero_score_is_noop(rng):
    sched = NoiseSchedule(n_steps=8)
    x = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    npt.assert_array_equal(corrector(x, ZeroScore(), 3, sched, lane(7, 0)), x)


def test_corrector_step_size_scalar_sanity(rng):
    # force ||z|| == ||g||: the score returns the injected noise itself
    sched = NoiseSchedule(n_steps=8, snr=0.075)
    z = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    x = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    eps = 2 * 0.075**2
    assert eps == pytest.approx(0.01125)
    out = corrector(x, lambda x_, s_: z, 2, sched, _FixedNoise(z))
    npt.assert_allclose(out, x + eps * z + np.sqrt(2 * eps) * z, rtol=1e-12)


def test_corrector_stationary_mean_monte_carlo():
    # 500 seeded runs of repeated corrector sweeps; pooled mean stays within
    # 3 standard errors of the prior mean (per component).
    mean = 0.4 - 0.2j
    tau, i = 0.3, 5
    sched = NoiseSchedule(n_steps=16, sigma_min=0.05, sigma_max=1.0, snr=0.075)
    sigma = sched.sigma(i)
    score = GaussianScore(mean, tau)
    total_std = np.sqrt(tau**2 + sigma**2)
    samples = []
    for run in range(500):
        init_rng = lane(99, run, 0)
        x = mean + total_std * complex_normal(init_rng, (4, 4))
        for sweep in range(1, 21):
            x = corrector(x, score, i, sched, lane(99, run, sweep))
        samples.append(x)
    pooled = np.concatenate([s.ravel() for s in samples])
    for component, target in ((pooled.real, mean.real), (pooled.imag, mean.imag)):
        se = component.std(ddof=1) / np.sqrt(component.size)
        assert abs(component.mean() - target) <= 3 * se


def test_sample_prior_statistics():
    draw = sample_prior((128, 128), sigma_max=4.0, rng=lane(5, 1))
    assert draw.real.std() == pytest.approx(4.0, rel=0.05)
    assert draw.imag.std() == pytest.approx(4.0, rel=0.05)
    bound = 3 * 4.0 / np.sqrt(128 * 128)
    assert abs(draw.real.mean()) <= bound
    assert abs(draw.imag.mean()) <= bound


def test_sample_prior_deterministic():
    a = sample_prior((16, 16), 2.0, lane(11, 3))
    b = sample_prior((16, 16), 2.0, lane(11, 3))
    npt.assert_array_equal(a, b)
    c = sample_prior((16, 16), 2.0, lane(11, 4))
    assert not np.array_equal(a, c)


def test_lane_independence_and_reproducibility():
    assert np.array_equal(lane(1, 2, 3).standard_normal(8), lane(1, 2, 3).standard_normal(8))
    assert not np.array_equal(lane(1, 2, 3).standard_normal(8), lane(1, 2, 4).standard_normal(8))
    with pytest.raises(ValueError):
        lane(1, -2)


def test_complex_normal_channel_order():
    parts = lane(3, 1).standard_normal((2, 4, 4))
    z = complex_normal(lane(3, 1), (4, 4))
    npt.assert_array_equal(z.real, parts[0])
    npt.assert_array_equal(z.imag, parts[1])
