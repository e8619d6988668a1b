import numpy as np
import numpy.testing as npt
import pytest

from ddugm.tensors import apply_mask
from ddugm.weighting import build_weight, weight_apply, weight_remove


def test_dc_value_is_clamped():
    w = build_weight(8, 8, p=2.0, q=0.7, floor=1e-3)
    assert w[4, 4] == pytest.approx(1e-3)


def test_corner_value_matches_formula():
    w = build_weight(8, 8, p=1.0, q=0.5, floor=1e-3)
    assert w[0, 0] == pytest.approx(np.sqrt(0.5), abs=1e-6)
    assert w[0, 0] == pytest.approx(0.70711, abs=1e-5)


def test_zero_exponent_gives_unit_weight():
    w = build_weight(6, 6, p=3.0, q=0.0, floor=1e-3)
    npt.assert_allclose(w, 1.0)


def test_radial_symmetry_even_dims():
    w = build_weight(8, 10, p=1.0, q=0.5, floor=1e-3)
    # reflecting ky -> 2*c - ky about the DC index leaves the weight unchanged
    for ky in range(1, 8):
        for kx in range(1, 10):
            assert w[ky, kx] == pytest.approx(w[8 - ky, kx], rel=1e-12)
            assert w[ky, kx] == pytest.approx(w[ky, 10 - kx], rel=1e-12)


def test_monotone_in_radial_frequency():
    w = build_weight(16, 16, p=1.0, q=0.5, floor=1e-3)
    center = w[8, 8:]
    assert (np.diff(center) >= 0).all()


def test_round_trip_exact_off_clamp(rng):
    v = rng.standard_normal((2, 8, 8)) + 1j * rng.standard_normal((2, 8, 8))
    w = build_weight(8, 8, p=1.0, q=0.5, floor=1e-3)
    raw = (1.0 * ((np.arange(8) - 4)[:, None] / 8) ** 2 + ((np.arange(8) - 4)[None, :] / 8) ** 2) ** 0.5
    unclamped = raw > 1e-3
    round_trip = weight_remove(weight_apply(v, w), w)
    npt.assert_array_equal(round_trip[:, unclamped], (v * w / w)[:, unclamped])
    npt.assert_allclose(round_trip, v, rtol=1e-6)


def test_unit_weight_is_identity(rng):
    v = rng.standard_normal((1, 4, 4)) + 1j * rng.standard_normal((1, 4, 4))
    w = build_weight(4, 4, p=1.0, q=0.0, floor=0.5)
    npt.assert_array_equal(weight_apply(v, w), v)
    npt.assert_array_equal(weight_remove(v, w), v)


def test_round_trip_relative_error_seeded(rng):
    v = rng.standard_normal((3, 16, 16)) + 1j * rng.standard_normal((3, 16, 16))
    w = build_weight(16, 16, p=1.0, q=0.5, floor=1e-3)
    back = weight_remove(weight_apply(v, w), w)
    rel = np.abs(back - v) / np.maximum(np.abs(v), 1e-300)
    assert rel.max() <= 1e-6


def test_commutes_with_mask(rng):
    v = rng.standard_normal((2, 8, 8)) + 1j * rng.standard_normal((2, 8, 8))
    w = build_weight(8, 8)
    mask = rng.random((2, 8, 8)) < 0.5
    mask[:, 0, 0] = True
    npt.assert_array_equal(apply_mask(weight_apply(v, w), mask), weight_apply(apply_mask(v, mask), w))


def test_parameter_validation():
    with pytest.raises(ValueError):
        build_weight(4, 4, p=0.0)
    with pytest.raises(ValueError):
        build_weight(4, 4, floor=0.0)
    with pytest.raises(ValueError):
        weight_apply(np.ones((2, 4, 4), complex), build_weight(4, 5))
