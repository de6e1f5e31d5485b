import numpy as np
import pytest

from scemlib.chroma import color_invariance

from helpers import random_rgb


def test_divides_each_channel_by_its_peak():
    img = np.zeros((2, 2, 3))
    img[:, :, 0] = [[0.5, 0.25], [0.1, 0.0]]
    img[:, :, 1] = [[0.05, 0.25], [0.2, 0.1]]
    img[:, :, 2] = [[1.0, 0.5], [0.25, 0.0]]
    out = color_invariance(img)
    assert out[0, 0, 0] == pytest.approx(1.0)  # 0.5 / 0.5
    assert out[0, 0, 1] == pytest.approx(0.2)  # 0.05 / 0.25
    np.testing.assert_allclose(out[:, :, 2], img[:, :, 2])  # peak already 1


def test_global_scaling_cancels(rng):
    img = random_rgb(rng, 8, 8)
    for alpha in (0.25, 0.5, 2.0, 3.7):
        np.testing.assert_allclose(
            color_invariance(alpha * img), color_invariance(img), atol=1e-6
        )


def test_power_of_two_scaling_is_bit_exact(rng):
    img = random_rgb(rng, 6, 6)
    np.testing.assert_array_equal(color_invariance(2.0 * img), color_invariance(img))


def test_per_channel_scaling_also_cancels(rng):
    # stronger than the global claim, guaranteed by the implementation
    img = random_rgb(rng, 5, 5)
    scaled = img * np.array([0.3, 1.9, 0.7])
    np.testing.assert_allclose(color_invariance(scaled), color_invariance(img), atol=1e-6)


def test_black_image_maps_to_zero():
    out = color_invariance(np.zeros((4, 4, 3)))
    assert np.all(out == 0.0)


def test_zero_channel_stays_zero(rng):
    img = random_rgb(rng, 4, 4)
    img[:, :, 1] = 0.0
    out = color_invariance(img)
    assert np.all(out[:, :, 1] == 0.0)
    assert out[:, :, 0].max() == pytest.approx(1.0)


def test_idempotent(rng):
    img = random_rgb(rng, 7, 5)
    once = color_invariance(img)
    np.testing.assert_allclose(color_invariance(once), once, atol=1e-12)


def test_range_and_peaks(rng):
    out = color_invariance(random_rgb(rng, 9, 9))
    assert np.all(out >= 0.0) and np.all(out <= 1.0)
    for c in range(3):
        assert out[:, :, c].max() == pytest.approx(1.0)


def test_rejects_negative_values():
    with pytest.raises(ValueError):
        color_invariance(np.full((2, 2, 3), -0.1))
