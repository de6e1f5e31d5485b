import math

import numpy as np
import pytest

from scemlib.diffusion import (
    BlurDenoiser,
    OracleDenoiser,
    SamplerConfig,
    ZeroDenoiser,
    ddim_sample,
    forward_diffuse,
    gaussian_noise,
    linear_schedule,
    predict_x0,
    sample_timesteps,
)

from helpers import random_rgb


# ---------------------------------------------------------------------------
# schedule

def test_single_step_schedule():
    sched = linear_schedule(1, 0.3, 0.3)
    assert sched.alpha_bar(1) == pytest.approx(0.7)


def test_constant_beta_closed_form():
    b = 0.01
    sched = linear_schedule(50, b, b)
    for t in (1, 10, 50):
        assert sched.alpha_bar(t) == pytest.approx((1 - b) ** t, rel=1e-12)


def test_default_schedule_products_and_monotonicity():
    sched = linear_schedule(1000, 1e-4, 2e-2)
    assert np.all(np.diff(sched.alpha_bars) < 0)
    assert sched.alpha_bar(1000) < 0.01
    # direct product evaluation oracle
    prod = 1.0
    for t in range(1, 1001):
        prod *= 1.0 - sched.betas[t - 1]
        assert sched.alpha_bar(t) == pytest.approx(prod, rel=1e-12)
    assert np.all(sched.betas > 0) and np.all(sched.betas < 1)


def test_schedule_complementary_split_is_exact():
    sched = linear_schedule(200)
    ab = sched.alpha_bars
    np.testing.assert_allclose(
        np.sqrt(ab) ** 2 + np.sqrt(1 - ab) ** 2, 1.0, rtol=1e-12
    )


def test_schedule_validation():
    with pytest.raises(ValueError):
        linear_schedule(0)
    with pytest.raises(ValueError):
        linear_schedule(10, 0.0, 0.1)
    with pytest.raises(ValueError):
        linear_schedule(10, 0.2, 0.1)
    sched = linear_schedule(10)
    with pytest.raises(ValueError):
        sched.alpha_bar(11)
    with pytest.raises(ValueError):
        sched.alpha_bar(0)


# ---------------------------------------------------------------------------
# forward process and its inverse

def test_forward_with_zero_noise_scales_image(rng):
    sched = linear_schedule(100)
    x0 = random_rgb(rng, 6, 6)
    out = forward_diffuse(x0, 40, np.zeros_like(x0), sched)
    np.testing.assert_allclose(out, math.sqrt(sched.alpha_bar(40)) * x0)


def test_forward_with_zero_image_scales_noise(rng):
    sched = linear_schedule(100)
    eps = rng.normal(0, 1, (6, 6, 3))
    out = forward_diffuse(np.zeros((6, 6, 3)), 70, eps, sched)
    np.testing.assert_allclose(out, math.sqrt(1 - sched.alpha_bar(70)) * eps)


def test_forward_rejects_out_of_range_timestep(rng):
    sched = linear_schedule(10)
    x = random_rgb(rng, 4, 4)
    with pytest.raises(ValueError):
        forward_diffuse(x, 11, x, sched)


def test_predict_x0_inverts_forward(rng):
    sched = linear_schedule(1000)
    for _ in range(10):
        x0 = random_rgb(rng, 5, 5)
        eps = rng.normal(0, 1, x0.shape)
        t = int(rng.integers(1, 1001))
        x_t = forward_diffuse(x0, t, eps, sched)
        np.testing.assert_allclose(predict_x0(x_t, eps, t, sched), x0, atol=1e-5)


def test_predict_x0_with_zero_epsilon(rng):
    sched = linear_schedule(100)
    x_t = random_rgb(rng, 4, 4)
    out = predict_x0(x_t, np.zeros_like(x_t), 25, sched)
    np.testing.assert_allclose(out, x_t / math.sqrt(sched.alpha_bar(25)))


# ---------------------------------------------------------------------------
# timestep subsequence

def test_sample_timesteps_endpoints_and_order():
    ts = sample_timesteps(1000, 100)
    assert ts[0] == 1000 and ts[-1] == 1
    assert len(ts) == 100
    assert np.all(np.diff(ts) < 0)


def test_sample_timesteps_full_and_single():
    assert np.array_equal(sample_timesteps(10, 10), np.arange(10, 0, -1))
    # a single step starts at t_max: the initial noise is x_T
    assert np.array_equal(sample_timesteps(10, 1), [10])
    with pytest.raises(ValueError):
        sample_timesteps(10, 11)


# ---------------------------------------------------------------------------
# implicit sampler

def _unrolled_zero_denoiser(init, sched, num_steps):
    """Step-by-step re-execution of the recursion with eps_hat = 0."""
    steps = sample_timesteps(sched.t_max, num_steps)
    x = init.copy()
    for k, t in enumerate(steps):
        x0_hat = x / math.sqrt(sched.alpha_bar(int(t)))
        if k + 1 < len(steps):
            x = math.sqrt(sched.alpha_bar(int(steps[k + 1]))) * x0_hat
    return np.clip(x0_hat, 0.0, 1.0)


def test_oracle_denoiser_recovers_target_from_any_noise(rng):
    sched = linear_schedule(1000)
    target = random_rgb(rng, 8, 8)
    denoiser = OracleDenoiser(target, sched)
    for seed in (0, 1, 2):
        init = gaussian_noise((8, 8, 3), seed)
        out = ddim_sample(denoiser, None, SamplerConfig(num_steps=100, seed=seed), sched, init)
        assert np.abs(out - target).max() <= 1e-4


@pytest.mark.parametrize("num_steps", [10, 50, 100])
def test_oracle_convergence_step_count_invariance(rng, num_steps):
    sched = linear_schedule(1000)
    target = random_rgb(rng, 6, 6)
    init = gaussian_noise((6, 6, 3), 3)
    out = ddim_sample(
        OracleDenoiser(target, sched), None, SamplerConfig(num_steps=num_steps), sched, init
    )
    assert np.abs(out - target).max() <= 1e-4


def test_oracle_full_chain_matches_hundred_steps(rng):
    sched = linear_schedule(200)
    target = random_rgb(rng, 6, 6)
    init = gaussian_noise((6, 6, 3), 11)
    a = ddim_sample(OracleDenoiser(target, sched), None, SamplerConfig(num_steps=200), sched, init)
    b = ddim_sample(OracleDenoiser(target, sched), None, SamplerConfig(num_steps=100), sched, init)
    assert np.abs(a - b).max() <= 1e-4


def test_zero_denoiser_matches_unrolled_recursion():
    sched = linear_schedule(1000)
    init = gaussian_noise((6, 6, 3), 5)
    out = ddim_sample(ZeroDenoiser(), None, SamplerConfig(num_steps=100), sched, init)
    np.testing.assert_allclose(out, _unrolled_zero_denoiser(init, sched, 100), atol=1e-5)
    # collapsed closed form: the recursion telescopes to init / sqrt(ab_T)
    closed = np.clip(init / math.sqrt(sched.alpha_bar(1000)), 0.0, 1.0)
    np.testing.assert_allclose(out, closed, atol=1e-5)


def test_sampler_is_bit_deterministic(rng):
    sched = linear_schedule(500)
    target = random_rgb(rng, 5, 5)
    config = SamplerConfig(num_steps=50, seed=9)
    init = gaussian_noise((5, 5, 3), config.seed)
    a = ddim_sample(OracleDenoiser(target, sched), None, config, sched, init)
    b = ddim_sample(OracleDenoiser(target, sched), None, config, sched, init)
    np.testing.assert_array_equal(a, b)


def test_gaussian_noise_reproducible():
    a = gaussian_noise((4, 4, 3), 42)
    b = gaussian_noise((4, 4, 3), 42)
    c = gaussian_noise((4, 4, 3), 43)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_blur_denoiser_contract(rng):
    x = random_rgb(rng, 8, 8)
    d = BlurDenoiser(sigma=1.5)
    out = d(x, None, 10)
    assert out.shape == x.shape
    np.testing.assert_array_equal(out, d(x, None, 10))
    # residual of a constant image is exactly zero
    assert np.all(d(np.full((6, 6, 3), 0.4), None, 1) == 0.0)


def test_sampler_output_is_clamped():
    sched = linear_schedule(100)
    init = 10.0 * gaussian_noise((4, 4, 3), 0)
    out = ddim_sample(ZeroDenoiser(), None, SamplerConfig(num_steps=10), sched, init)
    assert np.all(out >= 0.0) and np.all(out <= 1.0)


def test_sampler_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(num_steps=0)
