"""Noise schedule, forward diffusion, and deterministic implicit sampling.

A denoiser is any callable ``denoiser(x_t, condition, t) -> eps_hat``
that returns a predicted-noise raster shaped like ``x_t`` and is
deterministic for fixed inputs.  Three analytic implementations ship for
verification: :class:`OracleDenoiser` (knows the target image and
returns the exactly consistent noise), :class:`ZeroDenoiser`, and the
toy :class:`BlurDenoiser`.  Loading trained network weights is out of
scope; the interface is the extension point.

Timesteps are 1-based: ``t`` ranges over ``1..t_max`` and
``alpha_bar(t)`` is the product of the first ``t`` alphas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .imgcore import as_rgb, gaussian_smooth

__all__ = [
    "NoiseSchedule",
    "SamplerConfig",
    "linear_schedule",
    "forward_diffuse",
    "predict_x0",
    "sample_timesteps",
    "gaussian_noise",
    "ddim_sample",
    "OracleDenoiser",
    "ZeroDenoiser",
    "BlurDenoiser",
]


@dataclass(frozen=True)
class NoiseSchedule:
    """Per-timestep noise tables: betas, alphas = 1 - betas, and the
    running products alpha_bars (strictly decreasing)."""

    betas: np.ndarray
    alphas: np.ndarray
    alpha_bars: np.ndarray

    @property
    def t_max(self) -> int:
        return len(self.betas)

    def _check(self, t: int) -> int:
        t = int(t)
        if not 1 <= t <= self.t_max:
            raise ValueError(f"timestep {t} outside 1..{self.t_max}")
        return t

    def alpha_bar(self, t: int) -> float:
        return float(self.alpha_bars[self._check(t) - 1])


def linear_schedule(
    t_max: int = 1000, beta_start: float = 1e-4, beta_end: float = 2e-2
) -> NoiseSchedule:
    """Linearly interpolated betas, endpoints included."""
    if t_max < 1:
        raise ValueError("t_max must be at least 1")
    if not (0.0 < beta_start <= beta_end < 1.0):
        raise ValueError("betas must satisfy 0 < beta_start <= beta_end < 1")
    if t_max == 1:
        betas = np.array([beta_start], dtype=np.float64)
    else:
        betas = np.linspace(beta_start, beta_end, t_max, dtype=np.float64)
    alphas = 1.0 - betas
    return NoiseSchedule(betas=betas, alphas=alphas, alpha_bars=np.cumprod(alphas))


def forward_diffuse(x0, t: int, eps, sched: NoiseSchedule) -> np.ndarray:
    """Noised image at step t: sqrt(ab_t) * x0 + sqrt(1 - ab_t) * eps.

    The caller supplies ``eps`` (unit-variance Gaussian noise in
    training, or any test vector).
    """
    x0 = as_rgb(x0)
    eps = as_rgb(eps)
    if x0.shape != eps.shape:
        raise ValueError("x0 and eps must share dimensions")
    ab = sched.alpha_bar(t)
    return math.sqrt(ab) * x0 + math.sqrt(1.0 - ab) * eps


def predict_x0(x_t, eps_hat, t: int, sched: NoiseSchedule) -> np.ndarray:
    """Invert the forward formula: (x_t - sqrt(1 - ab_t) * eps) / sqrt(ab_t)."""
    x_t = as_rgb(x_t)
    eps_hat = as_rgb(eps_hat)
    if x_t.shape != eps_hat.shape:
        raise ValueError("x_t and eps_hat must share dimensions")
    ab = sched.alpha_bar(t)
    return (x_t - math.sqrt(1.0 - ab) * eps_hat) / math.sqrt(ab)


@dataclass(frozen=True)
class SamplerConfig:
    """Implicit-sampler controls: step count and the noise seed."""

    num_steps: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.num_steps < 1:
            raise ValueError("num_steps must be at least 1")


def sample_timesteps(t_max: int, num_steps: int) -> np.ndarray:
    """Descending, uniformly spaced timesteps.

    The chain starts at t_max (the initial noise is x_T) and, for two or
    more steps, always ends at 1.
    """
    if not 1 <= num_steps <= t_max:
        raise ValueError("num_steps must lie in 1..t_max")
    ts = np.unique(np.rint(np.linspace(t_max, 1, num_steps)).astype(np.int64))
    return ts[::-1]


def gaussian_noise(shape: tuple[int, ...], seed: int) -> np.ndarray:
    """Reproducible standard-normal raster (PCG64 stream keyed by seed)."""
    return np.random.default_rng(seed).standard_normal(shape)


def ddim_sample(
    denoiser,
    condition,
    config: SamplerConfig,
    sched: NoiseSchedule,
    init_noise,
) -> np.ndarray:
    """Deterministic implicit sampling (eta = 0) from pure noise.

    Walks the timestep subsequence from t_max down to 1; at each step the
    denoiser predicts the noise, the clean image is reconstructed in
    closed form, and the pair is recombined at the next (less noisy)
    timestep.  Returns the final clean-image estimate, clamped to [0, 1]
    once at the very end (per-step clamping would change the trajectory).
    """
    x = as_rgb(init_noise).copy()
    steps = sample_timesteps(sched.t_max, config.num_steps)
    x0_hat = x
    for k, t in enumerate(steps):
        eps_hat = as_rgb(denoiser(x, condition, int(t)))
        x0_hat = predict_x0(x, eps_hat, int(t), sched)
        if k + 1 < len(steps):
            ab_prev = sched.alpha_bar(int(steps[k + 1]))
            x = math.sqrt(ab_prev) * x0_hat + math.sqrt(1.0 - ab_prev) * eps_hat
    return np.clip(x0_hat, 0.0, 1.0)


class OracleDenoiser:
    """Returns the noise exactly consistent with a known target image.

    For any x_t, eps = (x_t - sqrt(ab_t) * target) / sqrt(1 - ab_t), so a
    single implicit step already lands on the target.
    """

    def __init__(self, target, sched: NoiseSchedule):
        self.target = as_rgb(target)
        self.sched = sched

    def __call__(self, x_t, condition, t: int) -> np.ndarray:
        x_t = as_rgb(x_t)
        ab = self.sched.alpha_bar(t)
        return (x_t - math.sqrt(ab) * self.target) / math.sqrt(1.0 - ab)


class ZeroDenoiser:
    """Predicts zero noise everywhere; the sampler then just rescales."""

    def __call__(self, x_t, condition, t: int) -> np.ndarray:
        return np.zeros_like(as_rgb(x_t))


class BlurDenoiser:
    """Toy linear denoiser: treats the high-pass residual as noise."""

    def __init__(self, sigma: float = 2.0):
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        self.sigma = sigma

    def __call__(self, x_t, condition, t: int) -> np.ndarray:
        x_t = as_rgb(x_t)
        out = np.empty_like(x_t)
        for c in range(3):
            out[:, :, c] = x_t[:, :, c] - gaussian_smooth(x_t[:, :, c], self.sigma)
        return out
