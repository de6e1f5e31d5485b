"""Training-loss terms and reference image-quality metrics.

Five loss terms (noise MSE, grayscale alignment, chromatic angle,
structural similarity, deep-feature distance) plus PSNR/SSIM.  The
feature extractor is pluggable: any deterministic callable mapping an
RGB image to a fixed list of feature rasters.  A multi-scale
difference-of-Gaussians stub ships for tests; learned extractors are out
of scope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from .imgcore import as_rgb, gaussian_smooth

__all__ = [
    "GRAY_WEIGHTS",
    "LossWeights",
    "LossReport",
    "IdentityExtractor",
    "MultiScaleDogExtractor",
    "grayscale",
    "loss_simple",
    "loss_illum",
    "loss_chrom",
    "loss_ssim",
    "loss_feat",
    "loss_total",
    "psnr",
    "ssim_metric",
]

# luma coefficients for grayscale conversion
GRAY_WEIGHTS = (0.299, 0.587, 0.114)

# SSIM constants: 11x11 Gaussian window, sigma 1.5, stabilizers on [0,1] range
_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_SSIM_C1 = 0.01**2
_SSIM_C2 = 0.03**2

# pixels with an RGB norm below this contribute nothing to the chroma loss
_CHROM_NORM_FLOOR = 1e-8


@dataclass(frozen=True)
class LossWeights:
    """Non-negative weights of the four auxiliary terms."""

    w_illum: float = 1.0
    w_chrom: float = 1.0
    w_ssim: float = 1.0
    w_feat: float = 1.0

    def __post_init__(self):
        for name in ("w_illum", "w_chrom", "w_ssim", "w_feat"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class LossReport:
    """Per-term loss values and their weighted total."""

    simple: float
    illum: float
    chrom: float
    ssim: float
    feat: float
    total: float


def _check_pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = as_rgb(a)
    b = as_rgb(b)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def grayscale(img) -> np.ndarray:
    """Luma-weighted grayscale conversion (weights sum to 1)."""
    img = as_rgb(img)
    w = np.array(GRAY_WEIGHTS)
    return img @ w


def loss_simple(eps_true, eps_pred) -> float:
    """Mean squared error between true and predicted noise.

    Parameters
    ----------
    eps_true, eps_pred : ndarray
      Noise rasters of identical shape.

    Returns
    -------
    float
      Squared error averaged over all elements.
    """
    a, b = _check_pair(eps_true, eps_pred)
    return float(np.mean((a - b) ** 2))


def loss_illum(x_hat, x_ref) -> float:
    """Mean absolute difference of the grayscale conversions."""
    a, b = _check_pair(x_hat, x_ref)
    return float(np.mean(np.abs(grayscale(a) - grayscale(b))))


def loss_chrom(x_hat, x_ref) -> float:
    """Summed angular mismatch of per-pixel RGB vectors.

    Each pixel contributes 1 - cos(angle between the two RGB vectors);
    pixels where either vector is (near) zero contribute 0.  The result
    is a sum over pixels, so it scales with resolution.
    """
    a, b = _check_pair(x_hat, x_ref)
    dot = np.sum(a * b, axis=2)
    na = np.linalg.norm(a, axis=2)
    nb = np.linalg.norm(b, axis=2)
    valid = (na >= _CHROM_NORM_FLOOR) & (nb >= _CHROM_NORM_FLOOR)
    # rounding can push the ratio past 1; clamp so contributions stay >= 0
    cos = np.clip(dot[valid] / (na[valid] * nb[valid]), -1.0, 1.0)
    return float(np.sum(1.0 - cos))


def _ssim_window() -> np.ndarray:
    half = (_SSIM_WINDOW - 1) / 2.0
    x = np.arange(_SSIM_WINDOW) - half
    g = np.exp(-0.5 * (x / _SSIM_SIGMA) ** 2)
    w = np.outer(g, g)
    return w / w.sum()


def _ssim_plane(a: np.ndarray, b: np.ndarray) -> float:
    win = _ssim_window()
    mu_a = convolve2d(a, win, mode="valid")
    mu_b = convolve2d(b, win, mode="valid")
    var_a = convolve2d(a * a, win, mode="valid") - mu_a**2
    var_b = convolve2d(b * b, win, mode="valid") - mu_b**2
    cov = convolve2d(a * b, win, mode="valid") - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + _SSIM_C1) * (2.0 * cov + _SSIM_C2)
    den = (mu_a**2 + mu_b**2 + _SSIM_C1) * (var_a + var_b + _SSIM_C2)
    return float(np.mean(num / den))


def loss_ssim(x_hat, x_ref) -> float:
    """1 - mean SSIM over sliding windows, averaged across channels.

    Uses the standard 11x11 Gaussian window (sigma 1.5) with stabilizers
    c1 = 0.01^2, c2 = 0.03^2 for the [0, 1] range; only full windows
    count.  SSIM can go negative, so the value lies in [0, 2].
    """
    a, b = _check_pair(x_hat, x_ref)
    if min(a.shape[0], a.shape[1]) < _SSIM_WINDOW:
        raise ValueError(
            f"image must be at least {_SSIM_WINDOW} pixels in each dimension"
        )
    mean_ssim = np.mean([_ssim_plane(a[:, :, c], b[:, :, c]) for c in range(3)])
    return float(1.0 - mean_ssim)


def loss_feat(x_hat, x_ref, extractor) -> float:
    """Per-layer normalized squared feature distance, summed over layers.

    Parameters
    ----------
    x_hat, x_ref : ndarray
      Image pair of identical shape.
    extractor : callable
      Maps an RGB image to a fixed list of feature rasters; each layer is
      normalized by its own element count.
    """
    a, b = _check_pair(x_hat, x_ref)
    total = 0.0
    for fa, fb in zip(extractor(a), extractor(b)):
        fa = np.asarray(fa, dtype=np.float64)
        fb = np.asarray(fb, dtype=np.float64)
        total += float(np.sum((fa - fb) ** 2)) / fa.size
    return total


def loss_total(
    simple: float,
    illum: float,
    chrom: float,
    ssim: float,
    feat: float,
    weights: LossWeights = LossWeights(),
) -> LossReport:
    """Weighted sum of the five terms; the noise MSE is unweighted."""
    total = (
        simple
        + weights.w_illum * illum
        + weights.w_chrom * chrom
        + weights.w_ssim * ssim
        + weights.w_feat * feat
    )
    return LossReport(
        simple=float(simple),
        illum=float(illum),
        chrom=float(chrom),
        ssim=float(ssim),
        feat=float(feat),
        total=float(total),
    )


def psnr(x_hat, x_ref) -> float:
    """Peak signal-to-noise ratio in dB for unit-range images.

    Returns
    -------
    float
      10 * log10(1 / MSE); ``inf`` when the images are identical.
    """
    a, b = _check_pair(x_hat, x_ref)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def ssim_metric(x_hat, x_ref) -> float:
    """Mean structural similarity (the complement of :func:`loss_ssim`)."""
    return 1.0 - loss_ssim(x_hat, x_ref)


class IdentityExtractor:
    """Single-layer extractor returning the image itself.

    Collapses the feature loss to the plain MSE; useful as a baseline.
    """

    def __call__(self, img) -> list[np.ndarray]:
        return [as_rgb(img)]


class MultiScaleDogExtractor:
    """Fixed difference-of-Gaussians feature stack.

    Layer k is the per-channel band-pass G(sigma_k) - G(2 * sigma_k), at
    full resolution.  Deterministic, stateless, and cheap; stands in for
    a learned perceptual backbone in tests.
    """

    def __init__(self, sigmas: tuple[float, ...] = (1.0, 2.0, 4.0)):
        if not sigmas or any(s <= 0 for s in sigmas):
            raise ValueError("sigmas must be a non-empty tuple of positives")
        self.sigmas = tuple(float(s) for s in sigmas)

    def __call__(self, img) -> list[np.ndarray]:
        img = as_rgb(img)
        layers = []
        for s in self.sigmas:
            layer = np.empty_like(img)
            for c in range(3):
                fine = gaussian_smooth(img[:, :, c], s)
                coarse = gaussian_smooth(img[:, :, c], 2.0 * s)
                layer[:, :, c] = fine - coarse
            layers.append(layer)
        return layers
