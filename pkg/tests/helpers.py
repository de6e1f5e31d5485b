"""Shared test utilities: random rasters and synthetic low-light PNGs."""

import numpy as np

from scemlib.fileio import save_png
from scemlib.imgcore import gaussian_smooth


def random_plane(rng, h, w, lo=0.0, hi=1.0):
    return rng.uniform(lo, hi, (h, w))


def random_rgb(rng, h, w, lo=0.0, hi=1.0):
    return rng.uniform(lo, hi, (h, w, 3))


def lowlight_image(rng, h, w):
    """Plausible underexposed photo: smooth multiscale structure, a few
    bright spots, mild sensor noise, dark overall."""
    base = np.zeros((h, w))
    for sigma, gain in ((1.0, 0.2), (3.0, 0.5), (8.0, 1.0)):
        base += gain * gaussian_smooth(rng.standard_normal((h, w)), sigma)
    base -= base.min()
    base /= max(base.max(), 1e-12)
    img = np.empty((h, w, 3))
    tint = rng.uniform(0.6, 1.0, 3)
    for c in range(3):
        img[:, :, c] = tint[c] * base**2.2
    # sparse highlights, as from street lamps
    for _ in range(3):
        i, j = rng.integers(0, h), rng.integers(0, w)
        img[max(0, i - 1) : i + 2, max(0, j - 1) : j + 2, :] += rng.uniform(0.3, 0.6)
    img *= 0.35
    img += rng.normal(0.0, 0.01, img.shape)
    return np.clip(img, 0.0, 1.0)


def write_lowlight_png(rng, path, h=24, w=32):
    img = lowlight_image(rng, h, w)
    save_png(path, img)
    return img
