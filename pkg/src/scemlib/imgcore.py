"""Raster containers and low-level signal operations.

Array conventions used by every module in this package:

* a *plane* is a 2-D float64 array of shape ``(height, width)``
* an *RGB image* is a float64 array of shape ``(height, width, 3)``,
  nominally in ``[0, 1]`` when freshly loaded from disk
* ``x`` is the horizontal (column) axis and ``y`` the vertical (row)
  axis, so :func:`grad_x` differences along ``axis=1`` and
  :func:`grad_y` along ``axis=0``

Spatial-domain operations use symmetric (reflective) boundaries; the
reflected neighbour of a border pixel is the pixel itself, which is why
the forward differences are zero on their trailing border.  Frequency
helpers (:func:`kernel_otf`) are circular, as the DFT dictates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import correlate1d

__all__ = [
    "Kernel",
    "GRAD_X_KERNEL",
    "GRAD_Y_KERNEL",
    "LAPLACIAN_KERNEL",
    "as_plane",
    "as_rgb",
    "grad_x",
    "grad_y",
    "div_adjoint",
    "gaussian_kernel_1d",
    "gaussian_smooth",
    "kernel_otf",
]


def as_plane(p) -> np.ndarray:
    """Coerce input to a float64 plane, rejecting anything not 2-D."""
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty 2-D plane, got shape {arr.shape}")
    return arr


def as_rgb(img) -> np.ndarray:
    """Coerce input to a float64 H x W x 3 image."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"expected an H x W x 3 image, got shape {arr.shape}")
    return arr


def grad_x(p) -> np.ndarray:
    """Forward difference along x: out(i, j) = p(i, j+1) - p(i, j).

    The last column is zero (the reflected neighbour is the pixel
    itself).
    """
    p = as_plane(p)
    out = np.zeros_like(p)
    out[:, :-1] = p[:, 1:] - p[:, :-1]
    return out


def grad_y(p) -> np.ndarray:
    """Forward difference along y: out(i, j) = p(i+1, j) - p(i, j).

    Last row zero, as in :func:`grad_x`.
    """
    p = as_plane(p)
    out = np.zeros_like(p)
    out[:-1, :] = p[1:, :] - p[:-1, :]
    return out


def div_adjoint(hx, hy) -> np.ndarray:
    """Exact adjoint of the forward differences: grad_x^T hx + grad_y^T hy.

    Satisfies ``<grad_x(p), hx> == <p, div_adjoint(hx, 0)>`` for every p,
    i.e. this is the negative divergence matched to the trailing-zero
    boundary rule of :func:`grad_x`/:func:`grad_y`.
    """
    hx = as_plane(hx)
    hy = as_plane(hy)
    if hx.shape != hy.shape:
        raise ValueError(f"field shapes differ: {hx.shape} vs {hy.shape}")
    out = np.zeros_like(hx)
    out[:, 1:] += hx[:, :-1]
    out[:, :-1] -= hx[:, :-1]
    out[1:, :] += hy[:-1, :]
    out[:-1, :] -= hy[:-1, :]
    return out


def gaussian_kernel_1d(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian taps of std ``sigma``, radius ceil(3*sigma)."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_smooth(p, sigma: float) -> np.ndarray:
    """Separable Gaussian smoothing with symmetric boundary handling.

    Preserves constants exactly; with the symmetric pad the filter matrix
    is doubly stochastic, so the image mean is preserved as well.
    """
    p = as_plane(p)
    k = gaussian_kernel_1d(sigma)
    # scipy's 'reflect' is symmetric padding (edge pixel repeated).
    tmp = correlate1d(p, k, axis=0, mode="reflect")
    return correlate1d(tmp, k, axis=1, mode="reflect")


@dataclass(frozen=True)
class Kernel:
    """Small 2-D convolution stencil with an explicit anchor.

    ``anchor`` is the (row, col) index of the tap sitting on the output
    pixel.  It may be omitted only when both tap dimensions are odd, in
    which case the geometric centre is used.
    """

    taps: np.ndarray
    anchor: tuple[int, int] | None = field(default=None)

    def __post_init__(self):
        taps = np.atleast_2d(np.asarray(self.taps, dtype=np.float64))
        object.__setattr__(self, "taps", taps)
        if self.anchor is None:
            if taps.shape[0] % 2 == 0 or taps.shape[1] % 2 == 0:
                raise ValueError(
                    "anchor must be given explicitly for even-sized taps"
                )
            object.__setattr__(self, "anchor", (taps.shape[0] // 2, taps.shape[1] // 2))
        ar, ac = self.anchor
        if not (0 <= ar < taps.shape[0] and 0 <= ac < taps.shape[1]):
            raise ValueError(f"anchor {self.anchor} outside taps {taps.shape}")


# The finite-difference pair behind grad_x/grad_y and the 5-point Laplacian
# used by the shadow-extraction frequency updates.
GRAD_X_KERNEL = Kernel(np.array([[-1.0, 1.0]]), anchor=(0, 0))
GRAD_Y_KERNEL = Kernel(np.array([[-1.0], [1.0]]), anchor=(0, 0))
LAPLACIAN_KERNEL = Kernel(
    np.array([[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]]), anchor=(1, 1)
)


def kernel_otf(kernel: Kernel, height: int, width: int) -> np.ndarray:
    """Optical transfer function of ``kernel`` on a height x width grid.

    Zero-pads the taps, circularly shifts the anchor to index (0, 0) and
    returns the 2-D DFT.  ``ifft2(kernel_otf(k) * fft2(p))`` is the
    circular convolution of ``p`` with the anchored taps.  The complex
    phase depends on the anchor convention; the magnitude does not.
    """
    taps = kernel.taps
    if taps.shape[0] > height or taps.shape[1] > width:
        raise ValueError(
            f"kernel {taps.shape} does not fit into {(height, width)}"
        )
    padded = np.zeros((height, width), dtype=np.float64)
    padded[: taps.shape[0], : taps.shape[1]] = taps
    padded = np.roll(padded, (-kernel.anchor[0], -kernel.anchor[1]), axis=(0, 1))
    return np.fft.fft2(padded)
