"""Shadow extraction by half-quadratic splitting in the frequency domain.

The amplified reflectance ``2R`` is decomposed into a smooth structural
component ``s1`` and a residual ``s2 = 2R - s1`` that carries shadow and
texture transitions.  Each iteration shrinks the gradients of the current
iterate (soft thresholding at ``1/beta``), aggregates them through the
exact adjoint, and solves the quadratic subproblem in closed form through
the DFT, with ``beta`` doubling every iteration.

Everything in this module is circular (DFT semantics), including the
gradients feeding the aggregation term, so the spatial operators are the
exact adjoints of the transfer functions used in the update.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imgcore import (
    GRAD_X_KERNEL,
    GRAD_Y_KERNEL,
    LAPLACIAN_KERNEL,
    as_plane,
    as_rgb,
    kernel_otf,
)

__all__ = [
    "AMPLIFICATION",
    "ShadowParams",
    "ShadowDecomposition",
    "soft_threshold",
    "se_update",
    "extract_shadow",
    "replicate_residual",
]

# fixed amplification coefficient applied to the reflectance before the split
AMPLIFICATION = 2.0


@dataclass(frozen=True)
class ShadowParams:
    """Half-quadratic splitting controls.

    tau         shrinkage scale; iteration i uses beta = 2**(i-1) / tau
    iterations  number of frequency-domain updates
    lambda_se   weight of the Laplacian-anchored fidelity term
    eps_num     numerical floor in the update denominator
    """

    tau: float = 0.05
    iterations: int = 4
    lambda_se: float = 0.15
    eps_num: float = 1e-8

    def __post_init__(self):
        if self.tau <= 0 or self.lambda_se <= 0 or self.eps_num <= 0:
            raise ValueError("tau, lambda_se and eps_num must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")


@dataclass(frozen=True)
class ShadowDecomposition:
    """Split of the amplified reflectance: s1 + s2 == 2R exactly."""

    s1: np.ndarray
    s2: np.ndarray
    s3ch: np.ndarray


def soft_threshold(g, threshold: float) -> np.ndarray:
    """Shrink toward zero: sign(g) * max(|g| - threshold, 0)."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    g = np.asarray(g, dtype=np.float64)
    return np.sign(g) * np.maximum(np.abs(g) - threshold, 0.0)


def _cgrad_x(p: np.ndarray) -> np.ndarray:
    return np.roll(p, -1, axis=1) - p


def _cgrad_y(p: np.ndarray) -> np.ndarray:
    return np.roll(p, -1, axis=0) - p


def _cdiv_adjoint(hx: np.ndarray, hy: np.ndarray) -> np.ndarray:
    # exact adjoints of the circular forward differences above
    return (np.roll(hx, 1, axis=1) - hx) + (np.roll(hy, 1, axis=0) - hy)


def se_update(s_current, anchor_2r, beta: float, params: ShadowParams = ShadowParams()):
    """One frequency-domain update of the structural component.

    Per channel: shrink the circular gradients of ``s_current`` at
    threshold ``1/beta``, aggregate them via the adjoint into ``n2``, and
    divide in the DFT domain:

        out = IDFT[ (lam*|F3|^2 * DFT(2R) + beta * DFT(n2))
                    / (lam*|F3|^2 + beta*(|F1|^2 + |F2|^2) + eps) ]

    The fidelity term always anchors on the original ``2R``.  All three
    transfer-function magnitudes vanish at the DC bin, where the raw
    formula would divide ~0 by eps, so the output DC is forced to the
    anchor's DC to preserve the mean.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    s = as_rgb(s_current)
    anchor = as_rgb(anchor_2r)
    if s.shape != anchor.shape:
        raise ValueError("s_current and anchor must share dimensions")
    h, w = s.shape[:2]

    a1 = np.abs(kernel_otf(GRAD_X_KERNEL, h, w)) ** 2
    a2 = np.abs(kernel_otf(GRAD_Y_KERNEL, h, w)) ** 2
    a3 = np.abs(kernel_otf(LAPLACIAN_KERNEL, h, w)) ** 2
    denom = params.lambda_se * a3 + beta * (a1 + a2) + params.eps_num

    thr = 1.0 / beta
    out = np.empty_like(s)
    for c in range(3):
        hx = soft_threshold(_cgrad_x(s[:, :, c]), thr)
        hy = soft_threshold(_cgrad_y(s[:, :, c]), thr)
        n2 = _cdiv_adjoint(hx, hy)
        f_anchor = np.fft.fft2(anchor[:, :, c])
        f_out = (params.lambda_se * a3 * f_anchor + beta * np.fft.fft2(n2)) / denom
        f_out[0, 0] = f_anchor[0, 0]
        out[:, :, c] = np.fft.ifft2(f_out).real
    return out


def extract_shadow(r, params: ShadowParams = ShadowParams()) -> ShadowDecomposition:
    """Decompose the amplified reflectance into structure and residual.

    Runs ``iterations`` updates with beta doubling from ``1/tau``, then
    clamps the structural part to [0, 2R] element-wise, which guarantees
    a non-negative residual.  The residual is already three-channel here,
    so it doubles as the conditioning map.
    """
    r = as_rgb(r)
    anchor = AMPLIFICATION * r
    s = anchor.copy()
    for i in range(1, params.iterations + 1):
        beta = 2.0 ** (i - 1) / params.tau
        s = se_update(s, anchor, beta, params)
    s1 = np.clip(s, 0.0, anchor)
    s2 = anchor - s1
    return ShadowDecomposition(s1=s1, s2=s2, s3ch=s2.copy())


def replicate_residual(s2) -> np.ndarray:
    """Tile a single-channel residual to H x W x 3 for RGB pipelines."""
    s2 = as_plane(s2)
    return np.repeat(s2[:, :, None], 3, axis=2)
