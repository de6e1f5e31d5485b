"""Color-invariant map: per-channel normalization by the channel maximum.

Dividing each channel by its own peak cancels any global positive scaling
of the input, so the map is stable under exposure changes.  A channel
that is identically zero stays zero (0/0 := 0), which keeps the map total
and idempotent on the black images low-light data is full of.
"""

from __future__ import annotations

import numpy as np

from .imgcore import as_rgb

__all__ = ["color_invariance"]


def color_invariance(img) -> np.ndarray:
    """Normalize each channel by its maximum; zero channels map to zero.

    Output is in [0, 1] and every nonzero channel attains 1 somewhere.
    """
    img = as_rgb(img)
    if np.any(img < 0):
        raise ValueError("color invariance expects non-negative inputs")
    out = np.zeros_like(img)
    for c in range(3):
        peak = img[:, :, c].max()
        if peak > 0:
            out[:, :, c] = img[:, :, c] / peak
    return out
