"""Prior bundle orchestration and the conditioning stack.

Runs the three extractors in their natural order (illumination first,
shadow split on the reflectance, color invariance on the source) and
packs the results into the fixed 13-channel raster the denoiser is
conditioned on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chroma import color_invariance
from .illum import IllumParams, extract_illumination
from .imgcore import as_plane, as_rgb
from .shadow import ShadowParams, extract_shadow

__all__ = [
    "CONDITION_CHANNELS",
    "PriorBundle",
    "extract_priors",
    "stack_condition",
    "unstack_condition",
]

# fixed channel layout of the conditioning stack:
#   [source(3) | t_ref(1) | phi(3) | r(3) | s3ch(3)]
CONDITION_CHANNELS = 13


@dataclass(frozen=True)
class PriorBundle:
    """The four conditioning maps plus the source image.

    All members share spatial dimensions; ``t_ref`` is a single plane,
    the rest are three-channel.
    """

    source: np.ndarray
    t_ref: np.ndarray
    r: np.ndarray
    s3ch: np.ndarray
    phi: np.ndarray


def extract_priors(
    img,
    illum_params: IllumParams = IllumParams(),
    shadow_params: ShadowParams = ShadowParams(),
) -> PriorBundle:
    """Run the full prior pipeline on a low-light image.

    Deterministic for fixed parameters; the shadow split consumes the
    reflectance produced by the illumination stage.
    """
    img = as_rgb(img)
    t_ref, r = extract_illumination(img, illum_params)
    decomp = extract_shadow(r, shadow_params)
    phi = color_invariance(img)
    return PriorBundle(source=img, t_ref=t_ref, r=r, s3ch=decomp.s3ch, phi=phi)


def stack_condition(bundle: PriorBundle, replicate_t_ref: bool = False) -> np.ndarray:
    """Concatenate the bundle into the conditioning raster.

    Channel order is fixed: source(3), t_ref(1), phi(3), r(3), s3ch(3),
    13 channels total.  ``replicate_t_ref`` widens the illumination plane
    to three identical channels (15 total) for parity experiments.
    """
    source = as_rgb(bundle.source)
    t_ref = as_plane(bundle.t_ref)
    phi = as_rgb(bundle.phi)
    r = as_rgb(bundle.r)
    s3ch = as_rgb(bundle.s3ch)
    hw = source.shape[:2]
    for name, member in (("t_ref", t_ref), ("phi", phi), ("r", r), ("s3ch", s3ch)):
        if member.shape[:2] != hw:
            raise ValueError(f"bundle member {name} has mismatched dimensions")
    reps = 3 if replicate_t_ref else 1
    t_block = np.repeat(t_ref[:, :, None], reps, axis=2)
    return np.concatenate([source, t_block, phi, r, s3ch], axis=2)


def unstack_condition(stack) -> PriorBundle:
    """Inverse of :func:`stack_condition` for the 13-channel layout."""
    stack = np.asarray(stack, dtype=np.float64)
    if stack.ndim != 3 or stack.shape[2] != CONDITION_CHANNELS:
        raise ValueError(
            f"expected an H x W x {CONDITION_CHANNELS} stack, got {stack.shape}"
        )
    return PriorBundle(
        source=stack[:, :, 0:3],
        t_ref=stack[:, :, 3],
        phi=stack[:, :, 4:7],
        r=stack[:, :, 7:10],
        s3ch=stack[:, :, 10:13],
    )
