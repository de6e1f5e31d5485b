"""scemlib: structured prior extraction and conditional-diffusion numerics.

A numpy/scipy library for decomposing low-light images into four
conditioning priors (refined illumination, illumination-invariant
reflectance, shadow residual, color-invariant map), plus the supporting
diffusion mathematics: noise schedules, the forward process, a
deterministic implicit sampler over pluggable analytic denoisers, the
training-loss suite, and PSNR/SSIM metrics.
"""

from .chroma import color_invariance
from .diffusion import (
    BlurDenoiser,
    NoiseSchedule,
    OracleDenoiser,
    SamplerConfig,
    ZeroDenoiser,
    ddim_sample,
    forward_diffuse,
    gaussian_noise,
    linear_schedule,
    predict_x0,
)
from .illum import (
    AnisoWeights,
    FivePointSystem,
    IllumParams,
    SolverConvergenceError,
    extract_illumination,
)
from .losses import (
    IdentityExtractor,
    LossReport,
    LossWeights,
    MultiScaleDogExtractor,
    loss_chrom,
    loss_feat,
    loss_illum,
    loss_simple,
    loss_ssim,
    loss_total,
    psnr,
    ssim_metric,
)
from .priors import (
    CONDITION_CHANNELS,
    PriorBundle,
    extract_priors,
    stack_condition,
    unstack_condition,
)
from .shadow import ShadowDecomposition, ShadowParams, extract_shadow, soft_threshold

__version__ = "0.1.0"

__all__ = [
    "AnisoWeights",
    "BlurDenoiser",
    "CONDITION_CHANNELS",
    "FivePointSystem",
    "IdentityExtractor",
    "IllumParams",
    "LossReport",
    "LossWeights",
    "MultiScaleDogExtractor",
    "NoiseSchedule",
    "OracleDenoiser",
    "PriorBundle",
    "SamplerConfig",
    "ShadowDecomposition",
    "ShadowParams",
    "SolverConvergenceError",
    "ZeroDenoiser",
    "color_invariance",
    "ddim_sample",
    "extract_illumination",
    "extract_priors",
    "extract_shadow",
    "forward_diffuse",
    "gaussian_noise",
    "linear_schedule",
    "loss_chrom",
    "loss_feat",
    "loss_illum",
    "loss_simple",
    "loss_ssim",
    "loss_total",
    "predict_x0",
    "psnr",
    "soft_threshold",
    "ssim_metric",
    "stack_condition",
    "unstack_condition",
    "__version__",
]
