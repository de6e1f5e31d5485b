"""The training-loss suite and reference metrics on controlled distortions.

Each distortion is designed to excite one term: a brightness shift moves
the grayscale loss, a channel swap moves the chroma loss, blur moves SSIM
and the feature distance, and noise moves everything.
"""

import numpy as np

from scemlib.diffusion import forward_diffuse, linear_schedule
from scemlib.imgcore import gaussian_smooth
from scemlib.losses import (
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

rng = np.random.default_rng(5)


def smooth_image(h=48, w=48):
    img = np.stack(
        [gaussian_smooth(rng.standard_normal((h, w)), 3.0) for _ in range(3)], axis=2
    )
    img -= img.min()
    return img / img.max()


ref = smooth_image()
extractor = MultiScaleDogExtractor()

distortions = {
    "identical": ref.copy(),
    "brightness +0.15": np.clip(ref + 0.15, 0, 1),
    "channels rotated": ref[:, :, [1, 2, 0]],
    "gaussian blur": np.stack(
        [gaussian_smooth(ref[:, :, c], 2.0) for c in range(3)], axis=2
    ),
    "additive noise": np.clip(ref + rng.normal(0, 0.08, ref.shape), 0, 1),
}

header = f"{'distortion':<18} {'psnr':>7} {'ssim':>7} {'illum':>8} {'chrom':>9} {'1-ssim':>8} {'feat':>9}"
print(header)
print("-" * len(header))
for name, img in distortions.items():
    print(
        f"{name:<18} {psnr(img, ref):>7.2f} {ssim_metric(img, ref):>7.4f} "
        f"{loss_illum(img, ref):>8.4f} {loss_chrom(img, ref):>9.4f} "
        f"{loss_ssim(img, ref):>8.4f} {loss_feat(img, ref, extractor):>9.5f}"
    )

# The diffusion training objective compares true and predicted noise.
sched = linear_schedule(1000)
eps = rng.standard_normal(ref.shape)
x_t = forward_diffuse(ref, 500, eps, sched)
eps_guess = eps + rng.normal(0, 0.1, eps.shape)
print()
print(f"noise MSE for a 0.1-sigma prediction error: {loss_simple(eps, eps_guess):.4f}")

report = loss_total(
    loss_simple(eps, eps_guess),
    loss_illum(distortions["additive noise"], ref),
    loss_chrom(distortions["additive noise"], ref),
    loss_ssim(distortions["additive noise"], ref),
    loss_feat(distortions["additive noise"], ref, extractor),
    LossWeights(w_illum=1.0, w_chrom=0.5, w_ssim=0.2, w_feat=0.1),
)
print(f"weighted total: {report.total:.4f} (simple {report.simple:.4f})")
