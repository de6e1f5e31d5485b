"""How the shadow split reacts to its knobs.

The decomposition always satisfies s1 + s2 == 2R and 0 <= s1 <= 2R; what
changes with tau and the iteration count is how much texture ends up in
the residual.  More iterations raise beta, which shrinks less and lets
the structural part follow the signal more closely.
"""

import numpy as np

from scemlib.imgcore import gaussian_smooth, grad_x, grad_y
from scemlib.shadow import ShadowParams, extract_shadow

rng = np.random.default_rng(7)


def textured_reflectance(h=48, w=48):
    smooth = gaussian_smooth(rng.standard_normal((h, w)), 6.0)
    smooth = (smooth - smooth.min()) / (smooth.max() - smooth.min())
    texture = 0.15 * rng.standard_normal((h, w))
    # a hard shadow edge across the middle
    shade = np.ones((h, w))
    shade[:, w // 2 :] = 0.45
    plane = np.clip(shade * (0.4 + 0.5 * smooth) + texture, 0, 1.6)
    return np.stack([plane, 0.95 * plane, 0.9 * plane], axis=2)


def total_gradient(img):
    return sum(
        np.abs(grad_x(img[:, :, c])).sum() + np.abs(grad_y(img[:, :, c])).sum()
        for c in range(3)
    )


r = textured_reflectance()
print(f"reflectance total gradient: {total_gradient(2 * r):.1f}")
print()
print(f"{'tau':>6} {'iters':>5} {'split dev':>10} {'s1 gradient':>12} {'|s2| mean':>10}")
for tau in (0.01, 0.05, 0.2):
    for iters in (1, 4, 8):
        dec = extract_shadow(r, ShadowParams(tau=tau, iterations=iters))
        dev = np.abs(dec.s1 + dec.s2 - 2 * r).max()
        print(
            f"{tau:>6} {iters:>5} {dev:>10.2e} "
            f"{total_gradient(dec.s1):>12.1f} {np.abs(dec.s2).mean():>10.4f}"
        )

print()
print("The structural part is always at least as smooth as 2R, and the")
print("exact-split identity holds at float precision for every setting.")
