"""Illumination estimation and refinement.

First stage of the prior pipeline: a per-pixel channel-max initial
illumination, texture-aware anisotropic weights, a weighted-least-squares
smoothing solve, a gamma remap for contrast, and finally the
illumination-invariant reflectance obtained by per-channel division.

The smoothing solve minimizes the quadratic energy

    E(T) = sum (T - T_ini)^2
         + lam * sum (w_x * (grad_x T)^2 + w_y * (grad_y T)^2)

whose unique stationary point is the symmetric positive-definite
five-point system assembled by :func:`build_system` and solved by
preconditioned conjugate gradients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imgcore import as_plane, as_rgb, gaussian_smooth, grad_x, grad_y

__all__ = [
    "IllumParams",
    "AnisoWeights",
    "FivePointSystem",
    "SolverConvergenceError",
    "initial_illumination",
    "texture_weight",
    "local_weights",
    "combine_weights",
    "build_system",
    "solve_illumination",
    "wls_energy",
    "gamma_remap",
    "reflectance",
    "extract_illumination",
]


@dataclass(frozen=True)
class IllumParams:
    """Knobs of the illumination stage.

    delta           initialization floor added to the channel maximum
    eps_s           floor inside the global texture weight
    eps_local       floor inside the smoothed local weights
    sigma           std of the Gaussian used for the local weights
    lam             regularization weight of the smoothing energy
    gamma           exponent of the final contrast remap (t ** (1/gamma))
    solver_tol      relative-residual target of the linear solve
    solver_max_iter iteration cap before the solve reports failure
    """

    delta: float = 0.02
    eps_s: float = 0.02
    eps_local: float = 0.001
    sigma: float = 2.0
    lam: float = 0.15
    gamma: float = 2.2
    solver_tol: float = 1e-6
    solver_max_iter: int = 1000

    def __post_init__(self):
        for name in ("delta", "eps_s", "eps_local", "sigma", "gamma", "solver_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.lam < 0:
            raise ValueError("lam must be non-negative")
        if self.solver_max_iter < 1:
            raise ValueError("solver_max_iter must be at least 1")


class SolverConvergenceError(RuntimeError):
    """Linear solve did not reach the requested tolerance."""

    def __init__(self, residual: float, iterations: int):
        super().__init__(
            f"conjugate gradient stalled at relative residual {residual:.3e} "
            f"after {iterations} iterations"
        )
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class AnisoWeights:
    """Direction-dependent smoothing weights, strictly positive."""

    w_x: np.ndarray
    w_y: np.ndarray


@dataclass(frozen=True)
class FivePointSystem:
    """The system (I + lam * L_w) in implicit five-point-stencil form.

    ``diag`` holds the full diagonal 1 + lam * (sum of incident edge
    weights); the four ``coef_*`` planes hold the *magnitudes* of the
    neighbour couplings (the matrix entries are ``-lam * coef``).  The
    edge between horizontal neighbours is owned by the left pixel of the
    pair (its ``w_x`` value) and the vertical edge by the upper pixel,
    which makes the matrix exactly symmetric.
    """

    diag: np.ndarray
    coef_left: np.ndarray
    coef_right: np.ndarray
    coef_up: np.ndarray
    coef_down: np.ndarray
    lam: float

    @property
    def shape(self) -> tuple[int, int]:
        return self.diag.shape

    def matvec(self, t: np.ndarray) -> np.ndarray:
        """Apply the system matrix to a plane without assembling it."""
        out = self.diag * t
        lam = self.lam
        out[:, :-1] -= lam * self.coef_right[:, :-1] * t[:, 1:]
        out[:, 1:] -= lam * self.coef_left[:, 1:] * t[:, :-1]
        out[:-1, :] -= lam * self.coef_down[:-1, :] * t[1:, :]
        out[1:, :] -= lam * self.coef_up[1:, :] * t[:-1, :]
        return out


def initial_illumination(img, params: IllumParams = IllumParams()) -> np.ndarray:
    """Channel-max illumination estimate, floored at ``delta``."""
    img = as_rgb(img)
    return img.max(axis=2) + params.delta


def texture_weight(t_ini_rgb, params: IllumParams = IllumParams()) -> np.ndarray:
    """Global texture weight: reciprocal channel-mean gradient magnitude.

    Flat regions hit the ``eps_s`` floor and receive the maximum weight
    ``1 / eps_s``; strong edges are weighted down.
    """
    t = as_rgb(t_ini_rgb)
    mag = np.zeros(t.shape[:2])
    for c in range(3):
        mag += np.sqrt(grad_x(t[:, :, c]) ** 2 + grad_y(t[:, :, c]) ** 2)
    mag /= 3.0
    return 1.0 / np.maximum(mag, params.eps_s)


def local_weights(
    t_ini_rgb, params: IllumParams = IllumParams()
) -> tuple[np.ndarray, np.ndarray]:
    """Direction-wise local weights from Gaussian-smoothed gradients."""
    t = as_rgb(t_ini_rgb)
    mx = np.zeros(t.shape[:2])
    my = np.zeros(t.shape[:2])
    for c in range(3):
        smooth = gaussian_smooth(t[:, :, c], params.sigma)
        mx += np.abs(grad_x(smooth))
        my += np.abs(grad_y(smooth))
    mx /= 3.0
    my /= 3.0
    w_x = 1.0 / np.maximum(mx, params.eps_local)
    w_y = 1.0 / np.maximum(my, params.eps_local)
    return w_x, w_y


def combine_weights(w_to, wx_local, wy_local) -> AnisoWeights:
    """Element-wise product of the global and local weights."""
    w_to = as_plane(w_to)
    wx_local = as_plane(wx_local)
    wy_local = as_plane(wy_local)
    if not (w_to.shape == wx_local.shape == wy_local.shape):
        raise ValueError("weight planes must share dimensions")
    return AnisoWeights(w_x=w_to * wx_local, w_y=w_to * wy_local)


def build_system(weights: AnisoWeights, lam: float) -> FivePointSystem:
    """Assemble (I + lam * L_w) for the smoothing energy.

    ``lam`` must be non-negative; zero degenerates to the identity.
    """
    if lam < 0:
        raise ValueError("lam must be non-negative (0 gives the identity system)")
    w_x = as_plane(weights.w_x)
    w_y = as_plane(weights.w_y)
    if w_x.shape != w_y.shape:
        raise ValueError("w_x and w_y must share dimensions")

    coef_right = np.zeros_like(w_x)
    coef_left = np.zeros_like(w_x)
    coef_down = np.zeros_like(w_x)
    coef_up = np.zeros_like(w_x)
    coef_right[:, :-1] = w_x[:, :-1]
    coef_left[:, 1:] = w_x[:, :-1]
    coef_down[:-1, :] = w_y[:-1, :]
    coef_up[1:, :] = w_y[:-1, :]

    diag = 1.0 + lam * (coef_right + coef_left + coef_down + coef_up)
    return FivePointSystem(
        diag=diag,
        coef_left=coef_left,
        coef_right=coef_right,
        coef_up=coef_up,
        coef_down=coef_down,
        lam=float(lam),
    )


def solve_illumination(
    system: FivePointSystem, t_ini, params: IllumParams = IllumParams()
) -> np.ndarray:
    """Solve (I + lam * L_w) t = t_ini by diagonally preconditioned CG.

    Converges when the true relative residual ||A t - b|| / ||b|| drops
    below ``params.solver_tol``; raises :class:`SolverConvergenceError`
    (carrying the final residual) if the iteration cap is hit first.
    """
    b = as_plane(t_ini)
    if b.shape != system.shape:
        raise ValueError(f"t_ini shape {b.shape} does not match system {system.shape}")
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return np.zeros_like(b)

    x = b.copy()  # the solution is a smoothed b, so b is a good start
    r = b - system.matvec(x)
    z = r / system.diag
    p = z.copy()
    rz = float(np.vdot(r, z).real)

    rel = float(np.linalg.norm(r)) / b_norm
    for it in range(params.solver_max_iter):
        if rel <= params.solver_tol:
            return x
        ap = system.matvec(p)
        alpha = rz / float(np.vdot(p, ap).real)
        x += alpha * p
        # refresh the residual from scratch periodically to stop drift
        if (it + 1) % 50 == 0:
            r = b - system.matvec(x)
        else:
            r -= alpha * ap
        z = r / system.diag
        rz_new = float(np.vdot(r, z).real)
        p = z + (rz_new / rz) * p
        rz = rz_new
        rel = float(np.linalg.norm(r)) / b_norm

    # the recursive residual may be optimistic; confirm before failing
    rel = float(np.linalg.norm(b - system.matvec(x))) / b_norm
    if rel <= params.solver_tol:
        return x
    raise SolverConvergenceError(rel, params.solver_max_iter)


def wls_energy(t, t_ini, weights: AnisoWeights, lam: float) -> float:
    """Quadratic smoothing energy whose minimizer the solve returns."""
    t = as_plane(t)
    t_ini = as_plane(t_ini)
    gx = grad_x(t)
    gy = grad_y(t)
    fidelity = float(np.sum((t - t_ini) ** 2))
    penalty = float(np.sum(weights.w_x * gx**2 + weights.w_y * gy**2))
    return fidelity + lam * penalty


def gamma_remap(t, gamma: float) -> np.ndarray:
    """Pointwise t ** (1/gamma); monotone, so pixel ordering survives."""
    t = as_plane(t)
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if np.any(t < 0):
        raise ValueError("gamma remap requires non-negative inputs")
    return t ** (1.0 / gamma)


def reflectance(img, t_ref, params: IllumParams = IllumParams()) -> np.ndarray:
    """Illumination-invariant image: per-channel I / max(t_ref, delta).

    Clamping the denominator keeps the division total even where the
    linear solve undershoots the initialization floor.
    """
    img = as_rgb(img)
    t_ref = as_plane(t_ref)
    if t_ref.shape != img.shape[:2]:
        raise ValueError("t_ref dimensions must match the image")
    denom = np.maximum(t_ref, params.delta)
    return img / denom[:, :, None]


def extract_illumination(
    img, params: IllumParams = IllumParams()
) -> tuple[np.ndarray, np.ndarray]:
    """Full illumination stage: returns (t_ref, reflectance).

    Composition: channel-max initialization, anisotropic weights,
    weighted-least-squares solve, gamma remap, per-channel division.
    """
    img = as_rgb(img)
    t_ini = initial_illumination(img, params)
    # the weight formulas average over channels; the scalar t_ini is
    # broadcast to three identical channels so the average is a no-op
    t_rgb = np.repeat(t_ini[:, :, None], 3, axis=2)
    w_to = texture_weight(t_rgb, params)
    wx_local, wy_local = local_weights(t_rgb, params)
    weights = combine_weights(w_to, wx_local, wy_local)
    system = build_system(weights, params.lam)
    t_ref = solve_illumination(system, t_ini, params)
    t_ref = gamma_remap(t_ref, params.gamma)
    return t_ref, reflectance(img, t_ref, params)
