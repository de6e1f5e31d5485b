"""Tensor files, PNG loading, and the flat run configuration.

Tensor sidecar format (extension ``.scem``), fixed little-endian
regardless of host:

    bytes 0..3    magic ``SCEM``
    bytes 4..7    format version, u32 LE (currently 1)
    bytes 8..19   height, width, channels, u32 LE each
    bytes 20..    payload: H*W*C float32 LE values, row-major,
                  channel-interleaved

Round trips are bit-exact.  PNGs are read at their native bit depth and
normalized to [0, 1] (8-bit by 255, 16-bit by 65535); previews clamp to
[0, 1] before the 8-bit cast instead of rescaling, so out-of-range
values stay visible in the sidecar tensors.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from pathlib import Path

import cv2
import numpy as np

from .diffusion import SamplerConfig
from .illum import IllumParams
from .losses import LossWeights
from .shadow import ShadowParams

__all__ = [
    "TENSOR_MAGIC",
    "TENSOR_VERSION",
    "RunConfig",
    "write_tensor",
    "read_tensor",
    "load_png",
    "save_png",
    "parse_config",
    "load_config",
]

TENSOR_MAGIC = b"SCEM"
TENSOR_VERSION = 1
_HEADER = struct.Struct("<4sIIII")


def write_tensor(path, array) -> None:
    """Write a plane (H, W) or raster (H, W, C) as a .scem tensor file."""
    arr = np.asarray(array, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3 or arr.size == 0:
        raise ValueError(f"expected (H, W) or (H, W, C) data, got shape {arr.shape}")
    h, w, c = arr.shape
    payload = np.ascontiguousarray(arr, dtype="<f4").tobytes()
    with open(path, "wb") as f:
        f.write(_HEADER.pack(TENSOR_MAGIC, TENSOR_VERSION, h, w, c))
        f.write(payload)


def read_tensor(path) -> np.ndarray:
    """Read a .scem tensor file; returns float32 data of shape (H, W, C)."""
    with open(path, "rb") as f:
        header = f.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, version, h, w, c = _HEADER.unpack(header)
        if magic != TENSOR_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        if version != TENSOR_VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        payload = f.read()
    expected = 4 * h * w * c
    if len(payload) != expected:
        raise ValueError(
            f"{path}: payload is {len(payload)} bytes, expected {expected}"
        )
    data = np.frombuffer(payload, dtype="<f4").reshape(h, w, c)
    return data.astype(np.float32)


def load_png(path) -> np.ndarray:
    """Load an 8- or 16-bit PNG as an H x W x 3 float64 image in [0, 1]."""
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise OSError(f"cannot read image: {path}")
    if raw.dtype == np.uint8:
        scale = 255.0
    elif raw.dtype == np.uint16:
        scale = 65535.0
    else:
        raise ValueError(f"{path}: unsupported sample type {raw.dtype}")
    if raw.ndim == 2:
        raw = np.stack([raw] * 3, axis=2)
    elif raw.ndim == 3 and raw.shape[2] == 3:
        raw = raw[:, :, ::-1]  # BGR -> RGB
    else:
        raise ValueError(f"{path}: alpha/multi-channel PNGs are not supported")
    return raw.astype(np.float64) / scale


def save_png(path, img) -> None:
    """Write an 8-bit PNG preview; values are clamped to [0, 1], not rescaled."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    data = np.rint(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)
    if data.ndim == 3:
        data = data[:, :, ::-1]  # RGB -> BGR
    if not cv2.imwrite(str(path), data):
        raise OSError(f"cannot write image: {path}")


@dataclass(frozen=True)
class RunConfig:
    """Every tunable of the pipeline, with module defaults."""

    illum: IllumParams = IllumParams()
    shadow: ShadowParams = ShadowParams()
    t_max: int = 1000
    beta_start: float = 1e-4
    beta_end: float = 2e-2
    sampler: SamplerConfig = SamplerConfig()
    weights: LossWeights = LossWeights()


# config key -> (section attribute or None for top level, field, converter)
_CONFIG_KEYS = {
    "delta": ("illum", "delta", float),
    "eps_s": ("illum", "eps_s", float),
    "eps_local": ("illum", "eps_local", float),
    "sigma": ("illum", "sigma", float),
    "lambda": ("illum", "lam", float),
    "gamma": ("illum", "gamma", float),
    "solver_tol": ("illum", "solver_tol", float),
    "solver_max_iter": ("illum", "solver_max_iter", int),
    "tau": ("shadow", "tau", float),
    "iterations": ("shadow", "iterations", int),
    "lambda_se": ("shadow", "lambda_se", float),
    "eps_num": ("shadow", "eps_num", float),
    "t_max": (None, "t_max", int),
    "beta_start": (None, "beta_start", float),
    "beta_end": (None, "beta_end", float),
    "num_steps": ("sampler", "num_steps", int),
    "seed": ("sampler", "seed", int),
    "w_illum": ("weights", "w_illum", float),
    "w_chrom": ("weights", "w_chrom", float),
    "w_ssim": ("weights", "w_ssim", float),
    "w_feat": ("weights", "w_feat", float),
}


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines into a :class:`RunConfig`.

    Blank lines and ``#`` comments are ignored.  Every key is optional;
    an unknown key is an error that names the key.
    """
    config = RunConfig()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"config line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ValueError(f"unknown config key: {key!r}")
        section, fieldname, conv = _CONFIG_KEYS[key]
        try:
            parsed = conv(value)
        except ValueError as exc:
            raise ValueError(f"config key {key!r}: {exc}") from exc
        if section is None:
            config = replace(config, **{fieldname: parsed})
        else:
            updated = replace(getattr(config, section), **{fieldname: parsed})
            config = replace(config, **{section: updated})
    return config


def load_config(path) -> RunConfig:
    """Read a config file; a missing path raises OSError."""
    return parse_config(Path(path).read_text())
