import struct

import cv2
import numpy as np
import pytest

from scemlib.fileio import (
    RunConfig,
    load_config,
    load_png,
    parse_config,
    read_tensor,
    save_png,
    write_tensor,
)

from helpers import lowlight_image


# ---------------------------------------------------------------------------
# tensor sidecars

def test_tensor_round_trip_is_bit_identical(rng, tmp_path):
    data = rng.uniform(-2, 2, (5, 7, 13)).astype(np.float32)
    path = tmp_path / "a.scem"
    write_tensor(path, data)
    back = read_tensor(path)
    assert back.dtype == np.float32
    np.testing.assert_array_equal(back, data)
    # a second write of the read-back data produces identical bytes
    path2 = tmp_path / "b.scem"
    write_tensor(path2, back)
    assert path.read_bytes() == path2.read_bytes()


def test_tensor_accepts_planes(rng, tmp_path):
    plane = rng.uniform(0, 1, (4, 6)).astype(np.float32)
    path = tmp_path / "p.scem"
    write_tensor(path, plane)
    back = read_tensor(path)
    assert back.shape == (4, 6, 1)
    np.testing.assert_array_equal(back[:, :, 0], plane)


def test_tensor_header_layout_is_little_endian(tmp_path):
    path = tmp_path / "h.scem"
    write_tensor(path, np.arange(6, dtype=np.float32).reshape(2, 3))
    raw = path.read_bytes()
    assert raw[:4] == b"SCEM"
    assert struct.unpack("<IIII", raw[4:20]) == (1, 2, 3, 1)
    # payload is row-major little-endian float32 regardless of host
    expected = np.arange(6, dtype="<f4").tobytes()
    assert raw[20:] == expected
    assert len(raw) == 20 + 4 * 2 * 3 * 1


def test_tensor_rejects_corrupt_files(tmp_path):
    bad_magic = tmp_path / "bad.scem"
    bad_magic.write_bytes(b"NOPE" + b"\x00" * 16)
    with pytest.raises(ValueError, match="magic"):
        read_tensor(bad_magic)
    truncated = tmp_path / "trunc.scem"
    write_tensor(truncated, np.zeros((3, 3), dtype=np.float32))
    truncated.write_bytes(truncated.read_bytes()[:-5])
    with pytest.raises(ValueError, match="payload"):
        read_tensor(truncated)
    short = tmp_path / "short.scem"
    short.write_bytes(b"SCEM")
    with pytest.raises(ValueError, match="header"):
        read_tensor(short)


# ---------------------------------------------------------------------------
# PNG I/O

def test_png_eight_bit_round_trip(tmp_path):
    values = np.arange(12, dtype=np.float64).reshape(2, 2, 3) / 255.0 * 20
    # snap to the 8-bit grid so the round trip is exact
    values = np.rint(values * 255) / 255.0
    path = tmp_path / "img.png"
    save_png(path, values)
    back = load_png(path)
    np.testing.assert_allclose(back, values, atol=1e-12)


def test_png_sixteen_bit_normalization(tmp_path):
    raw = np.zeros((2, 3, 3), dtype=np.uint16)
    raw[0, 0] = (65535, 0, 32768)
    path = tmp_path / "deep.png"
    # write BGR with cv2 directly to get a true 16-bit file
    assert cv2.imwrite(str(path), raw[:, :, ::-1])
    img = load_png(path)
    assert img.dtype == np.float64
    assert img[0, 0, 0] == pytest.approx(1.0)
    assert img[0, 0, 2] == pytest.approx(32768 / 65535)


def test_png_grayscale_is_replicated(tmp_path):
    gray = np.full((4, 5), 100, dtype=np.uint8)
    path = tmp_path / "gray.png"
    assert cv2.imwrite(str(path), gray)
    img = load_png(path)
    assert img.shape == (4, 5, 3)
    np.testing.assert_allclose(img, 100 / 255.0)


def test_png_missing_file_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        load_png(tmp_path / "nope.png")


def test_png_preview_clamps_not_rescales(tmp_path, rng):
    img = lowlight_image(rng, 8, 8) * 3.0  # force out-of-range values
    path = tmp_path / "c.png"
    save_png(path, img)
    back = load_png(path)
    assert back.max() <= 1.0
    expected = np.rint(np.clip(img, 0, 1) * 255) / 255.0
    np.testing.assert_allclose(back, expected, atol=1e-12)


# ---------------------------------------------------------------------------
# run configuration

def test_empty_config_is_all_defaults():
    assert parse_config("") == RunConfig()


def test_config_overrides_and_comments():
    text = """
    # tuning for a quick run
    lambda = 0.5
    gamma = 1.0
    iterations = 2
    t_max = 250
    num_steps = 25
    seed = 7
    w_feat = 0.25
    """
    config = parse_config(text)
    assert config.illum.lam == 0.5
    assert config.illum.gamma == 1.0
    assert config.shadow.iterations == 2
    assert config.t_max == 250
    assert config.sampler.num_steps == 25
    assert config.sampler.seed == 7
    assert config.weights.w_feat == 0.25
    # untouched sections keep their defaults
    assert config.illum.delta == 0.02
    assert config.shadow.tau == 0.05


def test_unknown_config_key_is_named():
    with pytest.raises(ValueError, match="'wls_lambda'"):
        parse_config("wls_lambda = 0.3")


def test_malformed_config_lines():
    with pytest.raises(ValueError, match="key = value"):
        parse_config("just some words")
    with pytest.raises(ValueError, match="'t_max'"):
        parse_config("t_max = many")


def test_config_values_are_validated():
    with pytest.raises(ValueError):
        parse_config("delta = -1.0")


def test_load_config_from_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("sigma = 3.5\n")
    assert load_config(path).illum.sigma == 3.5
    with pytest.raises(OSError):
        load_config(tmp_path / "missing.cfg")
