"""File format codecs: hand-built fixtures first, then properties."""

import io
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image

from stereoforge import (
    FloatMap,
    MalformedHeader,
    MalformedPng,
    RasterImage,
    TruncatedPayload,
    UnsupportedBitDepth,
    UnsupportedFormat,
    read_disp_png16,
    read_float_map,
    read_image,
    read_pfm,
    write_disp_png16,
    write_image,
    write_pfm,
)
from stereoforge.imgio import require_same_shape


# ---------------------------------------------------------------- PFM


def test_pfm_single_pixel_hand_encoded():
    payload = struct.pack("<f", 2.5)
    fm = read_pfm(b"Pf\n1 1\n-1.0\n" + payload)
    assert fm.data.shape == (1, 1)
    assert fm.data[0, 0] == 2.5
    assert fm.valid[0, 0]


def test_pfm_rows_are_bottom_up():
    # File rows: bottom row (1, 2) first, then top row (3, 4).
    payload = struct.pack("<4f", 1.0, 2.0, 3.0, 4.0)
    fm = read_pfm(b"Pf\n2 2\n-1.0\n" + payload)
    assert fm.data.tolist() == [[3.0, 4.0], [1.0, 2.0]]


def test_pfm_big_endian_positive_scale():
    payload = struct.pack(">2f", 7.0, -3.0)
    fm = read_pfm(b"Pf\n2 1\n1.0\n" + payload)
    assert fm.data.tolist() == [[7.0, -3.0]]


def test_pfm_nonfinite_samples_become_invalid():
    payload = struct.pack("<3f", 1.0, float("nan"), float("inf"))
    fm = read_pfm(b"Pf\n3 1\n-1.0\n" + payload)
    assert fm.valid.tolist() == [[True, False, False]]
    assert fm.data[0, 0] == 1.0


def test_pfm_header_errors():
    with pytest.raises(MalformedHeader):
        read_pfm(b"P5\n1 1\n-1.0\n" + b"\x00" * 4)
    with pytest.raises(MalformedHeader):
        read_pfm(b"PF\n1 1\n-1.0\n" + b"\x00" * 12)  # color PFM unsupported
    with pytest.raises(MalformedHeader):
        read_pfm(b"Pf\n0 1\n-1.0\n")
    with pytest.raises(MalformedHeader):
        read_pfm(b"Pf\n1 1\n0.0\n" + b"\x00" * 4)
    with pytest.raises(MalformedHeader):
        read_pfm(b"garbage")


def test_pfm_truncated_payload():
    with pytest.raises(TruncatedPayload):
        read_pfm(b"Pf\n2 2\n-1.0\n" + b"\x00" * 15)


def test_pfm_trailing_bytes_tolerated():
    payload = struct.pack("<f", 1.5) + b"extra"
    assert read_pfm(b"Pf\n1 1\n-1.0\n" + payload).data[0, 0] == 1.5


def test_pfm_writer_canonical_header():
    fm = FloatMap(np.zeros((3, 5), np.float32))
    assert write_pfm(fm).startswith(b"Pf\n5 3\n-1.0\n")


def test_pfm_byte_exact_roundtrip_with_nan():
    data = np.array([[1.0, np.nan], [np.inf, -2.5]], np.float32)
    original = b"Pf\n2 2\n-1.0\n" + np.flipud(data).astype("<f4").tobytes()
    assert write_pfm(read_pfm(original)) == original


def test_pfm_writer_masks_finite_invalid_as_nan():
    fm = FloatMap(np.array([[3.0, 4.0]], np.float32), np.array([[True, False]]))
    back = read_pfm(write_pfm(fm))
    assert back.valid.tolist() == [[True, False]]
    assert back.data[0, 0] == 3.0
    assert np.isnan(back.data[0, 1])


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2 ** 31 - 1))
def test_pfm_roundtrip_property(w, h, seed):
    r = np.random.default_rng(seed)
    fm = FloatMap(r.uniform(-1e4, 1e4, (h, w)).astype(np.float32))
    blob = write_pfm(fm)
    back = read_pfm(blob)
    assert np.array_equal(back.data, fm.data)
    assert np.array_equal(back.valid, fm.valid)
    assert write_pfm(back) == blob


# ---------------------------------------------------------------- PNG16


def test_png16_known_values():
    disp = FloatMap(np.array([[1.0, 35.2], [0.0, 255.0]], np.float32),
                    np.array([[True, True], [False, True]]))
    back = read_disp_png16(write_disp_png16(disp))
    assert back.data[0, 0] == 1.0  # 256/256 exact
    assert back.data[0, 1] == pytest.approx(35.2, abs=1 / 512)
    assert not back.valid[1, 0] and back.data[1, 0] == 0.0
    assert back.data[1, 1] == 255.0


def test_png16_zero_is_invalid_and_writer_clamps_low():
    # A tiny but valid disparity must not collapse into the invalid code.
    disp = FloatMap(np.array([[0.0001]], np.float32), np.array([[True]]))
    back = read_disp_png16(write_disp_png16(disp))
    assert back.valid[0, 0]
    assert back.data[0, 0] == 1.0 / 256.0


def test_png16_quantization_error_bound(rng):
    vals = rng.uniform(1 / 256, 255.0, (40, 30)).astype(np.float32)
    fm = FloatMap(vals)
    back = read_disp_png16(write_disp_png16(fm))
    assert np.abs(back.data - vals).max() <= 1 / 512 + 1e-7


def test_png16_grid_values_roundtrip_exact(rng):
    # Multiples of 1/256 survive the quantization exactly.
    stored = rng.integers(1, 65536, (9, 13)).astype(np.uint16)
    fm = FloatMap(stored.astype(np.float32) / 256.0)
    back = read_disp_png16(write_disp_png16(fm))
    assert np.array_equal(back.data, fm.data)
    assert back.valid.all()


def test_png16_rejects_8_bit():
    buf = io.BytesIO()
    Image.fromarray(np.zeros((4, 4), np.uint8)).save(buf, format="PNG")
    with pytest.raises(UnsupportedBitDepth):
        read_disp_png16(buf.getvalue())


def test_png16_rejects_rgb16_and_non_png():
    buf = io.BytesIO()
    Image.fromarray(np.zeros((4, 4, 3), np.uint8)).save(buf, format="PNG")
    with pytest.raises(UnsupportedBitDepth):
        read_disp_png16(buf.getvalue())
    with pytest.raises(MalformedPng):
        read_disp_png16(b"not a png at all")


def test_png16_truncated_stream():
    disp = FloatMap(np.ones((6, 6), np.float32))
    blob = write_disp_png16(disp)
    with pytest.raises(MalformedPng):
        read_disp_png16(blob[:40])


def test_png16_writer_deterministic(rng):
    fm = FloatMap(rng.uniform(0.1, 200, (16, 16)).astype(np.float32))
    assert write_disp_png16(fm) == write_disp_png16(fm)


# ---------------------------------------------------------------- images


def test_image_png_roundtrip(rng):
    img = RasterImage(rng.integers(0, 256, (10, 7, 3), dtype=np.int64).astype(np.uint8))
    back = read_image(write_image(img))
    assert np.array_equal(back.data, img.data)


def test_image_grayscale_stays_single_channel(rng):
    img = RasterImage(rng.integers(0, 256, (5, 5, 1), dtype=np.int64).astype(np.uint8))
    back = read_image(write_image(img))
    assert back.channels == 1
    assert np.array_equal(back.data, img.data)


def test_image_jpeg_reads_close_but_never_writes():
    arr = np.full((24, 24, 3), 130, np.uint8)
    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, format="JPEG", quality=95)
    img = read_image(buf.getvalue())
    assert int(np.abs(img.data.astype(int) - 130).max()) <= 2
    with pytest.raises(UnsupportedFormat):
        write_image(img, fmt="jpeg")


def test_image_unsupported_format_rejected():
    with pytest.raises(UnsupportedFormat):
        read_image(b"GIF89a" + b"\x00" * 30)
    buf = io.BytesIO()
    Image.fromarray(np.zeros((4, 4), np.uint8)).save(buf, format="BMP")
    with pytest.raises(UnsupportedFormat):
        read_image(buf.getvalue())


def test_read_float_map_dispatches_by_content(tmp_path):
    pfm_path = tmp_path / "a.pfm"
    pfm_path.write_bytes(write_pfm(FloatMap(np.full((2, 2), 3.0, np.float32))))
    png_path = tmp_path / "b.png"
    png_path.write_bytes(write_disp_png16(FloatMap(np.full((2, 2), 4.0, np.float32))))
    assert read_float_map(pfm_path).data[0, 0] == 3.0
    assert read_float_map(png_path).data[0, 0] == 4.0
    bad = tmp_path / "c.bin"
    bad.write_bytes(b"\x00" * 10)
    with pytest.raises(UnsupportedFormat):
        read_float_map(bad)


# ---------------------------------------------------------------- containers


def test_rasterimage_validation():
    with pytest.raises(ValueError):
        RasterImage(np.zeros((4, 4, 2), np.uint8))
    with pytest.raises(ValueError):
        RasterImage(np.zeros((4, 4, 3), np.float32))
    img = RasterImage(np.zeros((4, 4), np.uint8))  # 2-D promotes to 1 channel
    assert img.channels == 1


def test_floatmap_rejects_nonfinite_valid_samples():
    with pytest.raises(ValueError):
        FloatMap(np.array([[np.nan]], np.float32), np.array([[True]]))


def test_floatmap_default_mask_is_isfinite():
    fm = FloatMap(np.array([[1.0, np.inf]], np.float32))
    assert fm.valid.tolist() == [[True, False]]


def test_to_gray_luma_weights():
    img = RasterImage(np.array([[[255, 0, 0]], [[0, 255, 0]], [[0, 0, 255]]], np.uint8))
    gray = img.to_gray()
    assert gray[:, 0].tolist() == [76, 150, 29]  # round(255 * weight)


def test_require_same_shape():
    require_same_shape((2, 3), (2, 3))
    from stereoforge import DimensionMismatch

    with pytest.raises(DimensionMismatch):
        require_same_shape((2, 3), (3, 2))
