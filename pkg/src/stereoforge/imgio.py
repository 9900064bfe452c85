"""Image and float-map containers plus the on-disk codecs.

Two value-bearing formats are supported for float maps:

* PFM, single channel ("Pf"). Rows are stored bottom-up; the sign of the
  scale token encodes endianness (negative = little-endian). The canonical
  form written here is ``Pf\\n{w} {h}\\n-1.0\\n`` followed by little-endian
  float32 rows.
* 16-bit grayscale PNG with the stored-value = disparity * 256 convention,
  where stored 0 marks an invalid pixel.

Ordinary 8-bit PNG/JPEG images decode through Pillow; only PNG is written.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    DimensionMismatch,
    MalformedHeader,
    MalformedPng,
    TruncatedPayload,
    UnsupportedBitDepth,
    UnsupportedFormat,
)

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

# ITU-R BT.601 luma weights, used wherever a color image needs collapsing
# to a single channel.
_LUMA = (0.299, 0.587, 0.114)


@dataclass
class RasterImage:
    """8-bit raster with shape (height, width, channels), channels 1 or 3."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise ValueError(f"expected (H, W, 1|3) array, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            raise ValueError(f"expected uint8 samples, got {arr.dtype}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        self.data = np.ascontiguousarray(arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def to_gray(self) -> np.ndarray:
        """Collapse to a 2-D uint8 array using BT.601 luma for color input."""
        if self.channels == 1:
            return self.data[:, :, 0].copy()
        r, g, b = (self.data[:, :, i].astype(np.float64) for i in range(3))
        y = _LUMA[0] * r + _LUMA[1] * g + _LUMA[2] * b
        return np.clip(np.rint(y), 0, 255).astype(np.uint8)

    def to_rgb(self) -> "RasterImage":
        """Return a 3-channel view of the same content (copies on promote)."""
        if self.channels == 3:
            return RasterImage(self.data.copy())
        return RasterImage(np.repeat(self.data, 3, axis=2))


@dataclass
class FloatMap:
    """Dense float32 map with a per-pixel validity mask.

    Every valid sample must be finite; invalid slots may hold anything,
    including NaN or infinities carried through from a file.
    """

    data: np.ndarray
    valid: np.ndarray | None = field(default=None)

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D map, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("map must be at least 1x1")
        arr = np.ascontiguousarray(arr, dtype=np.float32)
        if self.valid is None:
            mask = np.isfinite(arr)
        else:
            mask = np.asarray(self.valid)
            if mask.shape != arr.shape:
                raise ValueError("validity mask shape must match data shape")
            mask = np.ascontiguousarray(mask, dtype=bool)
            if not np.isfinite(arr[mask]).all():
                raise ValueError("valid samples must be finite")
        self.data = arr
        self.valid = mask

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def valid_values(self) -> np.ndarray:
        """1-D array of the valid samples, row-major order."""
        return self.data[self.valid]


# --------------------------------------------------------------------------
# PFM
# --------------------------------------------------------------------------

_PFM_HEADER = re.compile(rb"(P[Ff])\s+(\d+)\s+(\d+)\s+([-+0-9.eE]+)\s")


def read_pfm(data: bytes) -> FloatMap:
    """Decode single-channel PFM bytes into a FloatMap.

    Non-finite samples become invalid pixels but keep their bit patterns,
    so a canonical file survives a read/write round trip byte for byte.
    """
    m = _PFM_HEADER.match(data)
    if m is None:
        raise MalformedHeader("not a PFM header")
    if m.group(1) != b"Pf":
        raise MalformedHeader(f"unsupported PFM magic {m.group(1)!r} (single-channel 'Pf' only)")
    width = int(m.group(2))
    height = int(m.group(3))
    if width < 1 or height < 1:
        raise MalformedHeader(f"bad dimensions {width}x{height}")
    try:
        scale = float(m.group(4))
    except ValueError as e:
        raise MalformedHeader(f"bad scale token {m.group(4)!r}") from e
    if scale == 0.0:
        raise MalformedHeader("scale token must be nonzero")

    need = width * height * 4
    payload = data[m.end():]
    if len(payload) < need:
        raise TruncatedPayload(f"need {need} payload bytes, have {len(payload)}")

    dtype = "<f4" if scale < 0 else ">f4"
    rows = np.frombuffer(payload[:need], dtype=dtype).reshape(height, width)
    arr = np.flipud(rows).astype(np.float32)  # bottom-up on disk
    return FloatMap(arr, np.isfinite(arr))


def write_pfm(fmap: FloatMap) -> bytes:
    """Encode a FloatMap as canonical little-endian PFM bytes.

    Invalid pixels that hold a finite value are written as NaN; invalid
    pixels already non-finite keep their exact bit pattern.
    """
    out = np.flipud(fmap.data).astype("<f4", copy=True)
    mask_finite_invalid = np.flipud(~fmap.valid) & np.isfinite(out)
    out[mask_finite_invalid] = np.float32(np.nan)
    header = f"Pf\n{fmap.width} {fmap.height}\n-1.0\n".encode("ascii")
    return header + out.tobytes()


# --------------------------------------------------------------------------
# 16-bit disparity PNG
# --------------------------------------------------------------------------


def _check_png16_header(data: bytes) -> None:
    if len(data) < 8 or data[:8] != _PNG_SIGNATURE:
        raise MalformedPng("missing PNG signature")
    if len(data) < 26:
        raise MalformedPng("truncated before IHDR")
    bit_depth, color_type = data[24], data[25]
    if (bit_depth, color_type) != (16, 0):
        raise UnsupportedBitDepth(
            f"need 16-bit grayscale PNG, got bit depth {bit_depth} color type {color_type}"
        )


def read_disp_png16(data: bytes) -> FloatMap:
    """Decode a 16-bit grayscale PNG as disparity = stored / 256.

    Stored zero marks an invalid pixel; its data slot is 0.0 and its mask
    entry is False.
    """
    _check_png16_header(data)
    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            stored = np.asarray(im, dtype=np.uint16)
    except (UnidentifiedImageError, OSError, SyntaxError) as e:
        raise MalformedPng(f"undecodable PNG: {e}") from e
    disp = stored.astype(np.float32) / np.float32(256.0)
    valid = stored > 0
    disp[~valid] = 0.0
    return FloatMap(disp, valid)


def write_disp_png16(fmap: FloatMap) -> bytes:
    """Encode disparity to 16-bit PNG: stored = round(d * 256) clamped to [1, 65535].

    Invalid pixels store 0. Valid values quantize with error at most 1/512 px
    inside the representable range.
    """
    scaled = np.rint(fmap.data.astype(np.float64) * 256.0)
    stored = np.clip(scaled, 1, 65535).astype(np.uint16)
    stored[~fmap.valid] = 0
    buf = io.BytesIO()
    Image.fromarray(stored).save(buf, format="PNG")
    return buf.getvalue()


# --------------------------------------------------------------------------
# Ordinary images
# --------------------------------------------------------------------------


def read_image(data: bytes, force_rgb: bool = False) -> RasterImage:
    """Decode PNG or JPEG bytes into a RasterImage (grayscale stays 1-channel)."""
    try:
        with Image.open(io.BytesIO(data)) as im:
            fmt = im.format
            if fmt not in ("PNG", "JPEG"):
                raise UnsupportedFormat(f"unsupported image format {fmt!r}")
            if im.mode == "L" and not force_rgb:
                arr = np.asarray(im, dtype=np.uint8)[:, :, None]
            else:
                arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    except UnidentifiedImageError as e:
        raise UnsupportedFormat(f"undecodable image: {e}") from e
    return RasterImage(arr)


def write_image(img: RasterImage, fmt: str = "png") -> bytes:
    """Encode a RasterImage; only PNG output is supported (JPEG is decode-only)."""
    if fmt.lower() != "png":
        raise UnsupportedFormat(f"write supports PNG only, not {fmt!r}")
    if img.channels == 1:
        pil = Image.fromarray(img.data[:, :, 0])
    else:
        pil = Image.fromarray(img.data)
    buf = io.BytesIO()
    pil.save(buf, format="PNG")
    return buf.getvalue()


def read_float_map(path) -> FloatMap:
    """Read a float map from a path, picking the codec by file contents."""
    from pathlib import Path

    raw = Path(path).read_bytes()
    if raw[:2] in (b"Pf", b"PF"):
        return read_pfm(raw)
    if raw[:8] == _PNG_SIGNATURE:
        return read_disp_png16(raw)
    raise UnsupportedFormat(f"{path}: neither PFM nor PNG")


def require_same_shape(*shapes: tuple[int, int]) -> None:
    """Raise DimensionMismatch unless all (H, W) tuples agree."""
    first = shapes[0]
    for s in shapes[1:]:
        if s != first:
            raise DimensionMismatch(f"shape {s} != {first}")
