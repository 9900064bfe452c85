"""Disocclusion filling strategies for warped right views.

Three strategies cover the holes a forward warp leaves behind:

* random_texture: paste a randomly cropped (tiled if needed) background
  image into the holes. Cheap and surprisingly effective as training
  noise.
* background_extend: propagate the nearest non-hole pixel, preferring
  the one to the right within the row (holes open up on the left side of
  foreground objects), then left, then nearest in the column.
* external: shell out to any inpainting tool via a command template.
"""

from __future__ import annotations

import shlex
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AllHoles, DimensionMismatch, EmptyPool, ExternalFailure
from .imgio import RasterImage, read_image, write_image

STRATEGIES = ("random_texture", "background_extend", "external")

_PLACEHOLDERS = ("{input}", "{mask}", "{output}")


@dataclass
class FillConfig:
    """Which strategy to use and its inputs."""

    strategy: str = "background_extend"
    background_pool: tuple = ()
    external_cmd: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        self.background_pool = tuple(str(p) for p in self.background_pool)
        if self.strategy == "random_texture" and not self.background_pool:
            raise EmptyPool("random_texture fill needs a non-empty background pool")
        if self.strategy == "external":
            if not self.external_cmd:
                raise ValueError("external fill needs a command template")
            missing = [p for p in _PLACEHOLDERS if p not in self.external_cmd]
            if missing:
                raise ValueError(f"external command template lacks {missing}")


def _check_mask(img: RasterImage, hole_mask: np.ndarray) -> np.ndarray:
    mask = np.asarray(hole_mask, dtype=bool)
    if mask.shape != (img.height, img.width):
        raise DimensionMismatch(
            f"mask shape {mask.shape} vs image {(img.height, img.width)}"
        )
    return mask


def _match_channels(bg: RasterImage, channels: int) -> RasterImage:
    if bg.channels == channels:
        return bg
    if channels == 3:
        return bg.to_rgb()
    return RasterImage(bg.to_gray()[:, :, None])


def _prepare_background(
    bg: RasterImage, height: int, width: int, channels: int, rng: np.random.Generator
) -> np.ndarray:
    """Tile the background until it covers (height, width), then random-crop."""
    arr = _match_channels(bg, channels).data
    reps_y = -(-height // arr.shape[0])
    reps_x = -(-width // arr.shape[1])
    tiled = np.tile(arr, (reps_y, reps_x, 1))
    oy = int(rng.integers(0, tiled.shape[0] - height + 1))
    ox = int(rng.integers(0, tiled.shape[1] - width + 1))
    return tiled[oy:oy + height, ox:ox + width]


def fill_random_texture(
    right_raw: RasterImage,
    hole_mask: np.ndarray,
    background: RasterImage,
    rng: np.random.Generator,
) -> RasterImage:
    """Replace hole pixels with content from a random crop of `background`."""
    mask = _check_mask(right_raw, hole_mask)
    out = right_raw.data.copy()
    patch = _prepare_background(background, right_raw.height, right_raw.width,
                                right_raw.channels, rng)
    out[mask] = patch[mask]
    return RasterImage(out)


def fill_background_extend(right_raw: RasterImage, hole_mask: np.ndarray) -> RasterImage:
    """Propagate nearest non-hole pixels into the holes, deterministically.

    Priority per hole pixel: nearest non-hole to the right in its row,
    else nearest to the left, else nearest in its column (distance ties
    prefer the pixel above), else the value of the nearest row that has
    any content at all. Raises AllHoles when every pixel is masked.
    """
    mask = _check_mask(right_raw, hole_mask)
    nonhole = ~mask
    if not nonhole.any():
        raise AllHoles("every pixel is masked; nothing to extend from")

    data = right_raw.data
    H, W = right_raw.height, right_raw.width
    out = data.copy()
    rows2d = np.broadcast_to(np.arange(H)[:, None], (H, W))
    cols2d = np.broadcast_to(np.arange(W)[None, :], (H, W))

    # Pass 1, within-row: nearest non-hole at or to the right, else left.
    idx_r = np.where(nonhole, cols2d, W)
    near_r = np.minimum.accumulate(idx_r[:, ::-1], axis=1)[:, ::-1]
    idx_l = np.where(nonhole, cols2d, -1)
    near_l = np.maximum.accumulate(idx_l, axis=1)

    use_r = mask & (near_r < W)
    out[use_r] = data[rows2d[use_r], near_r[use_r]]
    use_l = mask & (near_r == W) & (near_l >= 0)
    out[use_l] = data[rows2d[use_l], near_l[use_l]]

    remaining = mask & (near_r == W) & (near_l < 0)  # fully masked rows
    if remaining.any():
        # Pass 2, within-column: nearest original non-hole above or below.
        idx_d = np.where(nonhole, rows2d, H)
        near_d = np.minimum.accumulate(idx_d[::-1, :], axis=0)[::-1, :]
        idx_u = np.where(nonhole, rows2d, -1)
        near_u = np.maximum.accumulate(idx_u, axis=0)
        big = H + W
        dist_d = np.where(near_d < H, near_d - rows2d, big)
        dist_u = np.where(near_u >= 0, rows2d - near_u, big)
        src_row = np.where(dist_u <= dist_d, near_u, near_d)
        ok = remaining & ((near_d < H) | (near_u >= 0))
        out[ok] = data[src_row[ok], cols2d[ok]]

        # Pass 3: fully masked row AND column. Copy from the nearest row
        # that has content; that row is completely filled by pass 1.
        left_over = remaining & ~ok
        if left_over.any():
            has = nonhole.any(axis=1)
            ri = np.arange(H)
            dn = np.where(has, ri, H)
            nd = np.minimum.accumulate(dn[::-1])[::-1]
            up = np.where(has, ri, -1)
            nu = np.maximum.accumulate(up)
            dd = np.where(nd < H, nd - ri, big)
            du = np.where(nu >= 0, ri - nu, big)
            src = np.where(du <= dd, nu, nd)
            ys, xs = np.nonzero(left_over)
            out[ys, xs] = out[src[ys], xs]
    return RasterImage(out)


def fill_external(
    right_raw: RasterImage,
    hole_mask: np.ndarray,
    command: str,
    workdir,
) -> RasterImage:
    """Fill holes by running an external inpainting command.

    The template must contain {input}, {mask}, and {output}; each token of
    the shlex-split command has the placeholders substituted with real
    paths. The mask is written as an 8-bit PNG with 255 marking pixels to
    fill. Whatever the tool writes, only hole pixels are taken from its
    output; everything else is restored from the original image.
    """
    mask = _check_mask(right_raw, hole_mask)
    for p in _PLACEHOLDERS:
        if p not in command:
            raise ValueError(f"external command template lacks {p}")

    wd = Path(workdir)
    wd.mkdir(parents=True, exist_ok=True)
    in_path = wd / "fill_input.png"
    mask_path = wd / "fill_mask.png"
    out_path = wd / "fill_output.png"
    in_path.write_bytes(write_image(right_raw))
    mask_img = RasterImage((mask.astype(np.uint8) * 255)[:, :, None])
    mask_path.write_bytes(write_image(mask_img))
    if out_path.exists():
        out_path.unlink()

    tokens = [
        t.replace("{input}", str(in_path))
        .replace("{mask}", str(mask_path))
        .replace("{output}", str(out_path))
        for t in shlex.split(command)
    ]
    try:
        proc = subprocess.run(tokens, capture_output=True, text=True, timeout=300)
    except (OSError, subprocess.TimeoutExpired) as e:
        raise ExternalFailure(f"external fill failed to run: {e}") from e
    if proc.returncode != 0:
        tail = (proc.stderr or "").strip()[-500:]
        raise ExternalFailure(f"external fill exited {proc.returncode}: {tail}")
    if not out_path.exists():
        raise ExternalFailure(f"external fill wrote no output at {out_path}")

    result = read_image(out_path.read_bytes())
    result = _match_channels(result, right_raw.channels)
    if (result.height, result.width) != (right_raw.height, right_raw.width):
        raise DimensionMismatch(
            f"external output {result.height}x{result.width} vs "
            f"input {right_raw.height}x{right_raw.width}"
        )
    out = result.data.copy()
    out[~mask] = right_raw.data[~mask]
    return RasterImage(out)


def fill_holes(
    right_raw: RasterImage,
    hole_mask: np.ndarray,
    cfg: FillConfig,
    rng: np.random.Generator | None = None,
    workdir=None,
):
    """Dispatch to the configured strategy.

    Returns (filled_image, info) where info records strategy specifics
    (like which background image was drawn) for sidecar metadata.
    """
    if cfg.strategy == "random_texture":
        if not cfg.background_pool:
            raise EmptyPool("random_texture fill needs a non-empty background pool")
        if rng is None:
            rng = np.random.default_rng(cfg.seed)
        idx = int(rng.integers(0, len(cfg.background_pool)))
        bg_path = cfg.background_pool[idx]
        background = read_image(Path(bg_path).read_bytes())
        filled = fill_random_texture(right_raw, hole_mask, background, rng)
        return filled, {"strategy": cfg.strategy, "background_image": bg_path}
    if cfg.strategy == "background_extend":
        return fill_background_extend(right_raw, hole_mask), {"strategy": cfg.strategy}
    if cfg.strategy == "external":
        if workdir is None:
            with tempfile.TemporaryDirectory(prefix="stereoforge_fill_") as tmp:
                filled = fill_external(right_raw, hole_mask, cfg.external_cmd, tmp)
        else:
            filled = fill_external(right_raw, hole_mask, cfg.external_cmd, workdir)
        return filled, {"strategy": cfg.strategy, "command": cfg.external_cmd}
    raise ValueError(f"unknown strategy {cfg.strategy!r}")
