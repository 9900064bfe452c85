"""Forward warping of a left view into a synthetic right view.

Each valid left pixel (y, x) with disparity d lands on the same row at
column round(x - d), rounding halves up. When several sources collide on
one target the nearer one (larger disparity) wins; exact disparity ties
go to the larger source column. Targets no source reaches are holes
(disocclusions) to be filled later.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, UnfilledHoles
from .imgio import RasterImage
from .synth import DisparityMap


@dataclass
class WarpResult:
    """Raw warp output: right image with holes, hole mask, and winner map."""

    right_raw: RasterImage
    hole_mask: np.ndarray  # bool (H, W); True where nothing landed
    source_x: np.ndarray  # int32 (H, W); winning source column, -1 in holes


@dataclass
class StereoSample:
    """A finished training pair: left, right, dense disparity, hole mask."""

    left: RasterImage
    right: RasterImage
    disparity: DisparityMap
    hole_mask: np.ndarray
    provenance: dict = field(default_factory=dict)


def forward_warp(left: RasterImage, disp: DisparityMap) -> WarpResult:
    """Scatter left pixels to the right view under the z-buffer rule.

    Only valid disparity pixels act as sources; targets falling outside
    the image are dropped. The result is independent of traversal order:
    the winner at each target is the lexicographic maximum of
    (disparity, source column) over all candidates.
    """
    if (left.height, left.width) != (disp.height, disp.width):
        raise DimensionMismatch(
            f"image {left.height}x{left.width} vs disparity {disp.height}x{disp.width}"
        )
    H, W = left.height, left.width

    ys, xs = np.nonzero(disp.valid)
    ds = disp.data[ys, xs].astype(np.float64)
    ts = np.floor(xs - ds + 0.5).astype(np.int64)  # round half up
    keep = (ts >= 0) & (ts < W)
    ys, xs, ts = ys[keep], xs[keep], ts[keep]
    ds32 = ds[keep].astype(np.float32)

    # Two passes: first the winning disparity per target, then among the
    # sources that achieve it, the largest source column.
    zbuf = np.full((H, W), -np.inf, dtype=np.float32)
    np.maximum.at(zbuf, (ys, ts), ds32)
    on_top = ds32 == zbuf[ys, ts]

    xbuf = np.full((H, W), -1, dtype=np.int64)
    np.maximum.at(xbuf, (ys[on_top], ts[on_top]), xs[on_top])

    hole = xbuf < 0
    right = np.zeros_like(left.data)
    ty, tx = np.nonzero(~hole)
    right[ty, tx] = left.data[ty, xbuf[ty, tx]]
    return WarpResult(RasterImage(right), hole, xbuf.astype(np.int32))


def hole_mask_image(hole_mask: np.ndarray) -> RasterImage:
    """Encode a boolean hole mask as an 8-bit image, 255 = hole."""
    return RasterImage((hole_mask.astype(np.uint8) * 255)[:, :, None])


def assemble_sample(
    left: RasterImage,
    warp: WarpResult,
    filled_right: RasterImage | None,
    disp: DisparityMap,
    provenance: dict | None = None,
) -> StereoSample:
    """Bundle the pieces into a StereoSample.

    Passing filled_right=None asserts that no filling was needed; if the
    warp still contains holes this raises UnfilledHoles rather than let a
    holey right image through as training data.
    """
    if filled_right is None:
        if warp.hole_mask.any():
            raise UnfilledHoles(
                f"{int(warp.hole_mask.sum())} hole pixels remain and no filled image was given"
            )
        right = warp.right_raw
    else:
        right = filled_right

    shapes = {
        "left": (left.height, left.width),
        "right": (right.height, right.width),
        "disparity": (disp.height, disp.width),
        "hole_mask": warp.hole_mask.shape,
    }
    base = shapes["left"]
    for name, s in shapes.items():
        if tuple(s) != base:
            raise DimensionMismatch(f"{name} shape {s} does not match left {base}")
    return StereoSample(left, right, disp, warp.hole_mask.copy(), dict(provenance or {}))
