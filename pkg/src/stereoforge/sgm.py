"""Classical census + semi-global matching, used to sanity-check synthesized pairs.

The matcher runs the standard four stages: census feature extraction,
Hamming-distance cost volume construction, semi-global cost aggregation
along 4 or 8 scanline directions, and winner-take-all disparity
regression with optional parabolic subpixel refinement and a left-right
consistency check. It is deliberately plain; its job is to verify that a
synthesized right view actually matches its left view under the intended
disparity, not to compete on benchmarks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, ImageTooSmall
from .imgio import RasterImage
from .synth import DisparityMap

# Sentinel for "no predecessor on this path"; exactly representable in
# float32 and far above any reachable path cost, so BIG - BIG == 0 and the
# first pixel of every path reduces to its raw matching cost.
_BIG = np.float32(2 ** 28)


@dataclass
class MatchParams:
    """Tuning knobs for the matcher."""

    d_max: int
    census_window: int = 5
    p1: float = 10.0
    p2: float = 120.0
    lr_threshold: float | None = 1.0
    subpixel: bool = False
    paths: int = 8

    def __post_init__(self):
        if self.d_max < 1:
            raise ValueError(f"d_max must be >= 1, got {self.d_max}")
        if self.census_window % 2 == 0 or not 3 <= self.census_window <= 7:
            raise ValueError(
                f"census_window must be odd and in [3, 7], got {self.census_window}"
            )
        if not (0 < self.p1 <= self.p2):
            raise ValueError(f"need 0 < p1 <= p2, got p1={self.p1} p2={self.p2}")
        if self.paths not in (4, 8):
            raise ValueError(f"paths must be 4 or 8, got {self.paths}")
        if self.lr_threshold is not None and not self.lr_threshold > 0:
            raise ValueError(f"lr_threshold must be positive or None, got {self.lr_threshold}")


@dataclass
class CensusMap:
    """Per-pixel census bit signatures plus the number of bits used."""

    data: np.ndarray  # uint64 (H, W)
    n_bits: int


@dataclass
class CostVolume:
    """(H, W, d_max+1) matching costs; n_bits is the maximum census cost."""

    data: np.ndarray
    n_bits: int


def census_transform(img, window: int = 5) -> CensusMap:
    """Census transform: each pixel becomes a bitstring of neighbor comparisons.

    Neighbors are scanned row-major inside the window (center skipped);
    bit = 1 where neighbor < center. The first neighbor lands in the most
    significant position. Borders are handled by edge replication, so the
    signature is defined for every pixel. Window is capped at 7 so the
    signature fits in 64 bits.
    """
    if isinstance(img, RasterImage):
        if img.channels != 1:
            raise ValueError("census_transform expects a grayscale image")
        a = img.data[:, :, 0]
    else:
        a = np.asarray(img)
        if a.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {a.shape}")
        a = a.astype(np.uint8, copy=False)
    if window % 2 == 0 or not 3 <= window <= 7:
        raise ValueError(f"window must be odd and in [3, 7], got {window}")
    H, W = a.shape
    if H < window or W < window:
        raise ImageTooSmall(f"image {H}x{W} smaller than census window {window}")

    pad = window // 2
    padded = np.pad(a, pad, mode="edge")
    sig = np.zeros((H, W), dtype=np.uint64)
    one = np.uint64(1)
    for dy in range(window):
        for dx in range(window):
            if dy == pad and dx == pad:
                continue
            neighbor = padded[dy:dy + H, dx:dx + W]
            sig = (sig << one) | (neighbor < a).astype(np.uint64)
    return CensusMap(sig, window * window - 1)


def build_cost_volume(left_sig: CensusMap, right_sig: CensusMap, d_max: int) -> CostVolume:
    """Hamming-distance cost volume over disparity candidates 0..d_max.

    cost(y, x, d) = popcount(left_sig[y, x] ^ right_sig[y, x - d]); where
    x - d falls off the image the cost is pinned at the maximum (n_bits),
    which keeps out-of-range candidates losing without special-casing.
    """
    if left_sig.data.shape != right_sig.data.shape:
        raise DimensionMismatch(
            f"census maps {left_sig.data.shape} vs {right_sig.data.shape}"
        )
    if left_sig.n_bits != right_sig.n_bits:
        raise ValueError("census maps built with different windows")
    if d_max < 1:
        raise ValueError(f"d_max must be >= 1, got {d_max}")
    H, W = left_sig.data.shape
    n_bits = left_sig.n_bits
    vol = np.full((H, W, d_max + 1), n_bits, dtype=np.uint16)
    for d in range(min(d_max + 1, W)):
        xored = left_sig.data[:, d:] ^ right_sig.data[:, :W - d]
        vol[:, d:, d] = np.bitwise_count(xored)
    return CostVolume(vol, n_bits)


def _sweep_down(cost: np.ndarray, lateral: int, p1: np.float32, p2: np.float32) -> np.ndarray:
    """Aggregate top-to-bottom; predecessor of (y, x) is (y-1, x-lateral).

    Standard scanline recurrence: the path cost is the raw cost plus the
    cheapest of staying at the same disparity, moving one step (penalty
    p1), or jumping (penalty p2 over the predecessor minimum), minus the
    predecessor minimum to keep values bounded.
    """
    H, W, D = cost.shape
    out = np.empty((H, W, D), dtype=np.float32)
    out[0] = cost[0]
    for y in range(1, H):
        prev = out[y - 1]
        if lateral != 0:
            shifted = np.full((W, D), _BIG, dtype=np.float32)
            if lateral > 0:
                shifted[lateral:] = prev[:-lateral]
            else:
                shifted[:lateral] = prev[-lateral:]
            prev = shifted
        min_prev = prev.min(axis=1, keepdims=True)
        down = np.empty_like(prev)
        down[:, 0] = _BIG
        down[:, 1:] = prev[:, :-1]
        up = np.empty_like(prev)
        up[:, -1] = _BIG
        up[:, :-1] = prev[:, 1:]
        cand = np.minimum(np.minimum(prev, min_prev + p2), np.minimum(down, up) + p1)
        out[y] = cost[y] + (cand - min_prev)
    return out


def _aggregate_direction(cost: np.ndarray, dy: int, dx: int,
                         p1: np.float32, p2: np.float32) -> np.ndarray:
    """One directional pass, reduced to a top-to-bottom sweep by flips/transpose."""
    if dy == 0:
        # horizontal: transpose so columns become rows
        swapped = cost.transpose(1, 0, 2)
        if dx < 0:
            res = _sweep_down(swapped[::-1], 0, p1, p2)[::-1]
        else:
            res = _sweep_down(swapped, 0, p1, p2)
        return res.transpose(1, 0, 2)
    if dy < 0:
        return _sweep_down(cost[::-1], dx, p1, p2)[::-1]
    return _sweep_down(cost, dx, p1, p2)


_DIRS_4 = ((0, 1), (0, -1), (1, 0), (-1, 0))
_DIRS_8 = _DIRS_4 + ((1, 1), (1, -1), (-1, 1), (-1, -1))


def sgm_aggregate(vol: CostVolume, p1: float, p2: float, paths: int = 8) -> CostVolume:
    """Semi-global aggregation over 4 or 8 scanline directions.

    Returns the mean of the per-direction path costs, so with p1 = p2 = 0
    the result equals the input volume exactly regardless of path count.
    """
    if paths not in (4, 8):
        raise ValueError(f"paths must be 4 or 8, got {paths}")
    if p1 < 0 or p2 < p1:
        raise ValueError(f"need 0 <= p1 <= p2, got p1={p1} p2={p2}")
    cost = np.ascontiguousarray(vol.data, dtype=np.float32)
    p1f, p2f = np.float32(p1), np.float32(p2)
    dirs = _DIRS_8 if paths == 8 else _DIRS_4
    acc = np.zeros_like(cost)
    for dy, dx in dirs:
        acc += _aggregate_direction(cost, dy, dx, p1f, p2f)
    acc /= np.float32(paths)
    return CostVolume(acc, vol.n_bits)


def wta_disparity(vol: CostVolume, subpixel: bool = False) -> DisparityMap:
    """Winner-take-all over the disparity axis; exact ties go to the smaller d.

    With subpixel=True a parabola is fit through the winning cost and its
    two disparity neighbors; the refinement is skipped at the volume edges
    and wherever the parabola is not convex, and is clamped to +-0.5.
    """
    data = vol.data
    d = np.argmin(data, axis=2)
    disp = d.astype(np.float32)
    if subpixel:
        D = data.shape[2]
        c = data.astype(np.float32, copy=False)
        idx = d[:, :, None]
        c0 = np.take_along_axis(c, idx, axis=2)[:, :, 0]
        cm = np.take_along_axis(c, np.maximum(idx - 1, 0), axis=2)[:, :, 0]
        cp = np.take_along_axis(c, np.minimum(idx + 1, D - 1), axis=2)[:, :, 0]
        denom = cm - 2.0 * c0 + cp
        ok = (d > 0) & (d < D - 1) & (denom > 0)
        delta = np.zeros_like(disp)
        np.divide(cm - cp, 2.0 * denom, out=delta, where=ok)
        disp = disp + np.clip(delta, -0.5, 0.5)
        disp = np.clip(disp, 0.0, float(D - 1))
    return DisparityMap(disp, np.ones(disp.shape, dtype=bool))


def lr_check(disp_left: DisparityMap, disp_right: DisparityMap,
             threshold: float = 1.0) -> DisparityMap:
    """Invalidate left-view pixels whose right-view disparity disagrees.

    For each valid left pixel, look up the right map at x - round(d); the
    pixel survives only if that location is inside the image, valid, and
    within `threshold` of the left disparity.
    """
    if disp_left.data.shape != disp_right.data.shape:
        raise DimensionMismatch(
            f"disparity maps {disp_left.data.shape} vs {disp_right.data.shape}"
        )
    if not threshold > 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    H, W = disp_left.data.shape
    cols = np.broadcast_to(np.arange(W)[None, :], (H, W))
    rows = np.broadcast_to(np.arange(H)[:, None], (H, W))
    xr = cols - np.rint(disp_left.data).astype(np.int64)
    inside = (xr >= 0) & (xr < W)
    xr_safe = np.clip(xr, 0, W - 1)
    partner = disp_right.data[rows, xr_safe]
    partner_ok = disp_right.valid[rows, xr_safe]
    consistent = (
        disp_left.valid
        & inside
        & partner_ok
        & (np.abs(disp_left.data - partner) <= threshold)
    )
    return DisparityMap(disp_left.data.copy(), consistent)


def _to_gray(img: RasterImage) -> np.ndarray:
    return img.data[:, :, 0] if img.channels == 1 else img.to_gray()


def match(left: RasterImage, right: RasterImage, params: MatchParams) -> DisparityMap:
    """Full pipeline: census, cost volume, aggregation, WTA, optional LR check.

    The right-view disparity needed for the consistency check is computed
    by matching the horizontally mirrored pair with roles swapped, which
    reuses the same left-to-right machinery.
    """
    if (left.height, left.width) != (right.height, right.width):
        raise DimensionMismatch(
            f"left {left.height}x{left.width} vs right {right.height}x{right.width}"
        )
    gl = _to_gray(left)
    gr = _to_gray(right)

    def core(a: np.ndarray, b: np.ndarray) -> DisparityMap:
        ca = census_transform(a, params.census_window)
        cb = census_transform(b, params.census_window)
        vol = build_cost_volume(ca, cb, params.d_max)
        agg = sgm_aggregate(vol, params.p1, params.p2, params.paths)
        return wta_disparity(agg, params.subpixel)

    disp_left = core(gl, gr)
    if params.lr_threshold is None:
        return disp_left
    mirrored = core(gr[:, ::-1], gl[:, ::-1])
    disp_right = DisparityMap(
        np.ascontiguousarray(mirrored.data[:, ::-1]),
        np.ascontiguousarray(mirrored.valid[:, ::-1]),
    )
    return lr_check(disp_left, disp_right, params.lr_threshold)
