"""Shared test helpers: independent reference implementations and fixtures.

The reference implementations here are deliberately slow and literal so
they can serve as oracles for the vectorized library code.
"""

import math

import numpy as np
import pytest

from stereoforge import DisparityMap, RasterImage


def brute_force_warp(left_data, disp_data, disp_valid):
    """Literal per-pixel forward warp with the z-buffer rule.

    Walks every source pixel, computes its target with round-half-up, and
    keeps the candidate with the largest disparity (ties: largest source
    column). Returns (right, hole_mask, source_x).
    """
    H, W = disp_data.shape
    right = np.zeros_like(left_data)
    src = np.full((H, W), -1, dtype=np.int64)
    best = np.full((H, W), -np.inf)
    for y in range(H):
        for x in range(W):
            if not disp_valid[y, x]:
                continue
            d = float(disp_data[y, x])
            t = math.floor(x - d + 0.5)
            if t < 0 or t >= W:
                continue
            if d > best[y, t] or (d == best[y, t] and x > src[y, t]):
                best[y, t] = d
                src[y, t] = x
    for y in range(H):
        for t in range(W):
            if src[y, t] >= 0:
                right[y, t] = left_data[y, src[y, t]]
    return right, src < 0, src


def sgm_reference(cost, p1, p2, dirs):
    """Literal scanline-DP aggregation, averaged over directions.

    Processes pixels in path order per direction; the first pixel of each
    path keeps its raw cost. Float64 throughout.
    """
    H, W, D = cost.shape
    cost = cost.astype(np.float64)
    total = np.zeros((H, W, D))
    for dy, dx in dirs:
        L = np.zeros((H, W, D))
        ys = range(H) if dy >= 0 else range(H - 1, -1, -1)
        xs = range(W) if dx >= 0 else range(W - 1, -1, -1)
        for y in ys:
            for x in xs:
                py, px = y - dy, x - dx
                if 0 <= py < H and 0 <= px < W:
                    prev = L[py, px]
                    mp = prev.min()
                    for d in range(D):
                        cands = [prev[d], mp + p2]
                        if d > 0:
                            cands.append(prev[d - 1] + p1)
                        if d < D - 1:
                            cands.append(prev[d + 1] + p1)
                        L[y, x, d] = cost[y, x, d] + min(cands) - mp
                else:
                    L[y, x] = cost[y, x]
        total += L
    return total / len(dirs)


def census_reference(gray, window):
    """Literal census transform with edge replication."""
    H, W = gray.shape
    pad = window // 2
    padded = np.pad(gray, pad, mode="edge")
    out = np.zeros((H, W), dtype=np.uint64)
    for y in range(H):
        for x in range(W):
            sig = 0
            center = padded[y + pad, x + pad]
            for dy in range(window):
                for dx in range(window):
                    if dy == pad and dx == pad:
                        continue
                    sig = (sig << 1) | int(padded[y + dy, x + dx] < center)
            out[y, x] = sig
    return out


def piecewise_disparity(rng, height, width, lo=10, hi=60, k_min=2, k_max=4):
    """Vertical-strip piecewise-constant integer disparity map."""
    k = int(rng.integers(k_min, k_max + 1))
    cuts = np.sort(rng.choice(np.arange(1, width), size=k - 1, replace=False))
    vals = rng.integers(lo, hi + 1, size=k)
    disp = np.zeros((height, width), np.float32)
    bounds = [0, *cuts.tolist(), width]
    for i in range(k):
        disp[:, bounds[i]:bounds[i + 1]] = vals[i]
    return DisparityMap(disp, np.ones((height, width), bool))


def noise_image(rng, height, width, channels=3):
    """Uniform noise raster; dense texture that census matching loves."""
    data = rng.integers(0, 256, (height, width, channels), dtype=np.int64)
    return RasterImage(data.astype(np.uint8))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
