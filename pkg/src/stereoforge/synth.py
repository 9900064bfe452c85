"""Depth-to-disparity conversion and disparity statistics.

A depth map from any source (sensor, mono network) is turned into a
pseudo disparity map by

    disp = s * depth_max / depth

with the scale s drawn uniformly from a configured range. Because only
the ratio depth_max / depth enters, the conversion is invariant to the
global scale of the depth map, which is what makes relative (scale-free)
depth usable here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoValidPixels
from .imgio import FloatMap

SCALE_MODES = ("literal", "max-normalized")

# Histogram display range for disparity distributions, in pixels.
_HIST_CAP = 512.0


@dataclass
class SynthConfig:
    """Scale-sampling settings for pseudo disparity synthesis."""

    disp_min: float = 50.0
    disp_max: float = 192.0
    scale_mode: str = "literal"
    seed: int = 0

    def __post_init__(self):
        if not (0 < self.disp_min <= self.disp_max):
            raise ValueError(
                f"need 0 < disp_min <= disp_max, got [{self.disp_min}, {self.disp_max}]"
            )
        if self.scale_mode not in SCALE_MODES:
            raise ValueError(f"scale_mode must be one of {SCALE_MODES}, got {self.scale_mode!r}")


@dataclass
class DepthMap(FloatMap):
    """FloatMap whose valid samples are strictly positive depths."""

    def __post_init__(self):
        super().__post_init__()
        if self.valid.any() and not (self.data[self.valid] > 0).all():
            raise ValueError("valid depth samples must be strictly positive")


@dataclass
class DisparityMap(FloatMap):
    """FloatMap whose valid samples are nonnegative disparities."""

    def __post_init__(self):
        super().__post_init__()
        if self.valid.any() and not (self.data[self.valid] >= 0).all():
            raise ValueError("valid disparity samples must be nonnegative")


def sample_scale(cfg: SynthConfig, rng: np.random.Generator) -> float:
    """Draw the disparity scale s uniformly from [disp_min, disp_max]."""
    if cfg.disp_min == cfg.disp_max:
        return float(cfg.disp_min)
    return float(rng.uniform(cfg.disp_min, cfg.disp_max))


def depth_to_disparity(depth: DepthMap | FloatMap, s: float, mode: str = "literal") -> DisparityMap:
    """Convert depth to pseudo disparity, disp = s * depth_max / depth.

    mode "literal" uses the formula as written: the farthest valid pixel
    (depth == depth_max) gets disparity exactly s, nearer pixels get more.
    mode "max-normalized" rescales afterwards so the *largest* disparity
    equals s instead. Invalid pixels stay invalid with data 0.
    """
    if not (s > 0) or not math.isfinite(s):
        raise ValueError(f"scale s must be a positive finite number, got {s}")
    if mode not in SCALE_MODES:
        raise ValueError(f"mode must be one of {SCALE_MODES}, got {mode!r}")
    mask = depth.valid
    if not mask.any():
        raise NoValidPixels("depth map has no valid pixels")

    vals = depth.data.astype(np.float64)
    if not (vals[mask] > 0).all():
        raise ValueError("valid depth samples must be strictly positive")
    dmax = vals[mask].max()

    out = np.zeros(depth.data.shape, dtype=np.float64)
    out[mask] = (s * dmax) / vals[mask]
    if mode == "max-normalized":
        peak = out[mask].max()
        out[mask] *= s / peak
    return DisparityMap(out.astype(np.float32), mask.copy())


@dataclass
class DispStats:
    """Summary statistics plus a fixed-width histogram of valid disparities."""

    min: float
    max: float
    mean: float
    median: float
    bin_edges: np.ndarray
    fractions: np.ndarray

    def as_dict(self) -> dict:
        return {
            "min": self.min,
            "max": self.max,
            "mean": self.mean,
            "median": self.median,
            "bin_edges": [float(e) for e in self.bin_edges],
            "fractions": [float(f) for f in self.fractions],
        }


def disparity_stats(disp: FloatMap, bin_width: float = 1.0) -> DispStats:
    """Compute min/max/mean/median and a histogram over the valid pixels.

    The median is the lower-middle order statistic, so it is always an
    observed sample value. Histogram bins start at 0; the covered range is
    capped at 512 px and anything beyond is clipped into the last bin, so
    the bin fractions always sum to 1.
    """
    return values_stats(disp.valid_values(), bin_width=bin_width)


def values_stats(values: np.ndarray, bin_width: float = 1.0) -> DispStats:
    """disparity_stats over a flat array of already-extracted valid samples."""
    if bin_width <= 0:
        raise ValueError(f"bin_width must be positive, got {bin_width}")
    vals = np.asarray(values, dtype=np.float64).ravel()
    if vals.size == 0:
        raise NoValidPixels("no valid disparity samples")

    vmin = float(vals.min())
    vmax = float(vals.max())
    mean = float(vals.mean())
    median = float(np.sort(vals)[(vals.size - 1) // 2])

    n_bins = max(int(math.ceil(min(vmax, _HIST_CAP) / bin_width)), 1)
    hi = n_bins * bin_width
    edges = np.linspace(0.0, hi, n_bins + 1)
    counts, _ = np.histogram(np.minimum(vals, hi), bins=edges)
    fractions = counts.astype(np.float64) / vals.size
    return DispStats(vmin, vmax, mean, median, edges, fractions)


def emit_histogram_svg(stats: DispStats, path=None, title: str = "Disparity distribution") -> str:
    """Render the histogram as a small standalone SVG string.

    Output is deterministic: fixed canvas, fixed float formatting, no
    timestamps. When path is given the SVG is also written there.
    """
    width, height = 720, 420
    ml, mr, mt, mb = 60, 20, 40, 50
    cw, ch = width - ml - mr, height - mt - mb

    frac = stats.fractions
    peak = float(frac.max()) if frac.size else 1.0
    if peak <= 0:
        peak = 1.0
    lo = float(stats.bin_edges[0])
    hi = float(stats.bin_edges[-1])
    span = hi - lo if hi > lo else 1.0

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{title}</text>',
    ]
    for i, f in enumerate(frac):
        x0 = ml + cw * (float(stats.bin_edges[i]) - lo) / span
        x1 = ml + cw * (float(stats.bin_edges[i + 1]) - lo) / span
        bh = ch * float(f) / peak
        parts.append(
            f'<rect x="{x0:.2f}" y="{mt + ch - bh:.2f}" width="{max(x1 - x0, 0.5):.2f}" '
            f'height="{bh:.2f}" fill="#4878a8"/>'
        )
    # axes
    parts.append(
        f'<line x1="{ml}" y1="{mt + ch}" x2="{ml + cw}" y2="{mt + ch}" stroke="black"/>'
    )
    parts.append(f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ch}" stroke="black"/>')
    for t in range(5):
        xv = lo + span * t / 4
        xp = ml + cw * t / 4
        parts.append(
            f'<text x="{xp:.1f}" y="{mt + ch + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{xv:.1f}</text>'
        )
        yv = 100.0 * peak * t / 4
        yp = mt + ch - ch * t / 4
        parts.append(
            f'<text x="{ml - 8}" y="{yp + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{yv:.2f}%</text>'
        )
    parts.append(
        f'<text x="{ml + cw / 2:.1f}" y="{height - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">disparity (px)</text>'
    )
    stat_line = (
        f"min {stats.min:.3f}  max {stats.max:.3f}  mean {stats.mean:.3f}  "
        f"median {stats.median:.3f}"
    )
    parts.append(
        f'<text x="{width - mr}" y="24" text-anchor="end" '
        f'font-family="sans-serif" font-size="11">{stat_line}</text>'
    )
    parts.append("</svg>")
    svg = "\n".join(parts) + "\n"
    if path is not None:
        from pathlib import Path

        Path(path).write_text(svg, encoding="utf-8")
    return svg
