"""End-to-end synthesis pipeline: resize, convert, warp, fill, write.

Determinism contract: every sample's randomness comes from a private
generator seeded by a stable hash of (global_seed, sample index). Outputs
are therefore byte-identical across reruns and across worker counts. The
STEREOFORGE_SEED environment variable, when set, overrides the configured
global seed at config-load time.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields as dataclass_fields
from pathlib import Path

import numpy as np
import yaml
from PIL import Image

from .errors import DimensionMismatch, ImageTooSmall, StereoForgeError
from .fill import FillConfig, fill_holes
from .imgio import FloatMap, RasterImage, read_float_map, read_image, write_image, write_pfm
from .synth import (
    DepthMap,
    DisparityMap,
    SynthConfig,
    depth_to_disparity,
    sample_scale,
    values_stats,
)
from .warp import StereoSample, assemble_sample, forward_warp, hole_mask_image

SEED_ENV = "STEREOFORGE_SEED"

_CONFIG_KEYS = {"synth", "fill", "min_width", "min_height", "crop", "workers", "global_seed"}


@dataclass
class PipelineConfig:
    """Everything run_batch needs, mirroring the YAML config layout."""

    synth: SynthConfig = field(default_factory=SynthConfig)
    fill: FillConfig = field(default_factory=FillConfig)
    min_width: int = 768
    min_height: int = 384
    crop: tuple = (352, 640)  # (height, width)
    workers: int = 1
    global_seed: int = 0

    def __post_init__(self):
        if self.min_width < 1 or self.min_height < 1:
            raise ValueError("minimum dimensions must be positive")
        self.crop = tuple(int(c) for c in self.crop)
        if len(self.crop) != 2 or min(self.crop) < 1:
            raise ValueError(f"crop must be a positive (height, width) pair, got {self.crop}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")


def load_config(path=None) -> PipelineConfig:
    """Build a PipelineConfig from a YAML file (or defaults when path is None).

    STEREOFORGE_SEED in the environment overrides global_seed from the file.
    """
    doc = {}
    if path is not None:
        loaded = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ValueError(f"{path}: config root must be a mapping")
        doc = loaded
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    for section, cls in (("synth", SynthConfig), ("fill", FillConfig)):
        sub = doc.get(section, {})
        if not isinstance(sub, dict):
            raise ValueError(f"config section '{section}' must be a mapping")
        bad = set(sub) - {f.name for f in dataclass_fields(cls)}
        if bad:
            raise ValueError(f"unknown keys in config section '{section}': {sorted(bad)}")

    cfg = PipelineConfig(
        synth=SynthConfig(**doc.get("synth", {})),
        fill=FillConfig(**doc.get("fill", {})),
        min_width=int(doc.get("min_width", 768)),
        min_height=int(doc.get("min_height", 384)),
        crop=tuple(doc.get("crop", (352, 640))),
        workers=int(doc.get("workers", 1)),
        global_seed=int(doc.get("global_seed", 0)),
    )
    env_seed = os.environ.get(SEED_ENV)
    if env_seed is not None:
        try:
            cfg.global_seed = int(env_seed)
        except ValueError as e:
            raise ValueError(f"{SEED_ENV} must be an integer, got {env_seed!r}") from e
    return cfg


def stable_seed(global_seed: int, index) -> int:
    """Deterministic per-sample seed; stable across processes and platforms."""
    digest = hashlib.sha256(f"{global_seed}:{index}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


# --------------------------------------------------------------------------
# Geometry
# --------------------------------------------------------------------------


def resize_min_dims(image: RasterImage, depth: FloatMap | None = None,
                    min_width: int = 768, min_height: int = 384):
    """Upscale (never downscale) so width >= min_width and height >= min_height.

    Aspect ratio is preserved: the binding dimension is set exactly to its
    minimum and the other is derived by rounding, so the derived axis is
    within half a pixel of the true ratio. Images are resized bilinearly;
    the depth map and its validity mask use nearest neighbor so no values
    are invented at object borders.

    Returns (image, depth) resized; depth may be None.
    """
    h, w = image.height, image.width
    fw = min_width / w
    fh = min_height / h
    f = max(fw, fh)
    if f <= 1.0:
        return image, depth
    if fw >= fh:
        new_w = min_width
        new_h = int(math.floor(h * f + 0.5))
    else:
        new_h = min_height
        new_w = int(math.floor(w * f + 0.5))
    new_w = max(new_w, min_width)
    new_h = max(new_h, min_height)

    img2 = _resize_bilinear(image, new_w, new_h)
    depth2 = _resize_nearest(depth, new_w, new_h) if depth is not None else None
    return img2, depth2


def _resize_bilinear(image: RasterImage, new_w: int, new_h: int) -> RasterImage:
    arr = image.data[:, :, 0] if image.channels == 1 else image.data
    pil = Image.fromarray(arr)
    out = np.asarray(pil.resize((new_w, new_h), Image.BILINEAR), dtype=np.uint8)
    if out.ndim == 2:
        out = out[:, :, None]
    return RasterImage(out)


def _resize_nearest(fmap: FloatMap, new_w: int, new_h: int) -> FloatMap:
    h, w = fmap.height, fmap.width
    iy = np.floor((np.arange(new_h) + 0.5) * (h / new_h)).astype(np.int64).clip(0, h - 1)
    ix = np.floor((np.arange(new_w) + 0.5) * (w / new_w)).astype(np.int64).clip(0, w - 1)
    grid = np.ix_(iy, ix)
    return type(fmap)(fmap.data[grid].copy(), fmap.valid[grid].copy())


def augment_crop(
    sample: StereoSample,
    rng: np.random.Generator,
    crop: tuple = (352, 640),
    jitter: bool = False,
    erase: bool = False,
) -> StereoSample:
    """Random crop shared by all rasters, plus optional photometric noise.

    The same window is cut from left, right, disparity, and hole mask, so
    correspondences (and disparity values) are untouched. Jitter applies
    identical brightness/contrast to both views; random erasing hits the
    right view only, simulating content the left view cannot see.
    """
    ch, cw = int(crop[0]), int(crop[1])
    H, W = sample.left.height, sample.left.width
    if H < ch or W < cw:
        raise ImageTooSmall(f"sample {H}x{W} smaller than crop {ch}x{cw}")

    y0 = int(rng.integers(0, H - ch + 1))
    x0 = int(rng.integers(0, W - cw + 1))
    sl = np.s_[y0:y0 + ch, x0:x0 + cw]

    left = sample.left.data[sl].copy()
    right = sample.right.data[sl].copy()
    disp = DisparityMap(sample.disparity.data[sl].copy(), sample.disparity.valid[sl].copy())
    holes = sample.hole_mask[sl].copy()

    info: dict = {"window": [y0, x0, ch, cw]}
    if jitter:
        brightness = float(rng.uniform(0.8, 1.2))
        contrast = float(rng.uniform(0.8, 1.2))
        for view in (left, right):
            v = view.astype(np.float64) * brightness
            v = (v - 128.0) * contrast + 128.0
            view[:] = np.clip(np.rint(v), 0, 255).astype(np.uint8)
        info["jitter"] = [brightness, contrast]
    if erase:
        frac = float(rng.uniform(0.02, 0.2))
        aspect = float(rng.uniform(0.3, 1.0 / 0.3))
        area = frac * ch * cw
        eh = int(np.clip(round(math.sqrt(area * aspect)), 1, ch))
        ew = int(np.clip(round(math.sqrt(area / aspect)), 1, cw))
        ey = int(rng.integers(0, ch - eh + 1))
        ex = int(rng.integers(0, cw - ew + 1))
        noise = rng.integers(0, 256, size=(eh, ew, right.shape[2]), dtype=np.int64)
        right[ey:ey + eh, ex:ex + ew] = noise.astype(np.uint8)
        info["erase"] = [ey, ex, eh, ew]

    prov = dict(sample.provenance)
    prov["augment"] = info
    return StereoSample(RasterImage(left), RasterImage(right), disp, holes, prov)


# --------------------------------------------------------------------------
# Single-sample synthesis
# --------------------------------------------------------------------------


def synth_pair(image_path, depth_path, cfg: PipelineConfig, seed: int | None = None):
    """Synthesize one training pair from an image and its depth map.

    Returns (StereoSample, sidecar dict). The sidecar records everything
    needed to reproduce the sample: paths, seed, drawn scale, scale mode,
    and fill details. With seed=None a stable seed is derived from the
    global seed and the image path.
    """
    image_path = str(image_path)
    depth_path = str(depth_path)
    img = read_image(Path(image_path).read_bytes())

    try:
        raw_depth = read_float_map(depth_path)
    except StereoForgeError as e:
        raise type(e)(f"{depth_path}: {e}") from e
    if (raw_depth.height, raw_depth.width) != (img.height, img.width):
        raise DimensionMismatch(
            f"{image_path} is {img.height}x{img.width} but {depth_path} is "
            f"{raw_depth.height}x{raw_depth.width}"
        )
    # Nonpositive depths (sky at 0, sentinel negatives) are unusable.
    depth = DepthMap(raw_depth.data, raw_depth.valid & (raw_depth.data > 0))

    img, depth = resize_min_dims(img, depth, cfg.min_width, cfg.min_height)

    if seed is None:
        seed = stable_seed(cfg.global_seed, Path(image_path).name)
    rng = np.random.default_rng(seed)

    s = sample_scale(cfg.synth, rng)
    disp = depth_to_disparity(depth, s, cfg.synth.scale_mode)
    warped = forward_warp(img, disp)

    n_holes = int(warped.hole_mask.sum())
    if n_holes:
        filled, fill_info = fill_holes(warped.right_raw, warped.hole_mask, cfg.fill, rng)
    else:
        filled, fill_info = None, {"strategy": cfg.fill.strategy}

    sidecar = {
        "source_image": image_path,
        "depth_file": depth_path,
        "seed": int(seed),
        "scale": s,
        "scale_mode": cfg.synth.scale_mode,
        "size": [img.width, img.height],
        "hole_pixels": n_holes,
        "fill": fill_info,
    }
    sample = assemble_sample(img, warped, filled, disp, provenance=sidecar)
    return sample, sidecar


# --------------------------------------------------------------------------
# Batch driver
# --------------------------------------------------------------------------


def parse_list_file(path) -> list:
    """Read '<image> <depth>' lines; blanks and #-comments are skipped."""
    entries = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected '<image> <depth>', got {line!r}")
        entries.append((parts[0], parts[1]))
    return entries


def write_sample(sample: StereoSample, sidecar: dict, out_dir, stem: str) -> None:
    """Write the five per-sample files with deterministic bytes."""
    out = Path(out_dir)
    (out / f"{stem}_left.png").write_bytes(write_image(sample.left))
    (out / f"{stem}_right.png").write_bytes(write_image(sample.right))
    (out / f"{stem}_disp.pfm").write_bytes(write_pfm(sample.disparity))
    (out / f"{stem}_holes.png").write_bytes(write_image(hole_mask_image(sample.hole_mask)))
    (out / f"{stem}_meta.json").write_text(
        json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def run_batch(list_path, cfg: PipelineConfig, out_dir) -> dict:
    """Synthesize every pair in a list file into out_dir.

    Output layout per sample i: {i:06d}_left.png, _right.png, _disp.pfm,
    _holes.png (255 = hole), _meta.json, plus one summary.json for the
    batch. A failing sample is recorded in the summary and does not stop
    the batch. The output tree is byte-identical for a given (list,
    config, global seed) regardless of the worker count.
    """
    entries = parse_list_file(list_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def one(task):
        i, (image_path, depth_path) = task
        try:
            sample, sidecar = synth_pair(image_path, depth_path, cfg,
                                         seed=stable_seed(cfg.global_seed, i))
            write_sample(sample, sidecar, out, f"{i:06d}")
            return i, sample.disparity.valid_values(), None
        except (StereoForgeError, OSError, ValueError) as e:
            return i, None, {
                "index": i,
                "image": image_path,
                "depth": depth_path,
                "error": f"{type(e).__name__}: {e}",
            }

    tasks = list(enumerate(entries))
    if cfg.workers == 1:
        results = [one(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(one, tasks))

    results.sort(key=lambda r: r[0])
    failures = [info for _, _, info in results if info is not None]
    value_chunks = [vals for _, vals, _ in results if vals is not None]

    stats_doc = None
    if value_chunks:
        allvals = np.concatenate(value_chunks)
        if allvals.size:
            st = values_stats(allvals)
            stats_doc = {"min": st.min, "max": st.max, "mean": st.mean, "median": st.median}

    summary = {
        "n_samples": len(entries),
        "n_ok": len(entries) - len(failures),
        "n_failed": len(failures),
        "failures": failures,
        "disparity_stats": stats_doc,
        "global_seed": cfg.global_seed,
    }
    (out / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return summary
