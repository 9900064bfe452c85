"""Disparity evaluation metrics and four-benchmark mean bookkeeping.

All pixel metrics are computed over the pixels where both prediction and
ground truth are valid. Bad-tau uses a strict comparison: an error of
exactly tau pixels is not an outlier.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from decimal import Decimal, ROUND_HALF_UP
from pathlib import Path

import numpy as np

from .errors import ArityMismatch, DimensionMismatch, NoOverlap
from .imgio import FloatMap, RasterImage

# The four evaluation benchmarks whose errors are averaged into the
# headline number, in canonical order.
BENCHMARKS = ("kitti12", "kitti15", "middlebury", "eth3d")


def _overlap_mask(pred: FloatMap, gt: FloatMap) -> np.ndarray:
    if pred.data.shape != gt.data.shape:
        raise DimensionMismatch(f"pred {pred.data.shape} vs gt {gt.data.shape}")
    mask = pred.valid & gt.valid
    if not mask.any():
        raise NoOverlap("no pixel is valid in both prediction and ground truth")
    return mask


def epe(pred: FloatMap, gt: FloatMap) -> float:
    """Mean absolute disparity error over mutually valid pixels."""
    mask = _overlap_mask(pred, gt)
    diff = pred.data[mask].astype(np.float64) - gt.data[mask].astype(np.float64)
    return float(np.abs(diff).mean())


def bad_tau(pred: FloatMap, gt: FloatMap, tau: float) -> float:
    """Percentage of mutually valid pixels with |error| strictly above tau."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    mask = _overlap_mask(pred, gt)
    err = np.abs(pred.data[mask].astype(np.float64) - gt.data[mask].astype(np.float64))
    return float(100.0 * (err > tau).mean())


def d1_all(pred: FloatMap, gt: FloatMap, official: bool = False) -> float:
    """Outlier percentage at the 3 px level.

    Default is the plain strict 3 px threshold. official=True additionally
    requires the error to exceed 5% of the true disparity magnitude, the
    convention used by the KITTI leaderboard.
    """
    if not official:
        return bad_tau(pred, gt, 3.0)
    mask = _overlap_mask(pred, gt)
    p = pred.data[mask].astype(np.float64)
    g = gt.data[mask].astype(np.float64)
    err = np.abs(p - g)
    outlier = (err > 3.0) & (err > 0.05 * np.abs(g))
    return float(100.0 * outlier.mean())


@dataclass
class MetricReport:
    """All standard metrics for one prediction/ground-truth pair."""

    epe: float
    bad: dict
    d1_all: float
    n_valid: int
    coverage: float


def evaluate_pair(pred: FloatMap, gt: FloatMap, taus=(1.0, 2.0, 3.0)) -> MetricReport:
    mask = _overlap_mask(pred, gt)
    n_valid = int(mask.sum())
    gt_valid = int(gt.valid.sum())
    coverage = n_valid / gt_valid if gt_valid else 0.0
    return MetricReport(
        epe=epe(pred, gt),
        bad={float(t): bad_tau(pred, gt, t) for t in taus},
        d1_all=d1_all(pred, gt),
        n_valid=n_valid,
        coverage=coverage,
    )


# --------------------------------------------------------------------------
# Four-benchmark mean
# --------------------------------------------------------------------------


@dataclass
class MeanResult:
    """Raw arithmetic mean and its two-decimal half-up rounding."""

    raw: float
    rounded: float


def dataset_mean(values) -> MeanResult:
    """Arithmetic mean of exactly four benchmark errors.

    Rounding goes through the decimal repr so that values like 7.635,
    which sit just below the binary .005 boundary, still round half-up to
    7.64 the way a human computing from the printed numbers would.
    """
    vals = [float(v) for v in values]
    if len(vals) != 4:
        raise ArityMismatch(f"need exactly 4 values, got {len(vals)}")
    if not all(math.isfinite(v) for v in vals):
        raise ValueError(f"values must be finite, got {vals}")
    raw = math.fsum(vals) / 4.0
    rounded = float(Decimal(repr(raw)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))
    return MeanResult(raw, rounded)


def mean_matches_reported(values, reported: float, tol: float = 0.005) -> bool:
    """True when the recomputed mean agrees with a reported two-decimal value.

    Used to audit published result tables; a False return flags a row
    whose printed mean cannot be reproduced from its own four cells.
    """
    raw = dataset_mean(values).raw
    return abs(raw - float(reported)) <= tol + 1e-9


# --------------------------------------------------------------------------
# Half-resolution evaluation
# --------------------------------------------------------------------------


def half_resolution(x):
    """Downsample to half resolution for half-res evaluation protocols.

    Images are 2x2 box filtered. Float maps (disparities) are subsampled
    at even indices and their values halved, since horizontal offsets
    shrink with the image; validity is preserved only where the source
    pixel was valid. Requires at least 2x2 input.
    """
    if isinstance(x, RasterImage):
        if x.height < 2 or x.width < 2:
            raise ValueError("need at least 2x2 to halve")
        h2, w2 = x.height // 2, x.width // 2
        a = x.data[: h2 * 2, : w2 * 2].astype(np.float64)
        block = a.reshape(h2, 2, w2, 2, x.channels).mean(axis=(1, 3))
        return RasterImage(np.clip(np.rint(block), 0, 255).astype(np.uint8))
    if isinstance(x, FloatMap):
        if x.height < 2 or x.width < 2:
            raise ValueError("need at least 2x2 to halve")
        h2, w2 = x.height // 2, x.width // 2
        data = x.data[0::2, 0::2][:h2, :w2] * np.float32(0.5)
        valid = x.valid[0::2, 0::2][:h2, :w2].copy()
        return type(x)(data, valid)
    raise TypeError(f"cannot halve {type(x).__name__}")


# --------------------------------------------------------------------------
# Evaluation records (the eval -> rank interchange format)
# --------------------------------------------------------------------------


@dataclass
class EvalRecord:
    """One (model, dataset, metric) measurement."""

    model_id: str
    dataset_id: str
    metric: str
    value: float
    n_valid: int = 0
    coverage: float = 1.0


def write_records_jsonl(records, path) -> None:
    """Append-free write: one JSON object per line, in input order."""
    lines = [json.dumps(asdict(r), sort_keys=True) for r in records]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_records_jsonl(path) -> list:
    records = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as e:
            raise ValueError(f"{path}:{lineno}: bad JSON: {e}") from e
        records.append(
            EvalRecord(
                model_id=str(doc["model_id"]),
                dataset_id=str(doc["dataset_id"]),
                metric=str(doc["metric"]),
                value=float(doc["value"]),
                n_valid=int(doc.get("n_valid", 0)),
                coverage=float(doc.get("coverage", 1.0)),
            )
        )
    return records
