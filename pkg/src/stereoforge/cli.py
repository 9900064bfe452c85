"""Command line interface.

Subcommands: synth, stats, eval, rank, mixplan, match, fill. Exit codes:
0 success, 1 batch completed with per-sample failures, 2 bad input.
"""

from __future__ import annotations

import argparse
import glob
import json
import sys
import tempfile
from pathlib import Path

import numpy as np

from .errors import StereoForgeError
from .fill import STRATEGIES, FillConfig, fill_holes
from .imgio import read_float_map, read_image, write_image, write_pfm
from .metrics import (
    EvalRecord,
    bad_tau,
    d1_all,
    epe,
    half_resolution,
)
from .mixing import DatasetRef, RankedList, build_mix, emit_manifest, rank_datasets
from .pipeline import load_config, run_batch
from .sgm import MatchParams, match
from .synth import emit_histogram_svg, values_stats


def _emit(doc: dict) -> None:
    print(json.dumps(doc, indent=2, sort_keys=True))


def cmd_synth(args) -> int:
    cfg = load_config(args.config)
    if args.workers is not None:
        cfg.workers = args.workers
    summary = run_batch(args.list, cfg, args.out)
    _emit(summary)
    return 1 if summary["n_failed"] else 0


def cmd_stats(args) -> int:
    paths = sorted(glob.glob(args.disp_glob, recursive=True))
    if not paths:
        raise ValueError(f"no files match {args.disp_glob!r}")
    chunks = [read_float_map(p).valid_values() for p in paths]
    stats = values_stats(np.concatenate(chunks), bin_width=args.bin_width)
    if args.svg:
        emit_histogram_svg(stats, args.svg)
    doc = stats.as_dict()
    doc["n_files"] = len(paths)
    _emit(doc)
    return 0


_EVAL_METRICS = ("epe", "bad1", "bad2", "d1")


def _metric_value(name: str, pred, gt, official_d1: bool) -> float:
    if name == "epe":
        return epe(pred, gt)
    if name == "bad1":
        return bad_tau(pred, gt, 1.0)
    if name == "bad2":
        return bad_tau(pred, gt, 2.0)
    return d1_all(pred, gt, official=official_d1)


def cmd_eval(args) -> int:
    gt_dir = Path(args.gt)
    pred_dir = Path(args.pred)
    gt_files = sorted(p for p in gt_dir.iterdir() if p.suffix in (".pfm", ".png"))
    if not gt_files:
        raise ValueError(f"no .pfm or .png ground truth in {gt_dir}")

    values = []
    n_valid = 0
    n_gt_valid = 0
    for gt_path in gt_files:
        candidates = [pred_dir / gt_path.name,
                      pred_dir / (gt_path.stem + ".pfm"),
                      pred_dir / (gt_path.stem + ".png")]
        pred_path = next((c for c in candidates if c.exists()), None)
        if pred_path is None:
            raise ValueError(f"no prediction for {gt_path.name} in {pred_dir}")
        gt = read_float_map(gt_path)
        pred = read_float_map(pred_path)
        if args.half_res:
            gt = half_resolution(gt)
            pred = half_resolution(pred)
        values.append(_metric_value(args.metric, pred, gt, args.d1_official))
        both = pred.valid & gt.valid
        n_valid += int(both.sum())
        n_gt_valid += int(gt.valid.sum())

    value = float(np.mean(values))  # unweighted mean over image pairs
    doc = {
        "metric": args.metric,
        "value": value,
        "n_images": len(values),
        "n_valid": n_valid,
        "coverage": (n_valid / n_gt_valid) if n_gt_valid else 0.0,
        "model_id": args.model_id,
        "dataset_id": args.dataset_id or gt_dir.name,
    }
    if args.records:
        record = EvalRecord(
            model_id=doc["model_id"],
            dataset_id=doc["dataset_id"],
            metric=args.metric,
            value=value,
            n_valid=n_valid,
            coverage=doc["coverage"],
        )
        with open(args.records, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record.__dict__, sort_keys=True) + "\n")
    _emit(doc)
    return 0


def _load_refs(path):
    docs = json.loads(Path(path).read_text(encoding="utf-8"))
    return [
        DatasetRef(
            id=str(d["id"]),
            manifest_path=str(d.get("manifest_path", "")),
            sample_count=int(d.get("sample_count", 0)),
        )
        for d in docs
    ]


def cmd_rank(args) -> int:
    from .metrics import read_records_jsonl

    records = read_records_jsonl(args.records)
    refs = _load_refs(args.datasets) if args.datasets else None
    ranked = rank_datasets(records, refs)
    doc = {
        "ranking": [
            {
                "rank": i + 1,
                "id": ref.id,
                "mean_error": mean,
                "manifest_path": ref.manifest_path,
                "sample_count": ref.sample_count,
            }
            for i, (ref, mean) in enumerate(ranked.entries)
        ]
    }
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    print(text, end="")
    return 0


def cmd_mixplan(args) -> int:
    doc = json.loads(Path(args.ranking).read_text(encoding="utf-8"))
    entries = [
        (
            DatasetRef(
                id=str(e["id"]),
                manifest_path=str(e.get("manifest_path", "")),
                sample_count=int(e.get("sample_count", 0)),
            ),
            float(e["mean_error"]),
        )
        for e in doc["ranking"]
    ]
    entries.sort(key=lambda e: (e[1], e[0].id))
    plan = build_mix(RankedList(entries), args.k, weighting=args.weighting)
    text = emit_manifest(plan, args.out)
    print(text, end="")
    return 0


def cmd_match(args) -> int:
    left = read_image(Path(args.left).read_bytes())
    right = read_image(Path(args.right).read_bytes())
    params = MatchParams(
        d_max=args.dmax,
        census_window=args.census_window,
        p1=args.p1,
        p2=args.p2,
        lr_threshold=None if args.no_lr else args.lr_threshold,
        subpixel=args.subpixel,
        paths=args.paths,
    )
    disp = match(left, right, params)
    Path(args.out).write_bytes(write_pfm(disp))
    _emit({
        "out": str(args.out),
        "valid_fraction": float(disp.valid.mean()),
        "d_max": args.dmax,
    })
    return 0


def cmd_fill(args) -> int:
    image = read_image(Path(args.image).read_bytes())
    mask_img = read_image(Path(args.mask).read_bytes())
    mask = mask_img.to_gray() > 127
    cfg = FillConfig(
        strategy=args.strategy,
        background_pool=tuple(args.bg or ()),
        external_cmd=args.cmd,
        seed=args.seed,
    )
    rng = np.random.default_rng(args.seed)
    with tempfile.TemporaryDirectory(prefix="stereoforge_cli_fill_") as tmp:
        filled, info = fill_holes(image, mask, cfg, rng, workdir=tmp)
    Path(args.out).write_bytes(write_image(filled))
    _emit({"out": str(args.out), **info})
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="stereoforge",
        description="Synthesize pseudo-stereo training pairs from single images "
                    "with depth, evaluate disparity predictions, and plan dataset mixtures.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="batch-synthesize stereo pairs from an image/depth list")
    p.add_argument("--list", required=True, help="text file of '<image> <depth>' lines")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", default=None, help="YAML pipeline config")
    p.add_argument("--workers", type=int, default=None, help="override config worker count")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("stats", help="disparity statistics and histogram over files")
    p.add_argument("--disp-glob", required=True, help="glob of .pfm/.png disparity files")
    p.add_argument("--bin-width", type=float, default=1.0)
    p.add_argument("--svg", default=None, help="write histogram SVG here")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("eval", help="score predictions against ground truth")
    p.add_argument("--pred", required=True, help="directory of predicted disparities")
    p.add_argument("--gt", required=True, help="directory of ground-truth disparities")
    p.add_argument("--metric", required=True, choices=_EVAL_METRICS)
    p.add_argument("--half-res", action="store_true",
                   help="evaluate at half resolution (disparities halved)")
    p.add_argument("--d1-official", action="store_true",
                   help="d1 also requires error > 5%% of true disparity")
    p.add_argument("--model-id", default="model")
    p.add_argument("--dataset-id", default=None, help="defaults to the gt directory name")
    p.add_argument("--records", default=None, help="append an EvalRecord JSONL line here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("rank", help="rank datasets by four-benchmark mean error")
    p.add_argument("--records", required=True, help="EvalRecord JSONL file")
    p.add_argument("--datasets", default=None,
                   help="optional JSON list of {id, manifest_path, sample_count}")
    p.add_argument("--out", default=None, help="write ranking JSON here")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("mixplan", help="build the top-k mixture from a ranking")
    p.add_argument("--ranking", required=True, help="ranking JSON from `rank`")
    p.add_argument("--k", required=True, type=int)
    p.add_argument("--weighting", choices=("samples", "uniform"), default="uniform")
    p.add_argument("--out", default=None, help="write mixture manifest JSON here")
    p.set_defaults(func=cmd_mixplan)

    p = sub.add_parser("match", help="census+SGM stereo matching for verification")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--dmax", required=True, type=int)
    p.add_argument("--out", required=True, help="output disparity PFM")
    p.add_argument("--census-window", type=int, default=5)
    p.add_argument("--p1", type=float, default=10.0)
    p.add_argument("--p2", type=float, default=120.0)
    p.add_argument("--paths", type=int, default=8, choices=(4, 8))
    p.add_argument("--lr-threshold", type=float, default=1.0)
    p.add_argument("--no-lr", action="store_true", help="skip the left-right check")
    p.add_argument("--subpixel", action="store_true")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("fill", help="fill masked holes in an image")
    p.add_argument("--strategy", required=True, choices=STRATEGIES)
    p.add_argument("--image", required=True)
    p.add_argument("--mask", required=True, help="8-bit mask PNG, 255 = hole")
    p.add_argument("--out", required=True)
    p.add_argument("--bg", action="append", default=None,
                   help="background image for random_texture (repeatable)")
    p.add_argument("--cmd", default=None,
                   help="external command template with {input} {mask} {output}")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fill)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (StereoForgeError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
