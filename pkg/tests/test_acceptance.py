"""Acceptance suite: end-to-end checks of the package's headline guarantees.

Each test covers one acceptance criterion and prints a single PASS/FAIL
line (bypassing pytest capture) so a full run yields a human-readable
scorecard:

    python3 -m pytest tests/test_acceptance.py -v
"""

import time

import numpy as np
import pytest

from stereoforge import (
    DepthMap,
    DisparityMap,
    FillConfig,
    FloatMap,
    MatchParams,
    RasterImage,
    SynthConfig,
    bad_tau,
    build_mix,
    d1_all,
    dataset_mean,
    depth_to_disparity,
    epe,
    fill_background_extend,
    forward_warp,
    match,
    mean_matches_reported,
    rank_datasets,
    read_disp_png16,
    read_pfm,
    resize_min_dims,
    run_batch,
    sample_scale,
    stable_seed,
    write_disp_png16,
    write_image,
    write_pfm,
)
from stereoforge.pipeline import SEED_ENV, load_config
from conftest import brute_force_warp, noise_image, piecewise_disparity
from test_mixing import CANDIDATE_ROWS, EXPECTED_ORDER, records_for

# Published four-benchmark rows (outlier-rate cells in canonical
# benchmark order) and the two-decimal means printed next to them.
PUBLISHED_ROWS = [
    ("baseline-a", (4.88, 5.16, 8.47, 3.53), 5.51),
    ("baseline-b", (4.20, 5.10, 7.50, 3.80), 5.15),
    ("baseline-c", (3.62, 3.97, 5.17, 2.03), 3.70),
    ("baseline-d", (3.2, 4.9, 5.5, 1.8), 3.85),
    ("single-best", (4.13, 3.64, 6.56, 2.76), 4.27),
    ("mix-1", (4.45, 3.67, 6.59, 3.20), 4.48),
    ("mix-10", (3.49, 3.56, 6.18, 2.10), 3.83),
    ("ablation-small", (4.83, 5.06, 13.03, 7.62), 7.64),
    ("ablation-large", (3.45, 4.43, 5.64, 2.05), 3.89),
]

# One published row whose printed mean does not follow from its own four
# cells (cells average to 2.43). The audit helper must flag it rather
# than reproduce it.
INCONSISTENT_ROW = ((3.01, 3.26, 2.69, 0.77), 2.68)


@pytest.fixture
def report(capfd):
    def _report(criterion, ok, detail=""):
        line = f"[acceptance] {criterion}: {'PASS' if ok else 'FAIL'}"
        if detail:
            line += f"  ({detail})"
        with capfd.disabled():
            print(line, flush=True)
        return ok

    return _report


def test_criterion_1_published_mean_arithmetic(report):
    worst = 0.0
    ok = True
    for name, cells, reported in PUBLISHED_ROWS:
        res = dataset_mean(cells)
        diff = abs(res.raw - reported)
        worst = max(worst, diff)
        if diff > 0.005 + 1e-9 or res.rounded != reported:
            ok = False
        if not mean_matches_reported(cells, reported):
            ok = False
    flagged = not mean_matches_reported(*INCONSISTENT_ROW)
    detail = f"{len(PUBLISHED_ROWS)} rows, max |raw-reported| = {worst:.4f} <= 0.005, " \
             f"inconsistent row flagged = {flagged}"
    assert report("1 four-benchmark mean reproduction", ok and flagged, detail)


def test_criterion_2_ranking_and_mixtures(report):
    ranked = rank_datasets(records_for(CANDIDATE_ROWS))
    order_ok = ranked.ids() == EXPECTED_ORDER
    mixes_ok = True
    for k in range(1, len(EXPECTED_ORDER) + 1):
        plan = build_mix(ranked, k, weighting="uniform")
        if plan.member_ids() != EXPECTED_ORDER[:k]:
            mixes_ok = False
    detail = f"rank order match = {order_ok}, 11 nested top-k mixtures match = {mixes_ok}"
    assert report("2 dataset ranking and mixture series", order_ok and mixes_ok, detail)


def test_criterion_3_warp_matches_oracle(report, rng):
    n_trials, mismatches, elapsed = 1000, 0, 0.0
    for _ in range(n_trials):
        channels = int(rng.integers(1, 4))
        channels = 1 if channels == 2 else channels
        img = noise_image(rng, 16, 16, channels=channels)
        data = rng.uniform(0.0, 8.0, (16, 16)).astype(np.float32)
        valid = rng.uniform(size=(16, 16)) > 0.15
        disp = DisparityMap(np.where(valid, data, 0).astype(np.float32), valid)
        t0 = time.perf_counter()
        w = forward_warp(img, disp)
        elapsed += time.perf_counter() - t0
        right, hole, src = brute_force_warp(img.data, disp.data, disp.valid)
        if not (np.array_equal(w.right_raw.data, right)
                and np.array_equal(w.hole_mask, hole)
                and np.array_equal(w.source_x, src)):
            mismatches += 1
    ok = mismatches == 0 and elapsed < 5.0
    detail = f"{n_trials} random 16x16 warps, {mismatches} oracle mismatches, " \
             f"warp time {elapsed:.2f}s < 5s"
    assert report("3 forward warp equals brute-force oracle", ok, detail)


def test_criterion_4_matcher_validates_synthesis(report, rng):
    H, W = 384, 768
    n_pairs = 20
    worst_frac, worst_time = 1.0, 0.0
    ok = True
    for _ in range(n_pairs):
        t0 = time.perf_counter()
        left = noise_image(rng, H, W)
        gt = piecewise_disparity(rng, H, W, lo=10, hi=60)
        w = forward_warp(left, gt)
        right = fill_background_extend(w.right_raw, w.hole_mask)
        pred = match(left, right, MatchParams(d_max=64))
        seconds = time.perf_counter() - t0

        visible = np.zeros((H, W), bool)
        ys, xs = np.nonzero(~w.hole_mask)
        visible[ys, w.source_x[ys, xs]] = True
        good = pred.valid & (np.abs(pred.data - gt.data) < 1.0)
        frac = float(good[visible].mean())

        worst_frac = min(worst_frac, frac)
        worst_time = max(worst_time, seconds)
        if frac < 0.90 or seconds >= 10.0:
            ok = False
    detail = f"{n_pairs} synthesized 384x768 pairs, worst within-1px fraction " \
             f"{worst_frac:.4f} >= 0.90, worst pair time {worst_time:.2f}s < 10s"
    assert report("4 SGM matcher recovers synthesized disparity", ok, detail)


def test_criterion_5_disparity_scaling_laws(report, rng):
    cfg = SynthConfig()
    n_maps = 100
    inv_worst, lit_worst, mono_bad = 0.0, 0.0, 0
    for _ in range(n_maps):
        h = int(rng.integers(2, 24))
        w = int(rng.integers(2, 24))
        data = rng.uniform(0.5, 200.0, (h, w)).astype(np.float32)
        valid = rng.uniform(size=(h, w)) > 0.2
        if not valid.any():
            valid[0, 0] = True
        depth = DepthMap(np.where(valid, data, 0).astype(np.float32), valid)
        s = sample_scale(cfg, rng)

        d1 = depth_to_disparity(depth, s, "literal")
        scaled = DepthMap((depth.data * 3.7).astype(np.float32), valid)
        d2 = depth_to_disparity(scaled, s, "literal")
        rel = np.abs(d1.data[valid] - d2.data[valid]) / np.maximum(d1.data[valid], 1e-12)
        inv_worst = max(inv_worst, float(rel.max()))

        lit_rel = abs(float(d1.data[valid].min()) - s) / s
        lit_worst = max(lit_worst, lit_rel)

        dm = depth_to_disparity(depth, s, "max-normalized")
        lit_worst = max(lit_worst, abs(float(dm.data[valid].max()) - s) / s)

        order = np.argsort(data[valid], kind="stable")
        dv = d1.data[valid][order]
        if np.any(np.diff(dv) > 1e-4 * dv.max()):
            mono_bad += 1
    ok = inv_worst <= 1e-6 and lit_worst <= 1e-5 and mono_bad == 0
    detail = f"{n_maps} maps: scale-invariance rel err {inv_worst:.2e} <= 1e-6, " \
             f"pinned-scale rel err {lit_worst:.2e} <= 1e-5, " \
             f"monotonicity violations {mono_bad}"
    assert report("5 disparity conversion scaling laws", ok, detail)


def test_criterion_6_metric_sanity(report, rng):
    n_trials = 100
    ok = True
    for _ in range(n_trials):
        h = int(rng.integers(2, 16))
        w = int(rng.integers(2, 16))
        gt_data = rng.uniform(0, 80, (h, w)).astype(np.float32)
        pred_data = gt_data + rng.normal(0, 3, (h, w)).astype(np.float32)
        valid = rng.uniform(size=(h, w)) > 0.25
        if not valid.any():
            valid[0, 0] = True
        gt = FloatMap(gt_data)
        pred = FloatMap(pred_data, valid)

        b1, b2, b3 = (bad_tau(pred, gt, t) for t in (1.0, 2.0, 3.0))
        if not b1 >= b2 >= b3:
            ok = False

        perfect = FloatMap(gt_data, valid)
        if epe(perfect, gt) != 0.0 or bad_tau(perfect, gt, 1.0) != 0.0 \
                or d1_all(perfect, gt) != 0.0:
            ok = False

        # errors of exactly tau are not outliers (strict comparison)
        tau = float(rng.integers(1, 4))
        exact = FloatMap((np.floor(gt_data) + tau).astype(np.float32))
        floor_gt = FloatMap(np.floor(gt_data).astype(np.float32))
        if bad_tau(exact, floor_gt, tau) != 0.0:
            ok = False

        # junk at invalid pixels must not leak into any metric
        junk = pred_data.copy()
        junk[~valid] = 1e9
        if epe(FloatMap(junk, valid), gt) != epe(pred, gt):
            ok = False
        if bad_tau(FloatMap(junk, valid), gt, 2.0) != b2:
            ok = False
    detail = f"{n_trials} random pairs: outlier-rate monotonicity, zero-error " \
             f"floor, strict threshold, invalid-pixel invariance"
    assert report("6 metric definitions are sound", ok, detail)


def test_criterion_7_format_roundtrips(report, rng):
    n_trials = 100
    pfm_ok, png_ok = True, True
    worst_q = 0.0
    for _ in range(n_trials):
        h = int(rng.integers(1, 20))
        w = int(rng.integers(1, 20))
        data = rng.uniform(-500, 500, (h, w)).astype(np.float32)
        valid = rng.uniform(size=(h, w)) > 0.2
        fm = FloatMap(np.where(valid, data, np.nan).astype(np.float32), valid)
        blob = write_pfm(fm)
        back = read_pfm(blob)
        if write_pfm(back) != blob or not np.array_equal(back.valid, fm.valid):
            pfm_ok = False
        if not np.array_equal(back.data[valid], fm.data[valid]):
            pfm_ok = False

        dvals = rng.uniform(1.0 / 256.0, 255.0, (h, w)).astype(np.float32)
        dmap = DisparityMap(np.where(valid, dvals, 0).astype(np.float32), valid)
        png = write_disp_png16(dmap)
        dback = read_disp_png16(png)
        if not np.array_equal(dback.valid, valid):
            png_ok = False
        if valid.any():
            q = float(np.abs(dback.data[valid] - dmap.data[valid]).max())
            worst_q = max(worst_q, q)
            if q > 1.0 / 512.0:
                png_ok = False
    ok = pfm_ok and png_ok
    detail = f"{n_trials} roundtrips: float map bytes exact = {pfm_ok}, " \
             f"16-bit quantization error {worst_q:.6f} <= 1/512"
    assert report("7 disparity file formats round-trip", ok, detail)


def test_criterion_8_batch_determinism(report, rng, tmp_path, monkeypatch):
    lines = []
    for i in range(10):
        img = noise_image(rng, 24, 36)
        depth = rng.uniform(2.0, 12.0, (24, 36)).astype(np.float32)
        ip, dp = tmp_path / f"{i}.png", tmp_path / f"{i}.pfm"
        ip.write_bytes(write_image(img))
        dp.write_bytes(write_pfm(FloatMap(depth)))
        lines.append(f"{ip} {dp}")
    list_path = tmp_path / "list.txt"
    list_path.write_text("\n".join(lines) + "\n")
    cfg_path = tmp_path / "cfg.yaml"
    cfg_path.write_text(
        "synth:\n  disp_min: 2\n  disp_max: 5\nmin_width: 1\nmin_height: 1\n"
        "global_seed: 111\n"
    )
    monkeypatch.setenv(SEED_ENV, "777")

    trees = {}
    for workers in (1, 4):
        cfg = load_config(cfg_path)
        cfg.workers = workers
        out = tmp_path / f"w{workers}"
        summary = run_batch(list_path, cfg, out)
        assert summary["n_failed"] == 0
        env_used = summary["global_seed"] == 777
        trees[workers] = {p.name: p.read_bytes() for p in sorted(out.iterdir())}
    identical = trees[1] == trees[4]
    ok = identical and env_used
    detail = f"10 samples, worker counts 1 vs 4 byte-identical = {identical}, " \
             f"seed env override honored = {env_used}"
    assert report("8 batch output is worker-count invariant", ok, detail)


def test_criterion_9_resize_floor_and_aspect(report, rng):
    n_trials = 50
    ok = True
    worst_aspect = 0.0
    for _ in range(n_trials):
        h = int(rng.integers(150, 1200))
        w = int(rng.integers(150, 1200))
        img = noise_image(rng, h, w, channels=1)
        out, _ = resize_min_dims(img, None, min_width=768, min_height=384)
        if out.width < 768 or out.height < 384:
            ok = False
        if h >= 384 and w >= 768:
            if out is not img:
                ok = False
        else:
            err_h = abs(out.height - out.width * (h / w))
            err_w = abs(out.width - out.height * (w / h))
            worst_aspect = max(worst_aspect, min(err_h, err_w))
            if min(err_h, err_w) > 1.0:
                ok = False
    detail = f"{n_trials} random sizes: minimums met, worst derived-axis " \
             f"deviation {worst_aspect:.3f}px <= 1px"
    assert report("9 resize meets minimum dims and keeps aspect", ok, detail)
