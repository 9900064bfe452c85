"""Disparity file formats: PFM round-trips byte-exactly, 16-bit PNG quantizes.

Run:  python3 demos/01_file_formats.py
"""

from pathlib import Path

import numpy as np

from stereoforge import (
    DisparityMap,
    FloatMap,
    read_disp_png16,
    read_pfm,
    write_disp_png16,
    write_pfm,
)

out_dir = Path(__file__).parent / "out"
out_dir.mkdir(exist_ok=True)

# A small disparity field with a hole in the middle. Invalid pixels are
# carried as NaN inside the PFM payload and as 0 in the 16-bit PNG.
rng = np.random.default_rng(7)
data = rng.uniform(0.5, 90.0, (6, 8)).astype(np.float32)
valid = np.ones((6, 8), bool)
valid[2:4, 3:5] = False

disp = DisparityMap(np.where(valid, data, 0).astype(np.float32), valid)

# --- PFM: float32, exact ------------------------------------------------
blob = write_pfm(FloatMap(disp.data, disp.valid))
print("PFM header:", blob[:16])
back = read_pfm(blob)
print("payload identical after round-trip:", write_pfm(back) == blob)
print("valid values identical:", np.array_equal(back.data[valid], disp.data[valid]))
(out_dir / "demo_disp.pfm").write_bytes(blob)

# --- 16-bit PNG: value = round(d * 256), so error is at most 1/512 ------
png = write_disp_png16(disp)
back16 = read_disp_png16(png)
err = np.abs(back16.data[valid] - disp.data[valid])
print(f"png16 max quantization error: {err.max():.6f} (bound 1/512 = {1/512:.6f})")
print("invalid pixels preserved:", np.array_equal(back16.valid, valid))
(out_dir / "demo_disp.png").write_bytes(png)

print("wrote", out_dir / "demo_disp.pfm", "and", out_dir / "demo_disp.png")
