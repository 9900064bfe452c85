"""Ranking candidate datasets and planning nested top-k training mixtures.

Each candidate dataset is scored by training a probe model on it alone
and averaging the outlier rate over four held-out benchmarks. Sorting
those means ascending gives the ranking; the k-th mixture is simply the
top-k prefix, so mixtures nest and a whole curriculum sweep reuses one
ranking.

Run:  python3 demos/06_ranking_and_mixtures.py
"""

import collections

from stereoforge import (
    BENCHMARKS,
    DatasetRef,
    EvalRecord,
    build_mix,
    draw_schedule,
    emit_manifest,
    rank_datasets,
)

# Per-benchmark outlier rates of probe models, one row per candidate.
rows = {
    "fsd": (4.13, 3.64, 6.56, 2.76),
    "sceneflow": (4.11, 4.87, 9.12, 3.17),
    "tartanair": (4.16, 4.71, 13.95, 5.25),
    "crestereo": (8.01, 6.18, 13.73, 5.75),
    "spring": (6.59, 6.23, 16.04, 6.96),
    "sintel": (6.09, 6.28, 19.28, 6.18),
    "drivingstereo": (11.84, 15.36, 12.84, 5.32),
    "fallingthings": (4.28, 4.23, 13.17, 27.93),
    "instereo2k": (13.33, 15.21, 11.75, 11.23),
    "vkitti2": (3.96, 4.00, 22.23, 73.78),
    "unrealstereo4k": (8.68, 6.90, 44.98, 64.51),
}

records = [
    EvalRecord("probe", ds, bench, val)
    for ds, cells in rows.items()
    for bench, val in zip(BENCHMARKS, cells)
]
refs = [DatasetRef(ds, sample_count=1000 * (i + 1))
        for i, ds in enumerate(sorted(rows))]

ranked = rank_datasets(records, refs)
print("rank  dataset           mean error")
for i, (ref, mean) in enumerate(ranked.entries, 1):
    print(f"{i:4d}  {ref.id:16s} {mean:8.4f}")

# Mixtures are rank prefixes: MIX 3 = best three datasets, and so on.
for k in (1, 3, len(rows)):
    plan = build_mix(ranked, k, weighting="uniform")
    print(f"MIX {k}: {plan.member_ids()}")

# Sample-proportional weighting and a concrete shuffled draw schedule.
plan = build_mix(ranked, 3, weighting="samples")
print("weights:", [round(w, 3) for w in plan.weights])
schedule = draw_schedule(plan, total_samples=20, seed=0)
print("20-draw schedule:", dict(collections.Counter(schedule)))
print("first 8 draws   :", schedule[:8])

print()
print(emit_manifest(build_mix(ranked, 2, weighting="uniform")))
