"""Dataset ranking and mixture planning.

Candidate datasets are ranked by their four-benchmark mean error
(ascending, ties broken by id), and the top-k prefix forms the k-th
mixture. Mixtures are therefore nested: every dataset in MIX k is also in
MIX k+1, which makes the mixture series cheap to sweep.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import KOutOfRange, MissingMetric
from .metrics import BENCHMARKS, dataset_mean

WEIGHTINGS = ("samples", "uniform")


@dataclass(frozen=True)
class DatasetRef:
    """Identity and bookkeeping for one candidate training dataset."""

    id: str
    manifest_path: str = ""
    sample_count: int = 0


@dataclass
class RankedList:
    """Datasets ordered by ascending mean error; entries are (ref, mean)."""

    entries: list

    def ids(self) -> list:
        return [ref.id for ref, _ in self.entries]

    def means(self) -> list:
        return [m for _, m in self.entries]


def rank_datasets(records, refs=None, benchmarks=BENCHMARKS) -> RankedList:
    """Rank datasets by the mean of their per-benchmark errors.

    `records` are EvalRecords; every dataset must carry a value for each
    benchmark or MissingMetric is raised. Duplicate (dataset, metric)
    records keep the last value. Ties on the mean sort by dataset id.
    """
    by_ds: dict = {}
    for r in records:
        by_ds.setdefault(r.dataset_id, {})[r.metric] = r.value
    ref_map = {ref.id: ref for ref in (refs or [])}

    entries = []
    for ds_id in sorted(by_ds):
        missing = [b for b in benchmarks if b not in by_ds[ds_id]]
        if missing:
            raise MissingMetric(f"dataset {ds_id!r} lacks metrics {missing}")
        mean = dataset_mean([by_ds[ds_id][b] for b in benchmarks]).raw
        entries.append((ref_map.get(ds_id, DatasetRef(id=ds_id)), mean))
    entries.sort(key=lambda e: (e[1], e[0].id))
    return RankedList(entries)


@dataclass
class MixPlan:
    """Top-k mixture: members in rank order plus their sampling weights."""

    k: int
    members: list
    weights: tuple
    ranking_snapshot: tuple = field(default_factory=tuple)

    def member_ids(self) -> list:
        return [ref.id for ref in self.members]


def build_mix(ranked: RankedList, k: int, weighting: str = "samples") -> MixPlan:
    """Take the top-k ranked datasets and assign sampling weights.

    weighting "samples" makes weights proportional to sample_count (every
    member must then have a positive count); "uniform" gives each member
    1/k. Weights always sum to 1.
    """
    n = len(ranked.entries)
    if not 1 <= k <= n:
        raise KOutOfRange(f"k must be in [1, {n}], got {k}")
    if weighting not in WEIGHTINGS:
        raise ValueError(f"weighting must be one of {WEIGHTINGS}, got {weighting!r}")
    members = [ref for ref, _ in ranked.entries[:k]]
    if weighting == "samples":
        counts = [ref.sample_count for ref in members]
        if any(c <= 0 for c in counts):
            bad = [ref.id for ref in members if ref.sample_count <= 0]
            raise ValueError(
                f"sample counts unknown or zero for {bad}; use weighting='uniform'"
            )
        total = sum(counts)
        weights = tuple(c / total for c in counts)
    else:
        weights = tuple(1.0 / k for _ in members)
    snapshot = tuple((ref.id, mean) for ref, mean in ranked.entries)
    return MixPlan(k, members, weights, snapshot)


def emit_manifest(plan: MixPlan, path=None) -> str:
    """Serialize a MixPlan as deterministic JSON; optionally write it out."""
    doc = {
        "k": plan.k,
        "members": [
            {
                "id": ref.id,
                "manifest_path": ref.manifest_path,
                "sample_count": ref.sample_count,
                "weight": w,
            }
            for ref, w in zip(plan.members, plan.weights)
        ],
        "created_from": [
            {"id": ds_id, "mean_error": mean} for ds_id, mean in plan.ranking_snapshot
        ],
    }
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path is not None:
        from pathlib import Path

        Path(path).write_text(text, encoding="utf-8")
    return text


def parse_manifest(text: str) -> MixPlan:
    """Inverse of emit_manifest."""
    doc = json.loads(text)
    members = [
        DatasetRef(
            id=str(m["id"]),
            manifest_path=str(m.get("manifest_path", "")),
            sample_count=int(m.get("sample_count", 0)),
        )
        for m in doc["members"]
    ]
    weights = tuple(float(m["weight"]) for m in doc["members"])
    snapshot = tuple(
        (str(e["id"]), float(e["mean_error"])) for e in doc.get("created_from", [])
    )
    return MixPlan(int(doc["k"]), members, weights, snapshot)


def draw_schedule(plan: MixPlan, total_samples: int, seed: int = 0) -> list:
    """Expand a plan into a concrete shuffled draw sequence of dataset ids.

    Per-dataset quotas come from largest-remainder apportionment, so each
    id appears either floor(weight * total) or that plus one times; the
    sequence is then shuffled with a seeded generator, making the whole
    schedule reproducible.
    """
    if total_samples < 0:
        raise ValueError(f"total_samples must be nonnegative, got {total_samples}")
    if total_samples == 0:
        return []
    exact = [w * total_samples for w in plan.weights]
    base = [int(math.floor(e)) for e in exact]
    remainders = [e - b for e, b in zip(exact, base)]
    leftover = total_samples - sum(base)
    order = sorted(range(len(base)), key=lambda i: (-remainders[i], i))
    for i in order[:leftover]:
        base[i] += 1

    seq = []
    for ref, count in zip(plan.members, base):
        seq.extend([ref.id] * count)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(seq))
    return [seq[i] for i in perm]
