"""Extraction and ranking of connected high-uncertainty regions.

"Similar uncertainty" is formalized as membership in the same quantization
bin: voxels with u >= tau are binned by floor((u - tau) / bin_width) (the top
bin closed at 1.0), then connected-component labeled per bin. Regions are
ranked by (score desc, size desc, bbox min corner asc) and given dense ids
1..N in rank order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .ccl import label_components
from .errors import UqcureError
from .volume import Volume, read_volume, write_volume

STATUS_PENDING = "pending"
STATUS_INSPECTED = "inspected"
STATUS_EDITED = "edited"
STATUS_DONE = "done"
REGION_STATUSES = (STATUS_PENDING, STATUS_INSPECTED, STATUS_EDITED, STATUS_DONE)


@dataclass(frozen=True)
class ExtractionConfig:
    tau: float = 0.5
    bin_width: float = 0.1
    connectivity: int = 26
    min_region_voxels: int = 10

    def __post_init__(self) -> None:
        if not (0.0 <= self.tau < 1.0):
            raise UqcureError(f"tau must be in [0, 1), got {self.tau}")
        if not (0.0 < self.bin_width <= 1.0):
            raise UqcureError(f"bin_width must be in (0, 1], got {self.bin_width}")
        if self.connectivity not in (6, 26):
            raise UqcureError(f"connectivity must be 6 or 26, got {self.connectivity}")
        if self.min_region_voxels < 1:
            raise UqcureError(f"min_region_voxels must be >= 1, got {self.min_region_voxels}")

    def last_bin_index(self) -> int:
        """Index of the bin containing values just below 1.0 (and 1.0 itself)."""
        k = int(np.floor((1.0 - self.tau) / self.bin_width))
        if self.tau + k * self.bin_width >= 1.0:
            k -= 1
        return max(k, 0)

    def to_dict(self) -> dict:
        return {
            "tau": self.tau,
            "bin_width": self.bin_width,
            "connectivity": self.connectivity,
            "min_region_voxels": self.min_region_voxels,
        }


@dataclass
class UncertaintyRegion:
    region_id: int
    voxel_count: int
    bbox: tuple[tuple[int, int, int], tuple[int, int, int]]
    centroid: tuple[float, float, float]
    score: float
    mean_uncertainty: float
    bin_index: int
    status: str = STATUS_PENDING

    def to_dict(self) -> dict:
        return {
            "region_id": self.region_id,
            "voxel_count": self.voxel_count,
            "bbox": [list(self.bbox[0]), list(self.bbox[1])],
            "centroid": list(self.centroid),
            "score": self.score,
            "mean_uncertainty": self.mean_uncertainty,
            "bin_index": self.bin_index,
            "status": self.status,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "UncertaintyRegion":
        return cls(
            region_id=int(d["region_id"]),
            voxel_count=int(d["voxel_count"]),
            bbox=(tuple(d["bbox"][0]), tuple(d["bbox"][1])),
            centroid=tuple(float(c) for c in d["centroid"]),
            score=float(d["score"]),
            mean_uncertainty=float(d["mean_uncertainty"]),
            bin_index=int(d["bin_index"]),
            status=d.get("status", STATUS_PENDING),
        )


@dataclass
class RegionSet:
    dataset_id: str
    config: ExtractionConfig
    regions: list[UncertaintyRegion]
    label_volume: Volume

    def top_score(self) -> float | None:
        return self.regions[0].score if self.regions else None

    def get(self, region_id: int) -> UncertaintyRegion | None:
        if 1 <= region_id <= len(self.regions):
            region = self.regions[region_id - 1]
            assert region.region_id == region_id
            return region
        return None


def compute_bins(unc_data: np.ndarray, cfg: ExtractionConfig) -> tuple[np.ndarray, np.ndarray]:
    """Selection mask (u >= tau) and per-voxel bin indices (top bin closed at 1)."""
    u = np.asarray(unc_data, dtype=np.float64)
    selected = u >= cfg.tau
    bins = np.floor((u - cfg.tau) / cfg.bin_width).astype(np.int32)
    np.minimum(bins, cfg.last_bin_index(), out=bins)
    bins[~selected] = -1
    return selected, bins


def extract_regions(
    unc: Volume, cfg: ExtractionConfig | None = None, dataset_id: str = ""
) -> RegionSet:
    """Extract ranked connected same-bin regions from an uncertainty map."""
    if cfg is None:
        cfg = ExtractionConfig()
    u = unc.data
    lo, hi = float(u.min()), float(u.max())
    if lo < 0.0 or hi > 1.0:
        raise UqcureError(f"uncertainty values out of range [0, 1]: min {lo:.6g}, max {hi:.6g}")

    selected, bins = compute_bins(u, cfg)
    labels, count = label_components(bins, selected, cfg.connectivity)
    if count == 0:
        return RegionSet(
            dataset_id=dataset_id,
            config=cfg,
            regions=[],
            label_volume=Volume.from_array(
                np.zeros(u.shape, dtype=np.uint16), spacing=unc.meta.spacing
            ),
        )

    flat_labels = labels.ravel()
    voxel_idx = np.nonzero(flat_labels)[0]
    lab = flat_labels[voxel_idx]
    order = np.argsort(lab, kind="stable")
    lab_sorted = lab[order]
    idx_sorted = voxel_idx[order]

    starts = np.searchsorted(lab_sorted, np.arange(1, count + 1))
    ends = np.searchsorted(lab_sorted, np.arange(1, count + 1), side="right")
    counts = ends - starts

    Z, Y, X = u.shape
    zc = (idx_sorted // (Y * X)).astype(np.int64)
    yc = ((idx_sorted // X) % Y).astype(np.int64)
    xc = (idx_sorted % X).astype(np.int64)
    uvals = np.asarray(u, dtype=np.float64).ravel()[idx_sorted]
    bin_flat = bins.ravel()[idx_sorted]

    reduce_at = starts
    z_min = np.minimum.reduceat(zc, reduce_at)
    y_min = np.minimum.reduceat(yc, reduce_at)
    x_min = np.minimum.reduceat(xc, reduce_at)
    z_max = np.maximum.reduceat(zc, reduce_at)
    y_max = np.maximum.reduceat(yc, reduce_at)
    x_max = np.maximum.reduceat(xc, reduce_at)
    z_sum = np.add.reduceat(zc, reduce_at)
    y_sum = np.add.reduceat(yc, reduce_at)
    x_sum = np.add.reduceat(xc, reduce_at)
    u_max = np.maximum.reduceat(uvals, reduce_at)
    u_sum = np.add.reduceat(uvals, reduce_at)
    bin_of_label = bin_flat[starts]

    records = []
    for i in range(count):
        n = int(counts[i])
        if n < cfg.min_region_voxels:
            continue
        records.append(
            UncertaintyRegion(
                region_id=i + 1,  # provisional; reassigned after ranking
                voxel_count=n,
                bbox=(
                    (int(z_min[i]), int(y_min[i]), int(x_min[i])),
                    (int(z_max[i]), int(y_max[i]), int(x_max[i])),
                ),
                centroid=(float(z_sum[i]) / n, float(y_sum[i]) / n, float(x_sum[i]) / n),
                score=float(u_max[i]),
                mean_uncertainty=float(u_sum[i]) / n,
                bin_index=int(bin_of_label[i]),
            )
        )

    ranked = rank_regions(records)
    remap = np.zeros(count + 1, dtype=np.int64)
    final_regions = []
    for new_id, region in enumerate(ranked, start=1):
        remap[region.region_id] = new_id
        final_regions.append(replace(region, region_id=new_id))

    n_final = len(final_regions)
    label_dtype = np.uint16 if n_final <= np.iinfo(np.uint16).max else np.uint32
    relabeled = remap[labels].astype(label_dtype)
    return RegionSet(
        dataset_id=dataset_id,
        config=cfg,
        regions=final_regions,
        label_volume=Volume.from_array(relabeled, spacing=unc.meta.spacing),
    )


def rank_regions(regions: Iterable[UncertaintyRegion]) -> list[UncertaintyRegion]:
    """Total order: score desc, voxel_count desc, bbox min corner lexicographic asc."""
    return sorted(regions, key=lambda r: (-r.score, -r.voxel_count, r.bbox[0]))


def rank_volumes(sets: Sequence[RegionSet]) -> list[str]:
    """Dataset ids ordered by top region score desc; empty sets last; ties by id."""
    def key(rs: RegionSet):
        top = rs.top_score()
        return (top is None, -(top if top is not None else 0.0), rs.dataset_id)

    return [rs.dataset_id for rs in sorted(sets, key=key)]


def ensemble_entropy(members: Sequence[Volume]) -> Volume:
    """Voxelwise binary entropy of the foreground fraction across members."""
    if len(members) < 2:
        raise UqcureError(f"ensemble entropy needs >= 2 members, got {len(members)}")
    shape = members[0].shape
    for m in members[1:]:
        if m.shape != shape:
            raise UqcureError(f"member shape mismatch: {m.shape} vs {shape}")
    stack = np.zeros(shape, dtype=np.float64)
    for m in members:
        data = m.data
        if np.any((data != 0) & (data != 1)):
            raise UqcureError("ensemble members must be binary volumes")
        stack += data > 0
    p = stack / len(members)

    entropy = np.zeros(shape, dtype=np.float64)
    interior = (p > 0.0) & (p < 1.0)
    pi = p[interior]
    entropy[interior] = -(pi * np.log2(pi) + (1.0 - pi) * np.log2(1.0 - pi))
    np.clip(entropy, 0.0, 1.0, out=entropy)
    return Volume.from_array(entropy.astype(np.float32), spacing=members[0].meta.spacing)


def save_region_set(region_set: RegionSet, path: str | Path, label_name: str | None = None) -> None:
    """Write regions.vqr (JSON) plus the label volume next to it."""
    path = Path(path)
    if label_name is None:
        label_name = path.stem + "_labels.vqh"
    write_volume(region_set.label_volume, path.parent / label_name)
    doc = {
        "dataset_id": region_set.dataset_id,
        "config": region_set.config.to_dict(),
        "label_volume": label_name,
        "regions": [r.to_dict() for r in region_set.regions],
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_region_set(path: str | Path) -> RegionSet:
    path = Path(path)
    doc = json.loads(path.read_text())
    cfg = ExtractionConfig(**doc["config"])
    label_volume = read_volume(path.parent / doc["label_volume"])
    regions = [UncertaintyRegion.from_dict(d) for d in doc["regions"]]
    return RegionSet(
        dataset_id=doc["dataset_id"], config=cfg, regions=regions, label_volume=label_volume
    )
