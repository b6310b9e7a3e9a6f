"""Synthetic vascular datasets with injected topological errors, plus
simulated guided/unguided curators and recall/time-proxy metrics.

Everything here is a pure function of (config, seed): identical calls yield
bit-identical volumes. Merges bridge the closest approach of two distinct
components; breaks sever a tube with a 4-voxel slab. Injected sites are kept
well separated so uncertainty blobs and detection margins never overlap
across sites.
"""

from __future__ import annotations

import base64
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .errors import InjectionError, UqcureError
from .regions import RegionSet
from .topology import connected_components
from .volume import Volume, read_volume, write_volume

FALSE_MERGE = "false_merge"
FALSE_BREAK = "false_break"

GUIDED = "guided"
UNGUIDED = "unguided"

# Foreground/background intensities and noise of the synthetic raw channel.
_FG_INTENSITY = 0.8
_BG_INTENSITY = 0.1
_RAW_BLUR_SIGMA = 1.0
_RAW_NOISE_SIGMA = 0.05

_BRIDGE_RADIUS = 2.0
_MAX_MERGE_GAP = 10.0
_BREAK_SLAB = 4

_BLOB_PEAK = 0.8
_BLOB_SIGMA = 3.0

# Minimum separation between injected sites: dilated bboxes must stay
# disjoint and centers apart, so blobs stay distinct regions and a detection
# margin never matches a neighboring site.
_SITE_BBOX_GAP = 8
_SITE_CENTER_GAP = 20.0


@dataclass
class ErrorSite:
    error_id: int
    kind: str
    bbox: tuple[tuple[int, int, int], tuple[int, int, int]]
    gt_patch: np.ndarray = field(repr=False)
    fixed: bool = False

    def center(self) -> tuple[float, float, float]:
        lo, hi = self.bbox
        return tuple((lo[a] + hi[a]) / 2.0 for a in range(3))

    def to_dict(self) -> dict:
        patch = np.ascontiguousarray(self.gt_patch.astype(np.uint8))
        return {
            "error_id": self.error_id,
            "kind": self.kind,
            "bbox": [list(self.bbox[0]), list(self.bbox[1])],
            "gt_patch_shape": list(patch.shape),
            "gt_patch_b64": base64.b64encode(patch.tobytes()).decode("ascii"),
            "fixed": self.fixed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ErrorSite":
        shape = tuple(d["gt_patch_shape"])
        patch = np.frombuffer(base64.b64decode(d["gt_patch_b64"]), dtype=np.uint8).reshape(shape)
        return cls(
            error_id=int(d["error_id"]),
            kind=d["kind"],
            bbox=(tuple(d["bbox"][0]), tuple(d["bbox"][1])),
            gt_patch=patch.copy(),
            fixed=bool(d.get("fixed", False)),
        )


@dataclass
class SynthDataset:
    raw: Volume
    gt_seg: Volume
    corrupted_seg: Volume
    unc: Volume
    errors: list[ErrorSite]
    seed: int


@dataclass(frozen=True)
class CurationResult:
    mode: str
    recall: float
    inspections: int
    corrections: int
    seed: int


@dataclass(frozen=True)
class CuratorParams:
    p_detect: float = 0.7
    stop_fraction: float = 0.6
    chunk_size: int = 32
    detect_margin: int = 3


def generate_vessels(
    size: int, n_tubes: int, radius: float, seed: int
) -> tuple[Volume, Volume]:
    """Random piecewise-linear tubes dilated to radius, plus a noisy raw image.

    Tubes are resampled until pairwise disjoint (centerlines at least
    2*radius + 2 apart) so every tube is its own connected component and
    merge injection between distinct tubes stays well-posed.
    """
    if size < 32:
        raise UqcureError(f"volume size must be >= 32, got {size}")
    if n_tubes < 1:
        raise UqcureError(f"n_tubes must be >= 1, got {n_tubes}")
    if radius < 1:
        raise UqcureError(f"radius must be >= 1, got {radius}")

    rng = np.random.default_rng(seed)
    shape = (size, size, size)
    centerline = np.zeros(shape, dtype=bool)
    margin = int(max(4, radius + 2))
    clearance = 2.0 * radius + 2.0
    placed_pts: list[np.ndarray] = []
    tree: cKDTree | None = None

    for tube in range(n_tubes):
        for attempt in range(200):
            faces = rng.choice(6, size=2, replace=False)
            points = [_random_face_point(rng, size, int(f)) for f in faces]
            n_way = int(rng.integers(2, 5))  # 2..4 interior waypoints
            waypoints = [
                tuple(float(c) for c in rng.integers(margin, size - margin, size=3))
                for _ in range(n_way)
            ]
            path = [points[0], *waypoints, points[1]]
            pts = np.concatenate(
                [_sample_segment(p, q) for p, q in zip(path[:-1], path[1:])]
            )
            if tree is None or float(tree.query(pts)[0].min()) >= clearance:
                break
        else:
            raise UqcureError(f"could not place tube {tube + 1} of {n_tubes} without contact")
        placed_pts.append(pts)
        tree = cKDTree(np.concatenate(placed_pts))
        vox = np.rint(pts).astype(np.int64)
        np.clip(vox, 0, size - 1, out=vox)
        centerline[vox[:, 0], vox[:, 1], vox[:, 2]] = True

    dist = ndimage.distance_transform_edt(~centerline)
    gt = (dist <= radius).astype(np.uint8)

    base = np.where(gt > 0, _FG_INTENSITY, _BG_INTENSITY)
    blurred = ndimage.gaussian_filter(base, sigma=_RAW_BLUR_SIGMA)
    noisy = blurred + rng.normal(0.0, _RAW_NOISE_SIGMA, size=shape)
    raw = np.clip(noisy, 0.0, 1.0).astype(np.float32)
    return Volume.from_array(raw), Volume.from_array(gt)


def _random_face_point(rng: np.random.Generator, size: int, face: int) -> tuple[float, ...]:
    coords = [float(c) for c in rng.integers(0, size, size=3)]
    axis, side = divmod(face, 2)
    coords[axis] = 0.0 if side == 0 else float(size - 1)
    return tuple(coords)


def _sample_segment(p, q) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    length = float(np.linalg.norm(q - p))
    n = max(2, int(math.ceil(length / 0.5)) + 1)
    t = np.linspace(0.0, 1.0, n)[:, None]
    return p[None, :] + t * (q - p)[None, :]


def _boxes_intersect(a, b) -> bool:
    return all(a[0][i] <= b[1][i] and b[0][i] <= a[1][i] for i in range(3))


def _dilate_box(box, shape, margin: int):
    lo, hi = box
    return (
        tuple(max(0, lo[i] - margin) for i in range(3)),
        tuple(min(shape[i] - 1, hi[i] + margin) for i in range(3)),
    )


def _center_of(box) -> np.ndarray:
    return np.array([(box[0][i] + box[1][i]) / 2.0 for i in range(3)])


def _site_placement_ok(bbox, shape, sites: list[ErrorSite]) -> bool:
    dilated = _dilate_box(bbox, shape, _SITE_BBOX_GAP)
    c = _center_of(bbox)
    for site in sites:
        if _boxes_intersect(dilated, site.bbox):
            return False
        if float(np.linalg.norm(c - _center_of(site.bbox))) < _SITE_CENTER_GAP:
            return False
    return True


def inject_errors(
    gt_seg: Volume, k_merges: int, k_breaks: int, seed: int
) -> tuple[Volume, list[ErrorSite]]:
    """Corrupt a ground-truth segmentation with false merges and breaks.

    Raises InjectionError (reporting how many sites were placed) when the
    requested count cannot be satisfied.
    """
    gt = gt_seg.data > 0
    shape = gt.shape
    corrupted = gt.copy()
    rng = np.random.default_rng(seed)
    sites: list[ErrorSite] = []

    labels, count = connected_components(gt, connectivity=26)
    comp_coords = {
        lab: np.argwhere(labels == lab) for lab in range(1, count + 1)
    }

    if k_merges > 0:
        if count < 2:
            raise InjectionError(
                f"placed 0 of {k_merges} merges: ground truth has {count} component(s)"
            )
        candidates = _merge_candidates(comp_coords)
        rng.shuffle(candidates)
        used_pairs: set[tuple[int, int]] = set()
        placed = 0
        for pair, p, q in candidates:
            if placed == k_merges:
                break
            if pair in used_pairs:
                continue
            placement = _carve_bridge(corrupted, gt, p, q)
            if placement is None:
                continue
            changed_box, bridge_slices, bridge_mask = placement
            if not _site_placement_ok(changed_box, shape, sites):
                continue
            corrupted[bridge_slices] |= bridge_mask
            used_pairs.add(pair)
            placed += 1
            sites.append(
                ErrorSite(
                    error_id=len(sites) + 1,
                    kind=FALSE_MERGE,
                    bbox=changed_box,
                    gt_patch=_crop(gt, changed_box).astype(np.uint8),
                )
            )
        if placed < k_merges:
            raise InjectionError(f"placed {placed} of {k_merges} requested merges")

    if k_breaks > 0:
        if count < 1:
            raise InjectionError(f"placed 0 of {k_breaks} breaks: ground truth is empty")
        placed = 0
        attempts = 0
        max_attempts = 200 * k_breaks
        while placed < k_breaks and attempts < max_attempts:
            attempts += 1
            lab = int(rng.integers(1, count + 1))
            cut = _propose_cut(comp_coords[lab], gt, rng)
            if cut is None:
                continue
            cut_box, cut_coords = cut
            if not _site_placement_ok(cut_box, shape, sites):
                continue
            corrupted[cut_coords[:, 0], cut_coords[:, 1], cut_coords[:, 2]] = False
            placed += 1
            sites.append(
                ErrorSite(
                    error_id=len(sites) + 1,
                    kind=FALSE_BREAK,
                    bbox=cut_box,
                    gt_patch=_crop(gt, cut_box).astype(np.uint8),
                )
            )
        if placed < k_breaks:
            raise InjectionError(f"placed {placed} of {k_breaks} requested breaks")

    out = Volume.from_array(corrupted.astype(np.uint8), spacing=gt_seg.meta.spacing)
    return out, sites


def _merge_candidates(comp_coords: dict[int, np.ndarray]):
    """Closest-approach point pairs for all component pairs with gap <= 10."""
    items = sorted(comp_coords.items())
    trees = {lab: cKDTree(coords) for lab, coords in items}
    candidates = []
    for i, (la, ca) in enumerate(items):
        for lb, cb in items[i + 1 :]:
            dists, nearest = trees[lb].query(ca)
            j = int(np.argmin(dists))
            if float(dists[j]) <= _MAX_MERGE_GAP:
                p = tuple(int(c) for c in ca[j])
                q = tuple(int(c) for c in cb[nearest[j]])
                candidates.append(((la, lb), p, q))
    return candidates


def _carve_bridge(corrupted: np.ndarray, gt: np.ndarray, p, q):
    """Voxels within _BRIDGE_RADIUS of segment [p, q]; None if nothing changes."""
    shape = gt.shape
    pad = int(math.ceil(_BRIDGE_RADIUS)) + 1
    lo = tuple(max(0, min(p[i], q[i]) - pad) for i in range(3))
    hi = tuple(min(shape[i] - 1, max(p[i], q[i]) + pad) for i in range(3))
    grid = np.stack(
        np.meshgrid(
            *[np.arange(lo[i], hi[i] + 1, dtype=np.float64) for i in range(3)], indexing="ij"
        ),
        axis=-1,
    )
    a = np.asarray(p, dtype=np.float64)
    b = np.asarray(q, dtype=np.float64)
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        t = np.zeros(grid.shape[:-1])
    else:
        t = np.clip(((grid - a) @ ab) / denom, 0.0, 1.0)
    closest = a + t[..., None] * ab
    dist = np.linalg.norm(grid - closest, axis=-1)
    bridge = dist <= _BRIDGE_RADIUS

    slices = tuple(slice(lo[i], hi[i] + 1) for i in range(3))
    changed = bridge & ~gt[slices]
    if not changed.any():
        return None
    local = np.argwhere(changed)
    lo_c = tuple(int(local[:, i].min()) + lo[i] for i in range(3))
    hi_c = tuple(int(local[:, i].max()) + lo[i] for i in range(3))
    return (lo_c, hi_c), slices, bridge


def _propose_cut(coords: np.ndarray, gt: np.ndarray, rng: np.random.Generator):
    """A 4-voxel slab through one tube that cleanly severs its component."""
    mins = coords.min(axis=0)
    maxs = coords.max(axis=0)
    extents = maxs - mins + 1
    axis = int(np.argmax(extents))
    inner_margin = 6
    low = int(mins[axis]) + inner_margin
    high = int(maxs[axis]) - inner_margin - _BREAK_SLAB
    if high <= low:
        return None
    s = int(rng.integers(low, high + 1))
    in_slab = (coords[:, axis] >= s) & (coords[:, axis] < s + _BREAK_SLAB)
    cut_coords = coords[in_slab]
    if len(cut_coords) == 0:
        return None

    # The cut must split the component into exactly two pieces.
    lo = tuple(int(c) for c in mins)
    hi = tuple(int(c) for c in maxs)
    sub = np.zeros(tuple(hi[i] - lo[i] + 1 for i in range(3)), dtype=bool)
    rel = coords - np.asarray(lo)
    sub[rel[:, 0], rel[:, 1], rel[:, 2]] = True
    rel_cut = cut_coords - np.asarray(lo)
    sub[rel_cut[:, 0], rel_cut[:, 1], rel_cut[:, 2]] = False
    _, n_after = connected_components(sub, connectivity=26)
    if n_after != 2:
        return None

    lo_c = tuple(int(cut_coords[:, i].min()) for i in range(3))
    hi_c = tuple(int(cut_coords[:, i].max()) for i in range(3))
    return (lo_c, hi_c), cut_coords


def _crop(arr: np.ndarray, box) -> np.ndarray:
    lo, hi = box
    return arr[lo[0] : hi[0] + 1, lo[1] : hi[1] + 1, lo[2] : hi[2] + 1].copy()


def synth_uncertainty(
    errors: list[ErrorSite],
    shape: tuple[int, int, int],
    coverage: float,
    noise_sigma: float = 0.05,
    seed: int = 0,
) -> Volume:
    """Gaussian blobs (peak 0.8, sigma 3) at a random fraction of error sites."""
    if not (0.0 <= coverage <= 1.0):
        raise UqcureError(f"coverage must be in [0, 1], got {coverage}")
    rng = np.random.default_rng(seed)
    u = np.zeros(shape, dtype=np.float64)
    covered = rng.random(len(errors)) < coverage
    window = int(math.ceil(4 * _BLOB_SIGMA))
    for site, hit in zip(errors, covered):
        if not hit:
            continue
        center = tuple(int(round(c)) for c in site.center())
        lo = tuple(max(0, center[i] - window) for i in range(3))
        hi = tuple(min(shape[i] - 1, center[i] + window) for i in range(3))
        zz, yy, xx = np.meshgrid(
            *[np.arange(lo[i], hi[i] + 1, dtype=np.float64) for i in range(3)], indexing="ij"
        )
        r2 = (zz - center[0]) ** 2 + (yy - center[1]) ** 2 + (xx - center[2]) ** 2
        blob = _BLOB_PEAK * np.exp(-r2 / (2.0 * _BLOB_SIGMA**2))
        u[lo[0] : hi[0] + 1, lo[1] : hi[1] + 1, lo[2] : hi[2] + 1] += blob
    if noise_sigma > 0:
        u += np.abs(rng.normal(0.0, noise_sigma, size=shape))
    return Volume.from_array(np.clip(u, 0.0, 1.0).astype(np.float32))


def make_dataset(
    size: int = 100,
    n_tubes: int = 8,
    radius: float = 3.0,
    k_merges: int = 3,
    k_breaks: int = 3,
    coverage: float = 0.95,
    noise_sigma: float = 0.05,
    seed: int = 0,
) -> SynthDataset:
    """Full generation pipeline; deterministic in (config, seed).

    If a particular vessel layout cannot host the requested error count, the
    layout is regenerated from a seed-derived offset until injection succeeds,
    keeping the result a pure function of the arguments.
    """
    last_error: UqcureError | None = None
    for attempt in range(20):
        sub_seed = seed + 1_000_003 * attempt
        try:
            raw, gt = generate_vessels(size, n_tubes, radius, sub_seed)
            corrupted, sites = inject_errors(gt, k_merges, k_breaks, sub_seed)
        except (InjectionError, UqcureError) as exc:
            last_error = exc
            continue
        unc = synth_uncertainty(sites, gt.shape, coverage, noise_sigma, sub_seed)
        return SynthDataset(
            raw=raw, gt_seg=gt, corrupted_seg=corrupted, unc=unc, errors=sites, seed=seed
        )
    raise InjectionError(f"no satisfiable layout found for seed {seed}: {last_error}")


def simulate_curator(
    mode: str,
    dataset: SynthDataset,
    regions: RegionSet | None = None,
    params: CuratorParams | None = None,
    seed: int = 0,
    return_volume: bool = False,
):
    """Simulate one curation pass; detection is the modeled variable and every
    detected error is repaired perfectly by restoring the ground-truth patch."""
    if params is None:
        params = CuratorParams()
    work = dataset.corrupted_seg.data.copy()
    gt_shape = work.shape
    sites = dataset.errors
    total = len(sites)
    fixed = [False] * total
    inspections = 0
    corrections = 0

    def fix(i: int) -> None:
        nonlocal corrections
        lo, hi = sites[i].bbox
        work[lo[0] : hi[0] + 1, lo[1] : hi[1] + 1, lo[2] : hi[2] + 1] = sites[i].gt_patch
        fixed[i] = True
        corrections += 1

    if mode == GUIDED:
        if regions is None:
            raise UqcureError("guided mode requires an extracted region set")
        for region in regions.regions:
            inspections += 1
            for i, site in enumerate(sites):
                if fixed[i]:
                    continue
                detect_box = _dilate_box(site.bbox, gt_shape, params.detect_margin)
                if _boxes_intersect(detect_box, region.bbox):
                    fix(i)
    elif mode == UNGUIDED:
        rng = np.random.default_rng(seed)
        chunks = _chunk_boxes(gt_shape, params.chunk_size)
        order = rng.permutation(len(chunks))
        draws = rng.random((len(chunks), max(total, 1)))
        n_visit = int(math.floor(params.stop_fraction * len(chunks) + 1e-9))
        for k in order[:n_visit]:
            inspections += 1
            for i, site in enumerate(sites):
                if fixed[i]:
                    continue
                if _boxes_intersect(chunks[k], site.bbox) and draws[k, i] < params.p_detect:
                    fix(i)
    else:
        raise UqcureError(f"unknown curator mode {mode!r}")

    recall = (sum(fixed) / total) if total else 1.0
    result = CurationResult(
        mode=mode, recall=recall, inspections=inspections, corrections=corrections, seed=seed
    )
    if return_volume:
        corrected = Volume.from_array(
            work.astype(np.uint8), spacing=dataset.corrupted_seg.meta.spacing
        )
        return result, corrected
    return result


def _chunk_boxes(shape: tuple[int, int, int], chunk: int):
    boxes = []
    for z in range(0, shape[0], chunk):
        for y in range(0, shape[1], chunk):
            for x in range(0, shape[2], chunk):
                boxes.append(
                    (
                        (z, y, x),
                        (
                            min(z + chunk, shape[0]) - 1,
                            min(y + chunk, shape[1]) - 1,
                            min(x + chunk, shape[2]) - 1,
                        ),
                    )
                )
    return boxes


def evaluate_recall(corrected_seg: Volume | np.ndarray, dataset: SynthDataset) -> float:
    """Fraction of error sites whose bbox content matches ground truth exactly."""
    data = corrected_seg.data if isinstance(corrected_seg, Volume) else corrected_seg
    if data.shape != dataset.gt_seg.shape:
        raise UqcureError(
            f"shape mismatch: corrected {data.shape} vs ground truth {dataset.gt_seg.shape}"
        )
    gt = dataset.gt_seg.data
    if not dataset.errors:
        return 1.0
    n_fixed = 0
    for site in dataset.errors:
        if np.array_equal(_crop(data, site.bbox) > 0, _crop(gt, site.bbox) > 0):
            n_fixed += 1
    return n_fixed / len(dataset.errors)


def save_dataset(dataset: SynthDataset, out_dir: str | Path) -> None:
    """Write raw/seg/unc (plus gt and the error list) as a dataset directory."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_volume(dataset.raw, out_dir / "raw.vqh")
    write_volume(dataset.corrupted_seg, out_dir / "seg.vqh")
    write_volume(dataset.unc, out_dir / "unc.vqh")
    write_volume(dataset.gt_seg, out_dir / "gt.vqh")
    doc = {"seed": dataset.seed, "errors": [site.to_dict() for site in dataset.errors]}
    (out_dir / "errors.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_dataset(in_dir: str | Path) -> SynthDataset:
    in_dir = Path(in_dir)
    doc = json.loads((in_dir / "errors.json").read_text())
    return SynthDataset(
        raw=read_volume(in_dir / "raw.vqh"),
        gt_seg=read_volume(in_dir / "gt.vqh"),
        corrupted_seg=read_volume(in_dir / "seg.vqh"),
        unc=read_volume(in_dir / "unc.vqh"),
        errors=[ErrorSite.from_dict(d) for d in doc["errors"]],
        seed=int(doc["seed"]),
    )
