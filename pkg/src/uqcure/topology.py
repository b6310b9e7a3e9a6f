"""Connectivity structure of binary segmentations: components, loops, cavities.

Conventions follow standard digital-topology duality: foreground is
6-connected, background 26-connected. The Euler characteristic is computed on
the cubical complex of foreground voxels (vertices, edges, faces, cubes, each
shared cell counted once); the loop count is derived from the Euler relation
beta0 - beta1 + beta2 == chi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ccl import label_components
from .errors import UqcureError
from .volume import Volume


@dataclass(frozen=True)
class TopologyReport:
    beta0: int
    beta1: int
    beta2: int
    euler: int
    component_sizes: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "beta0": self.beta0,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "euler": self.euler,
            "component_sizes": list(self.component_sizes),
        }


# Classification of an edit's topological effect, in priority order.
SPLIT = "split"
JOIN = "join"
LOOP_CHANGE = "loop_change"
CAVITY_CHANGE = "cavity_change"
NONE = "none"
MIXED = "mixed"


@dataclass(frozen=True)
class TopologyDiff:
    d_beta0: int
    d_beta1: int
    d_beta2: int
    classification: str

    def to_dict(self) -> dict:
        return {
            "d_beta0": self.d_beta0,
            "d_beta1": self.d_beta1,
            "d_beta2": self.d_beta2,
            "classification": self.classification,
        }


def _as_mask(seg: Volume | np.ndarray) -> np.ndarray:
    data = seg.data if isinstance(seg, Volume) else seg
    if data.ndim != 3:
        raise UqcureError(f"expected a 3D binary volume, got shape {data.shape}")
    return data > 0


def connected_components(
    seg: Volume | np.ndarray, connectivity: int = 26
) -> tuple[np.ndarray, int]:
    """Label foreground components; labels 1..count by first touch in z,y,x order."""
    mask = _as_mask(seg)
    zeros = np.zeros(mask.shape, dtype=np.uint8)
    return label_components(zeros, mask, connectivity)


def euler_characteristic(seg: Volume | np.ndarray) -> int:
    """V - E + F - C over the cubical complex of foreground voxels."""
    mask = _as_mask(seg)
    Z, Y, X = mask.shape

    def or_shifts(out_shape: tuple[int, int, int], moving_axes: tuple[int, ...]) -> int:
        acc = np.zeros(out_shape, dtype=bool)
        n = len(moving_axes)
        for bits in range(1 << n):
            idx = [slice(0, Z), slice(0, Y), slice(0, X)]
            for j, axis in enumerate(moving_axes):
                d = (bits >> j) & 1
                idx[axis] = slice(d, (Z, Y, X)[axis] + d)
            acc[tuple(idx)] |= mask
        return int(np.count_nonzero(acc))

    cubes = int(np.count_nonzero(mask))
    vertices = or_shifts((Z + 1, Y + 1, X + 1), (0, 1, 2))
    edges = (
        or_shifts((Z + 1, Y + 1, X), (0, 1))  # edges along x
        + or_shifts((Z + 1, Y, X + 1), (0, 2))  # edges along y
        + or_shifts((Z, Y + 1, X + 1), (1, 2))  # edges along z
    )
    faces = (
        or_shifts((Z + 1, Y, X), (0,))  # faces normal to z
        + or_shifts((Z, Y + 1, X), (1,))  # faces normal to y
        + or_shifts((Z, Y, X + 1), (2,))  # faces normal to x
    )
    return vertices - edges + faces - cubes


def betti_numbers(seg: Volume | np.ndarray) -> TopologyReport:
    """Betti numbers (components, loops, cavities) plus Euler characteristic."""
    mask = _as_mask(seg)
    labels, beta0 = connected_components(mask, connectivity=6)
    if beta0:
        sizes = np.bincount(labels.ravel())[1:]
        component_sizes = tuple(int(s) for s in np.sort(sizes)[::-1])
    else:
        component_sizes = ()

    chi = euler_characteristic(mask)
    beta2 = _cavity_count(mask)
    beta1 = beta0 + beta2 - chi
    return TopologyReport(
        beta0=beta0, beta1=beta1, beta2=beta2, euler=chi, component_sizes=component_sizes
    )


def _cavity_count(mask: np.ndarray) -> int:
    """26-connected background components that do not touch the volume border."""
    bg = ~mask
    labels, count = label_components(np.zeros(mask.shape, dtype=np.uint8), bg, 26)
    if count == 0:
        return 0
    border = np.concatenate(
        [
            labels[0].ravel(), labels[-1].ravel(),
            labels[:, 0].ravel(), labels[:, -1].ravel(),
            labels[:, :, 0].ravel(), labels[:, :, -1].ravel(),
        ]
    )
    touching = np.unique(border)
    touching = touching[touching > 0]
    return count - len(touching)


def topology_diff(before: TopologyReport, after: TopologyReport) -> TopologyDiff:
    """Classify the change between two reports (split > join > loop > cavity)."""
    d0 = after.beta0 - before.beta0
    d1 = after.beta1 - before.beta1
    d2 = after.beta2 - before.beta2
    if d0 == 0 and d1 == 0 and d2 == 0:
        classification = NONE
    elif d0 > 0:
        classification = SPLIT
    elif d0 < 0:
        classification = JOIN
    elif d1 != 0 and d2 != 0:
        classification = MIXED
    elif d1 != 0:
        classification = LOOP_CHANGE
    else:
        classification = CAVITY_CHANGE
    return TopologyDiff(d_beta0=d0, d_beta1=d1, d_beta2=d2, classification=classification)


def clamp_bbox(
    bbox: tuple[tuple[int, int, int], tuple[int, int, int]],
    shape: tuple[int, int, int],
    margin: int = 0,
) -> tuple[tuple[int, int, int], tuple[int, int, int]]:
    """Dilate an inclusive (min, max) corner pair by margin, clamped to bounds."""
    lo, hi = bbox
    lo_c = tuple(max(0, int(lo[a]) - margin) for a in range(3))
    hi_c = tuple(min(shape[a] - 1, int(hi[a]) + margin) for a in range(3))
    return lo_c, hi_c


def local_topology(
    seg: Volume | np.ndarray,
    bbox: tuple[tuple[int, int, int], tuple[int, int, int]],
    margin: int = 5,
) -> TopologyReport:
    """betti_numbers of the sub-volume bbox dilated by margin (clamped)."""
    mask = _as_mask(seg)
    lo, hi = bbox
    if margin < 0:
        raise UqcureError(f"margin must be >= 0, got {margin}")
    for a in range(3):
        if not (0 <= lo[a] <= hi[a] < mask.shape[a]):
            raise UqcureError(f"bbox {bbox} out of range for shape {mask.shape}")
    lo_c, hi_c = clamp_bbox(bbox, mask.shape, margin)
    crop = mask[lo_c[0] : hi_c[0] + 1, lo_c[1] : hi_c[1] + 1, lo_c[2] : hi_c[2] + 1]
    return betti_numbers(np.ascontiguousarray(crop))
