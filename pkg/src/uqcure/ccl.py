"""Two-pass union-find connected-component labeling for 3D volumes.

The first pass run-length encodes each (z, y) row into maximal x-runs of
selected voxels sharing the same value, the second pass merges runs through a
union-find over run adjacencies. Working memory is two auxiliary arrays of
the volume size (the run-id array plus one shifted comparison mask at a time).

Labels are dense 1..count and deterministic: components are numbered by the
first voxel they touch in z, y, x scan order, independent of input history.
"""

from __future__ import annotations

import numpy as np

# Backward half-space neighbor offsets (neighbors already visited in z,y,x
# scan order). The (0, 0, -1) offset is omitted: same-value x-neighbors are
# merged by run-length encoding in the first pass.
_OFFSETS_6 = ((-1, 0, 0), (0, -1, 0))
_OFFSETS_26 = (
    (-1, -1, -1), (-1, -1, 0), (-1, -1, 1),
    (-1, 0, -1), (-1, 0, 0), (-1, 0, 1),
    (-1, 1, -1), (-1, 1, 0), (-1, 1, 1),
    (0, -1, -1), (0, -1, 0), (0, -1, 1),
)


def _axis_slices(d: int) -> tuple[slice, slice]:
    """(current, neighbor) slice pair aligning a[i] with a[i + d]."""
    if d < 0:
        return slice(-d, None), slice(None, d)
    if d > 0:
        return slice(None, -d), slice(d, None)
    return slice(None), slice(None)


class _UnionFind:
    __slots__ = ("parent", "size")

    def __init__(self, n: int) -> None:
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


def label_components(
    values: np.ndarray, mask: np.ndarray, connectivity: int = 26
) -> tuple[np.ndarray, int]:
    """Label components of ``mask`` voxels connected through equal ``values``.

    Two voxels belong to the same component iff they are adjacent under the
    given connectivity (6 or 26), both selected by ``mask``, and carry equal
    ``values``. Returns (labels, count) with labels 0 outside the mask.
    """
    if connectivity not in (6, 26):
        raise ValueError(f"connectivity must be 6 or 26, got {connectivity}")
    if values.shape != mask.shape or values.ndim != 3:
        raise ValueError("values and mask must be identically shaped 3D arrays")

    sel = np.asarray(mask, dtype=bool)
    if not sel.any():
        return np.zeros(sel.shape, dtype=np.int32), 0

    # Pass 1: x-runs of selected same-value voxels become provisional labels,
    # numbered 1..n_runs in scan order.
    starts = sel.copy()
    same_as_prev = sel[:, :, 1:] & sel[:, :, :-1] & (values[:, :, 1:] == values[:, :, :-1])
    starts[:, :, 1:] &= ~same_as_prev
    n_runs = int(np.count_nonzero(starts))
    run_id = np.cumsum(starts.ravel(), dtype=np.int64).reshape(sel.shape)
    run_id[~sel] = 0

    # Pass 2: merge runs across the backward neighbor offsets.
    offsets = _OFFSETS_6 if connectivity == 6 else _OFFSETS_26
    pair_chunks = []
    for dz, dy, dx in offsets:
        cz, nz = _axis_slices(dz)
        cy, ny = _axis_slices(dy)
        cx, nx = _axis_slices(dx)
        touching = (
            sel[cz, cy, cx]
            & sel[nz, ny, nx]
            & (values[cz, cy, cx] == values[nz, ny, nx])
        )
        if touching.any():
            a = run_id[cz, cy, cx][touching]
            b = run_id[nz, ny, nx][touching]
            pair_chunks.append(a * np.int64(n_runs + 1) + b)

    uf = _UnionFind(n_runs + 1)
    if pair_chunks:
        encoded = np.unique(np.concatenate(pair_chunks))
        base = np.int64(n_runs + 1)
        for code in encoded.tolist():
            uf.union(code // base, code % base)

    # Dense final labels ordered by first run (= first touch in scan order).
    final = np.zeros(n_runs + 1, dtype=np.int64)
    next_label = 0
    root_to_label: dict[int, int] = {}
    for run in range(1, n_runs + 1):
        root = uf.find(run)
        label = root_to_label.get(root)
        if label is None:
            next_label += 1
            label = next_label
            root_to_label[root] = label
        final[run] = label

    labels = final[run_id]
    out_dtype = np.int32 if next_label < 2**31 else np.int64
    return labels.astype(out_dtype), next_label
