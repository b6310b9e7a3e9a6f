"""Mutable curation state: journaled voxel edits, undo, statuses, export.

Every mutation is an EditOp appended to an append-only journal; replaying the
journal over the pristine segmentation always reproduces the working copy
exactly. Undo is itself journaled as a forward op (event sourcing), so the
audit trail of curation behavior is never rewritten.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EditError, UqcureError
from .regions import (
    STATUS_DONE,
    STATUS_EDITED,
    STATUS_INSPECTED,
    STATUS_PENDING,
    RegionSet,
)
from .topology import TopologyDiff, local_topology, topology_diff
from .volume import DatasetTriplet, Volume, write_volume

KIND_PAINT = "paint"
KIND_ERASE = "erase"
KIND_DONE = "done"
KIND_UNDO = "undo"
EDIT_KINDS = (KIND_PAINT, KIND_ERASE)

LOCAL_DIFF_MARGIN = 5


@dataclass(frozen=True)
class EditOp:
    seq: int
    timestamp_ms: int
    region_id: int | None
    kind: str
    voxels: tuple[tuple[int, int, int], ...]
    prev_values: tuple[int, ...]
    new_value: int

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "seq": self.seq,
                "timestamp_ms": self.timestamp_ms,
                "region_id": self.region_id,
                "kind": self.kind,
                "voxels": [list(v) for v in self.voxels],
                "prev_values": list(self.prev_values),
                "new_value": self.new_value,
            },
            separators=(",", ":"),
        )

    @classmethod
    def from_json_line(cls, line: str) -> "EditOp":
        d = json.loads(line)
        return cls(
            seq=int(d["seq"]),
            timestamp_ms=int(d["timestamp_ms"]),
            region_id=None if d["region_id"] is None else int(d["region_id"]),
            kind=d["kind"],
            voxels=tuple(tuple(int(c) for c in v) for v in d["voxels"]),
            prev_values=tuple(int(p) for p in d["prev_values"]),
            new_value=int(d["new_value"]),
        )


def replay_journal(base_seg: np.ndarray, journal: list[EditOp]) -> np.ndarray:
    """Fold a journal over the pristine segmentation; pure function of inputs."""
    work = base_seg.copy()
    undo_stack: list[int] = []
    for i, op in enumerate(journal):
        if op.kind in EDIT_KINDS:
            for z, y, x in op.voxels:
                work[z, y, x] = op.new_value
            undo_stack.append(i)
        elif op.kind == KIND_UNDO:
            target = journal[undo_stack.pop()]
            for (z, y, x), prev in zip(reversed(target.voxels), reversed(target.prev_values)):
                work[z, y, x] = prev
        # done ops do not change voxels
    return work


def save_journal(journal: list[EditOp], path: str | Path) -> None:
    Path(path).write_text("".join(op.to_json_line() + "\n" for op in journal))


def load_journal(path: str | Path) -> list[EditOp]:
    lines = Path(path).read_text().splitlines()
    return [EditOp.from_json_line(line) for line in lines if line.strip()]


class CurationSession:
    """One writer per session; the service serializes mutating calls."""

    def __init__(self, triplet: DatasetTriplet, regions: RegionSet):
        if regions.label_volume.shape != triplet.seg.shape:
            raise UqcureError(
                f"region set shape {regions.label_volume.shape} does not match "
                f"segmentation shape {triplet.seg.shape}"
            )
        self.triplet = triplet
        self.regions = regions
        for region in regions.regions:
            region.status = STATUS_PENDING
        self.working_seg = triplet.seg.data.copy()
        self.journal: list[EditOp] = []
        self._undo_stack: list[int] = []
        self.cursor: int | None = regions.regions[0].region_id if regions.regions else None

    @property
    def seq(self) -> int:
        return len(self.journal)

    def current_region(self):
        return self.regions.get(self.cursor) if self.cursor is not None else None

    def _next_seq(self) -> int:
        return len(self.journal) + 1

    def apply_edit(
        self,
        kind: str,
        voxels: list[tuple[int, int, int]],
        region_id: int | None = None,
    ) -> TopologyDiff:
        """Apply a paint/erase op atomically; returns the local topology diff."""
        if kind not in EDIT_KINDS:
            raise EditError(f"invalid edit kind {kind!r} (expected paint or erase)")
        if not voxels:
            raise EditError("paint/erase ops must contain at least one voxel")
        shape = self.working_seg.shape
        coords = []
        for v in voxels:
            if len(v) != 3:
                raise EditError(f"voxel {v!r} is not a (z, y, x) triple")
            z, y, x = (int(c) for c in v)
            if not (0 <= z < shape[0] and 0 <= y < shape[1] and 0 <= x < shape[2]):
                raise EditError(f"voxel ({z}, {y}, {x}) out of bounds for shape {shape}")
            coords.append((z, y, x))
        if region_id is not None and self.regions.get(region_id) is None:
            raise EditError(f"unknown region id {region_id}")

        arr = np.asarray(coords, dtype=np.int64)
        bbox = (
            (int(arr[:, 0].min()), int(arr[:, 1].min()), int(arr[:, 2].min())),
            (int(arr[:, 0].max()), int(arr[:, 1].max()), int(arr[:, 2].max())),
        )
        new_value = 1 if kind == KIND_PAINT else 0
        before = local_topology(self.working_seg, bbox, margin=LOCAL_DIFF_MARGIN)

        prev_values = tuple(int(self.working_seg[z, y, x]) for z, y, x in coords)
        op = EditOp(
            seq=self._next_seq(),
            timestamp_ms=int(time.time() * 1000),
            region_id=region_id,
            kind=kind,
            voxels=tuple(coords),
            prev_values=prev_values,
            new_value=new_value,
        )
        for z, y, x in coords:
            self.working_seg[z, y, x] = new_value
        self.journal.append(op)
        self._undo_stack.append(len(self.journal) - 1)

        if region_id is not None:
            region = self.regions.get(region_id)
            if region.status in (STATUS_PENDING, STATUS_INSPECTED):
                region.status = STATUS_EDITED

        after = local_topology(self.working_seg, bbox, margin=LOCAL_DIFF_MARGIN)
        return topology_diff(before, after)

    def undo(self) -> None:
        """Revert the most recent paint/erase not yet undone; journaled forward."""
        if not self._undo_stack:
            raise EditError("nothing to undo")
        target = self.journal[self._undo_stack.pop()]
        for (z, y, x), prev in zip(reversed(target.voxels), reversed(target.prev_values)):
            self.working_seg[z, y, x] = prev
        self.journal.append(
            EditOp(
                seq=self._next_seq(),
                timestamp_ms=int(time.time() * 1000),
                region_id=target.region_id,
                kind=KIND_UNDO,
                voxels=(),
                prev_values=(),
                new_value=0,
            )
        )

    def mark_inspected(self, region_id: int) -> None:
        region = self.regions.get(region_id)
        if region is None:
            raise EditError(f"unknown region id {region_id}")
        if region.status == STATUS_PENDING:
            region.status = STATUS_INSPECTED

    def mark_done(self, region_id: int) -> int | None:
        """Mark a region done and advance the cursor; returns next region id."""
        region = self.regions.get(region_id)
        if region is None:
            raise EditError(f"unknown region id {region_id}")
        if region.status == STATUS_DONE:
            raise EditError(f"region {region_id} is already done")
        region.status = STATUS_DONE
        self.journal.append(
            EditOp(
                seq=self._next_seq(),
                timestamp_ms=int(time.time() * 1000),
                region_id=region_id,
                kind=KIND_DONE,
                voxels=(),
                prev_values=(),
                new_value=0,
            )
        )
        self.cursor = None
        for candidate in self.regions.regions:  # regions are stored in rank order
            if candidate.status != STATUS_DONE:
                self.cursor = candidate.region_id
                break
        return self.cursor

    def n_done(self) -> int:
        return sum(1 for r in self.regions.regions if r.status == STATUS_DONE)

    def export_segmentation(self, path: str | Path) -> None:
        """Write the replayed segmentation plus a journal sidecar (path + .journal)."""
        replayed = replay_journal(self.triplet.seg.data, self.journal)
        if not np.array_equal(replayed, self.working_seg):
            raise AssertionError("journal replay does not reproduce the working segmentation")
        path = Path(path)
        out = Volume.from_array(
            replayed.astype(self.triplet.seg.data.dtype), spacing=self.triplet.seg.meta.spacing
        )
        write_volume(out, path)
        save_journal(self.journal, journal_sidecar_path(path))


def journal_sidecar_path(export_path: str | Path) -> Path:
    export_path = Path(export_path)
    return export_path.with_name(export_path.name + ".journal")


def open_session(triplet: DatasetTriplet, regions: RegionSet) -> CurationSession:
    """Start a curation session: pristine working copy, empty journal, rank-1 cursor."""
    return CurationSession(triplet, regions)
