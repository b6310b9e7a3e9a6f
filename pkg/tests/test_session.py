from __future__ import annotations

import numpy as np
import pytest

from uqcure import (
    EditError,
    ExtractionConfig,
    UqcureError,
    Volume,
    extract_regions,
    open_session,
    replay_journal,
    validate_triplet,
)
from uqcure.session import load_journal, journal_sidecar_path, save_journal
from uqcure.volume import read_volume


def build_triplet(seg_data: np.ndarray, unc_data: np.ndarray | None = None, dataset_id="t"):
    shape = seg_data.shape
    raw = Volume.from_array(np.full(shape, 0.3, dtype=np.float32))
    if unc_data is None:
        unc_data = np.zeros(shape, dtype=np.float32)
    return validate_triplet(
        raw,
        Volume.from_array(seg_data.astype(np.uint8)),
        Volume.from_array(unc_data.astype(np.float32)),
        dataset_id=dataset_id,
    )


def bridged_session():
    """Two bars joined by a bridge; a high-uncertainty blob flags the bridge."""
    seg = np.zeros((20, 20, 20), dtype=np.uint8)
    seg[4:7, 4:7, 2:18] = 1
    seg[13:16, 4:7, 2:18] = 1
    bridge = [(z, 5, 9) for z in range(7, 13)]
    for z, y, x in bridge:
        seg[z, y, x] = 1
    unc = np.zeros((20, 20, 20), dtype=np.float32)
    unc[6:14, 3:8, 7:12] = 0.8
    unc[1:4, 14:18, 14:18] = 0.55  # secondary lower-priority region
    triplet = build_triplet(seg, unc)
    regions = extract_regions(triplet.unc, ExtractionConfig(), dataset_id="t")
    return open_session(triplet, regions), bridge


def test_open_session_initial_state():
    session, _ = bridged_session()
    assert np.array_equal(session.working_seg, session.triplet.seg.data)
    assert session.journal == []
    assert session.cursor == 1
    assert all(r.status == "pending" for r in session.regions.regions)


def test_open_session_with_empty_region_set(tmp_path):
    triplet = build_triplet(np.zeros((8, 8, 8), dtype=np.uint8))
    regions = extract_regions(triplet.unc)
    session = open_session(triplet, regions)
    assert session.cursor is None
    assert session.current_region() is None
    out = tmp_path / "out.vqh"
    session.export_segmentation(out)
    assert read_volume(out) == triplet.seg


def test_open_session_rejects_mismatched_region_shape():
    triplet = build_triplet(np.zeros((8, 8, 8), dtype=np.uint8))
    other = build_triplet(np.zeros((10, 10, 10), dtype=np.uint8))
    regions = extract_regions(other.unc)
    with pytest.raises(UqcureError, match="shape"):
        open_session(triplet, regions)


def test_erase_bridge_reports_split():
    session, bridge = bridged_session()
    region_id = session.cursor
    diff = session.apply_edit("erase", bridge, region_id)
    assert diff.classification == "split"
    assert diff.d_beta0 == 1
    assert session.regions.get(region_id).status == "edited"
    assert session.journal[-1].kind == "erase"
    assert session.journal[-1].prev_values == (1,) * len(bridge)


def test_paint_existing_foreground_is_idempotent():
    session, _ = bridged_session()
    voxels = [(4, 4, 2), (4, 4, 3)]
    before = session.working_seg.copy()
    diff = session.apply_edit("paint", voxels, None)
    assert diff.classification == "none"
    assert session.journal[-1].prev_values == (1, 1)
    assert np.array_equal(session.working_seg, before)


def test_out_of_bounds_voxel_rejected_atomically():
    session, _ = bridged_session()
    before = session.working_seg.copy()
    with pytest.raises(EditError, match="out of bounds"):
        session.apply_edit("erase", [(4, 4, 2), (-1, 0, 0)], None)
    assert session.journal == []
    assert np.array_equal(session.working_seg, before)
    assert all(r.status == "pending" for r in session.regions.regions)


def test_invalid_kind_and_empty_voxels_rejected():
    session, _ = bridged_session()
    with pytest.raises(EditError, match="invalid edit kind"):
        session.apply_edit("smudge", [(0, 0, 0)], None)
    with pytest.raises(EditError, match="at least one voxel"):
        session.apply_edit("paint", [], None)


def test_undo_restores_previous_state():
    session, _ = bridged_session()
    before = session.working_seg.copy()
    session.apply_edit("paint", [(0, 0, 0), (0, 0, 1)], None)
    session.undo()
    assert np.array_equal(session.working_seg, before)
    assert [op.kind for op in session.journal] == ["paint", "undo"]


def test_undo_twice_unwinds_two_edits():
    session, _ = bridged_session()
    before = session.working_seg.copy()
    session.apply_edit("paint", [(0, 0, 0)], None)
    session.apply_edit("erase", [(4, 4, 2)], None)
    session.undo()
    session.undo()
    assert np.array_equal(session.working_seg, before)


def test_undo_on_fresh_session_errors():
    session, _ = bridged_session()
    with pytest.raises(EditError, match="nothing to undo"):
        session.undo()


def test_undo_with_overlapping_voxels_in_one_op():
    session, _ = bridged_session()
    before = session.working_seg.copy()
    # duplicate voxel in one op: prev captured in order, restored in reverse
    session.apply_edit("paint", [(1, 1, 1), (1, 1, 1)], None)
    session.undo()
    assert np.array_equal(session.working_seg, before)


def test_mark_done_advances_cursor_in_rank_order():
    session, _ = bridged_session()
    ids = [r.region_id for r in session.regions.regions]
    assert len(ids) >= 2
    nxt = session.mark_done(ids[0])
    assert nxt == ids[1]
    assert session.cursor == ids[1]
    assert session.regions.get(ids[0]).status == "done"


def test_mark_done_on_last_region_returns_none():
    session, _ = bridged_session()
    last = None
    for region in list(session.regions.regions):
        last = session.mark_done(region.region_id)
    assert last is None
    assert session.cursor is None


def test_mark_done_twice_errors():
    session, _ = bridged_session()
    rid = session.regions.regions[0].region_id
    session.mark_done(rid)
    with pytest.raises(EditError, match="already done"):
        session.mark_done(rid)


def test_mark_done_unknown_region_errors():
    session, _ = bridged_session()
    with pytest.raises(EditError, match="unknown region"):
        session.mark_done(9999)


def test_status_monotonic_pending_inspected_edited_done():
    session, _ = bridged_session()
    rid = session.regions.regions[0].region_id
    region = session.regions.get(rid)
    assert region.status == "pending"
    session.mark_inspected(rid)
    assert region.status == "inspected"
    session.apply_edit("erase", [(6, 5, 9)], rid)
    assert region.status == "edited"
    session.mark_inspected(rid)  # cannot regress
    assert region.status == "edited"
    session.mark_done(rid)
    assert region.status == "done"


def test_export_without_edits_is_byte_identical(tmp_path):
    session, _ = bridged_session()
    out = tmp_path / "seg.vqh"
    session.export_segmentation(out)
    assert read_volume(out).tobytes() == session.triplet.seg.tobytes()


def test_export_after_bridge_erase_increases_beta0(tmp_path):
    from uqcure import betti_numbers

    session, bridge = bridged_session()
    base = betti_numbers(session.triplet.seg.data).beta0
    session.apply_edit("erase", bridge, session.cursor)
    out = tmp_path / "seg.vqh"
    session.export_segmentation(out)
    exported = read_volume(out)
    assert betti_numbers(exported).beta0 == base + 1


def test_export_journal_sidecar_round_trips(tmp_path):
    session, bridge = bridged_session()
    session.apply_edit("erase", bridge[:3], session.cursor)
    session.apply_edit("paint", [(0, 0, 0)], None)
    session.undo()
    out = tmp_path / "seg.vqh"
    session.export_segmentation(out)
    journal = load_journal(journal_sidecar_path(out))
    assert [op.kind for op in journal] == ["erase", "paint", "undo"]
    replayed = replay_journal(session.triplet.seg.data, journal)
    assert np.array_equal(replayed, read_volume(out).data)


def test_journal_replay_after_every_op():
    rng = np.random.default_rng(13)
    seg = (rng.random((16, 16, 16)) < 0.3).astype(np.uint8)
    triplet = build_triplet(seg)
    session = open_session(triplet, extract_regions(triplet.unc))
    base = triplet.seg.data
    undoable = 0
    for step in range(120):
        action = rng.random()
        if action < 0.45:
            voxels = [tuple(int(c) for c in rng.integers(0, 16, size=3)) for _ in range(5)]
            session.apply_edit("paint", voxels, None)
            undoable += 1
        elif action < 0.9:
            voxels = [tuple(int(c) for c in rng.integers(0, 16, size=3)) for _ in range(5)]
            session.apply_edit("erase", voxels, None)
            undoable += 1
        elif undoable:
            session.undo()
            undoable -= 1
        assert np.array_equal(replay_journal(base, session.journal), session.working_seg)
    seqs = [op.seq for op in session.journal]
    assert seqs == list(range(1, len(seqs) + 1))


def test_journal_file_round_trip(tmp_path):
    session, bridge = bridged_session()
    session.apply_edit("erase", bridge, session.cursor)
    session.mark_done(session.cursor)
    path = tmp_path / "ops.journal"
    save_journal(session.journal, path)
    back = load_journal(path)
    assert back == session.journal
