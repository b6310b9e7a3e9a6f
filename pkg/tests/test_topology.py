from __future__ import annotations

import numpy as np
import pytest

from conftest import random_binary_volume
from oracles import flood_fill_partition, naive_betti, partition_from_labels
from uqcure import (
    UqcureError,
    betti_numbers,
    connected_components,
    local_topology,
    topology_diff,
)
from uqcure.topology import TopologyReport, euler_characteristic


def solid_cube(side: int, pad: int = 1) -> np.ndarray:
    size = side + 2 * pad
    vol = np.zeros((size, size, size), dtype=np.uint8)
    vol[pad : pad + side, pad : pad + side, pad : pad + side] = 1
    return vol


def hollow_shell(outer: int = 7, inner: int = 5, pad: int = 1) -> np.ndarray:
    vol = solid_cube(outer, pad)
    start = pad + (outer - inner) // 2
    vol[start : start + inner, start : start + inner, start : start + inner] = 0
    return vol


def extruded_annulus(side: int = 7, depth: int = 3, pad: int = 1) -> np.ndarray:
    size = side + 2 * pad
    vol = np.zeros((depth + 2 * pad, size, size), dtype=np.uint8)
    vol[pad : pad + depth, pad : pad + side, pad : pad + side] = 1
    vol[pad : pad + depth, pad + 1 : pad + side - 1, pad + 1 : pad + side - 1] = 0
    return vol


def two_tube_bridge_phantom():
    """Two parallel bars joined by a short bridge; returns (volume, bridge voxels)."""
    vol = np.zeros((20, 20, 20), dtype=np.uint8)
    vol[4:7, 4:7, 2:18] = 1
    vol[13:16, 4:7, 2:18] = 1
    bridge = [(z, 5, 9) for z in range(7, 13)]
    for z, y, x in bridge:
        vol[z, y, x] = 1
    return vol, bridge


# --- connected_components ---


def test_empty_volume_has_no_components():
    labels, count = connected_components(np.zeros((5, 5, 5), dtype=np.uint8), 26)
    assert count == 0
    assert not labels.any()


def test_diagonal_voxels_connectivity():
    vol = np.zeros((3, 3, 3), dtype=np.uint8)
    vol[0, 0, 0] = 1
    vol[1, 1, 1] = 1
    assert connected_components(vol, 26)[1] == 1
    assert connected_components(vol, 6)[1] == 2


def test_solid_cube_single_component():
    vol = solid_cube(10, pad=0)
    labels, count = connected_components(vol, 6)
    assert count == 1
    assert int((labels == 1).sum()) == 1000


def test_labels_dense_and_scan_ordered():
    vol = np.zeros((4, 8, 8), dtype=np.uint8)
    vol[0, 0, 6] = 1  # touched first in scan order
    vol[1, 4:6, 0:2] = 1
    vol[3, 7, 7] = 1
    labels, count = connected_components(vol, 6)
    assert count == 3
    assert labels[0, 0, 6] == 1
    assert labels[1, 4, 0] == 2
    assert labels[3, 7, 7] == 3


@pytest.mark.parametrize("connectivity", [6, 26])
def test_components_agree_with_flood_fill(connectivity):
    rng = np.random.default_rng(17)
    for _ in range(25):
        vol = random_binary_volume(rng, 24)
        labels, count = connected_components(vol, connectivity)
        expected = flood_fill_partition(np.zeros(vol.shape, np.uint8), vol > 0, connectivity)
        assert partition_from_labels(labels) == expected
        assert count == len(expected)


# --- betti_numbers ---


def test_solid_cube_betti():
    report = betti_numbers(solid_cube(5))
    assert (report.beta0, report.beta1, report.beta2) == (1, 0, 0)
    assert report.euler == 1
    assert report.component_sizes == (125,)


def test_hollow_shell_betti():
    # oracle (cell counting + flood fills) confirms (1, 0, 1), chi = 2
    vol = hollow_shell()
    assert naive_betti(vol > 0) == (1, 0, 1, 2)
    report = betti_numbers(vol)
    assert (report.beta0, report.beta1, report.beta2) == (1, 0, 1)
    assert report.euler == 2


def test_extruded_annulus_betti():
    vol = extruded_annulus()
    assert naive_betti(vol > 0) == (1, 1, 0, 0)
    report = betti_numbers(vol)
    assert (report.beta0, report.beta1, report.beta2) == (1, 1, 0)
    assert report.euler == 0


def test_euler_identity_on_random_volumes():
    rng = np.random.default_rng(23)
    for _ in range(60):
        vol = random_binary_volume(rng, 16)
        report = betti_numbers(vol)
        assert report.euler == report.beta0 - report.beta1 + report.beta2
        assert report.beta1 >= 0
        assert report.beta0 == len(report.component_sizes)
        assert report.euler == euler_characteristic(vol)


def test_betti_matches_oracle_on_random_volumes():
    rng = np.random.default_rng(29)
    for _ in range(15):
        vol = random_binary_volume(rng, 12, p=0.45)
        b0, b1, b2, chi = naive_betti(vol > 0)
        report = betti_numbers(vol)
        assert (report.beta0, report.beta1, report.beta2, report.euler) == (b0, b1, b2, chi)


def test_translation_invariance():
    rng = np.random.default_rng(31)
    vol = random_binary_volume(rng, 10, p=0.4)
    padded = np.pad(vol, 3)
    assert betti_numbers(vol) == betti_numbers(padded)


def test_disjoint_union_additivity():
    shell = hollow_shell()
    annulus = extruded_annulus()
    combined = np.zeros((40, 40, 40), dtype=np.uint8)
    combined[1 : 1 + shell.shape[0], 1 : 1 + shell.shape[1], 1 : 1 + shell.shape[2]] = shell
    combined[30 : 30 + annulus.shape[0], 25 : 25 + annulus.shape[1], 25 : 25 + annulus.shape[2]] = annulus
    a, b, c = betti_numbers(shell), betti_numbers(annulus), betti_numbers(combined)
    assert c.beta0 == a.beta0 + b.beta0
    assert c.beta2 == a.beta2 + b.beta2
    assert c.euler == a.euler + b.euler


# --- topology_diff ---


def _report(b0, b1, b2):
    return TopologyReport(b0, b1, b2, b0 - b1 + b2, tuple([1] * b0))


def test_diff_none_when_identical():
    r = _report(2, 1, 0)
    diff = topology_diff(r, r)
    assert diff.classification == "none"
    assert (diff.d_beta0, diff.d_beta1, diff.d_beta2) == (0, 0, 0)


def test_diff_split_and_join():
    assert topology_diff(_report(1, 0, 0), _report(2, 0, 0)).classification == "split"
    assert topology_diff(_report(2, 0, 0), _report(1, 0, 0)).classification == "join"


def test_diff_loop_and_cavity_changes():
    assert topology_diff(_report(1, 1, 0), _report(1, 0, 0)).classification == "loop_change"
    assert topology_diff(_report(1, 0, 1), _report(1, 0, 0)).classification == "cavity_change"
    assert topology_diff(_report(1, 1, 0), _report(1, 0, 1)).classification == "mixed"


def test_diff_bridge_erase_is_split():
    vol, bridge = two_tube_bridge_phantom()
    before = betti_numbers(vol)
    assert before.beta0 == 1
    erased = vol.copy()
    for z, y, x in bridge:
        erased[z, y, x] = 0
    after = betti_numbers(erased)
    assert after.beta0 == 2
    diff = topology_diff(before, after)
    assert diff.classification == "split"
    assert diff.d_beta0 == 1


def test_diff_gap_paint_is_join():
    vol, bridge = two_tube_bridge_phantom()
    broken = vol.copy()
    for z, y, x in bridge:
        broken[z, y, x] = 0
    diff = topology_diff(betti_numbers(broken), betti_numbers(vol))
    assert diff.classification == "join"
    assert diff.d_beta0 == -1


# --- local_topology ---


def test_local_topology_single_tube_crop():
    vol, _ = two_tube_bridge_phantom()
    report = local_topology(vol, ((4, 4, 2), (6, 6, 17)), margin=0)
    assert report.beta0 == 1


def test_local_topology_empty_crop():
    vol = np.zeros((10, 10, 10), dtype=np.uint8)
    report = local_topology(vol, ((2, 2, 2), (5, 5, 5)), margin=2)
    assert (report.beta0, report.beta1, report.beta2, report.euler) == (0, 0, 0, 0)


def test_local_topology_bridge_before_after():
    vol, bridge = two_tube_bridge_phantom()
    zs = [v[0] for v in bridge]
    bbox = ((min(zs), 5, 9), (max(zs), 5, 9))
    before = local_topology(vol, bbox, margin=5)
    erased = vol.copy()
    for z, y, x in bridge:
        erased[z, y, x] = 0
    after = local_topology(erased, bbox, margin=5)
    assert before.beta0 == 1 and after.beta0 == 2


def test_local_topology_equals_cropped_betti():
    rng = np.random.default_rng(37)
    vol = random_binary_volume(rng, 14, p=0.4)
    shape = vol.shape
    bbox = ((1, 0, 1), (min(4, shape[0] - 1), min(3, shape[1] - 1), min(5, shape[2] - 1)))
    margin = 2
    lo = tuple(max(0, bbox[0][i] - margin) for i in range(3))
    hi = tuple(min(shape[i] - 1, bbox[1][i] + margin) for i in range(3))
    crop = vol[lo[0] : hi[0] + 1, lo[1] : hi[1] + 1, lo[2] : hi[2] + 1]
    assert local_topology(vol, bbox, margin=margin) == betti_numbers(np.ascontiguousarray(crop))


def test_local_topology_rejects_bad_bbox():
    vol = np.zeros((8, 8, 8), dtype=np.uint8)
    with pytest.raises(UqcureError, match="out of range"):
        local_topology(vol, ((0, 0, 0), (8, 3, 3)))
    with pytest.raises(UqcureError, match="out of range"):
        local_topology(vol, ((5, 0, 0), (2, 3, 3)))
