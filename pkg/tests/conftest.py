from __future__ import annotations

import numpy as np
import pytest

from uqcure import Volume, validate_triplet


@pytest.fixture
def small_triplet():
    """A tiny valid triplet with a two-voxel segmentation."""
    shape = (12, 12, 12)
    raw = Volume.from_array(np.full(shape, 0.2, dtype=np.float32))
    seg_data = np.zeros(shape, dtype=np.uint8)
    seg_data[4:8, 4:8, 4:8] = 1
    seg = Volume.from_array(seg_data)
    unc = Volume.from_array(np.zeros(shape, dtype=np.float32))
    return validate_triplet(raw, seg, unc, dataset_id="small")


def random_binary_volume(rng: np.random.Generator, max_side: int, p: float = 0.3) -> np.ndarray:
    shape = tuple(int(s) for s in rng.integers(2, max_side + 1, size=3))
    return (rng.random(shape) < p).astype(np.uint8)
