"""Loading, validation and saving of 3D volumes and dataset triplets.

File format: a small JSON header (``*.vqh``) describing shape, dtype, spacing
and the relative path of a headerless little-endian raw payload. Axis order is
z, y, x (z-major); the linear index i maps to
``(z, y, x) = (i // (Y*X), (i // X) % Y, i % X)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import TripletValidationError, VolumeFormatError

# dtype name -> explicit little-endian numpy dtype
SUPPORTED_DTYPES = {
    "uint8": np.dtype("<u1"),
    "uint16": np.dtype("<u2"),
    "uint32": np.dtype("<u4"),
    "float32": np.dtype("<f4"),
}

DEFAULT_VOXEL_BUDGET = 2**31


@dataclass(frozen=True)
class VolumeMeta:
    """Shape/dtype/spacing metadata; shape and spacing are (z, y, x)."""

    shape: tuple[int, int, int]
    dtype: str
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)
    endianness: str = "little"

    def __post_init__(self) -> None:
        if len(self.shape) != 3 or any(int(s) <= 0 for s in self.shape):
            raise VolumeFormatError(f"shape must be 3 positive integers, got {self.shape!r}")
        if self.dtype not in SUPPORTED_DTYPES:
            raise VolumeFormatError(
                f"unsupported dtype {self.dtype!r} (expected one of {sorted(SUPPORTED_DTYPES)})"
            )
        if len(self.spacing) != 3 or any(float(s) <= 0 for s in self.spacing):
            raise VolumeFormatError(f"spacing components must be > 0, got {self.spacing!r}")
        if self.endianness != "little":
            raise VolumeFormatError(f"endianness must be 'little', got {self.endianness!r}")

    @property
    def voxel_count(self) -> int:
        z, y, x = self.shape
        return int(z) * int(y) * int(x)

    @property
    def nbytes(self) -> int:
        return self.voxel_count * SUPPORTED_DTYPES[self.dtype].itemsize


@dataclass
class Volume:
    """A dense 3D scalar array plus its metadata. Treat as immutable after load."""

    meta: VolumeMeta
    data: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        expected = SUPPORTED_DTYPES[self.meta.dtype]
        if tuple(self.data.shape) != tuple(self.meta.shape):
            raise VolumeFormatError(
                f"buffer shape {self.data.shape} does not match header shape {self.meta.shape}"
            )
        if self.data.dtype != expected:
            self.data = self.data.astype(expected)
        if not self.data.flags.c_contiguous:
            self.data = np.ascontiguousarray(self.data)

    @classmethod
    def from_array(
        cls, data: np.ndarray, spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)
    ) -> "Volume":
        name = _dtype_name(data.dtype)
        meta = VolumeMeta(shape=tuple(int(s) for s in data.shape), dtype=name, spacing=tuple(spacing))
        return cls(meta=meta, data=data)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.meta.shape

    def tobytes(self) -> bytes:
        return np.ascontiguousarray(self.data).tobytes()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Volume):
            return NotImplemented
        return self.meta == other.meta and self.tobytes() == other.tobytes()


@dataclass(frozen=True)
class DatasetTriplet:
    """Validated (raw, segmentation, uncertainty) bundle for one volume."""

    raw: Volume
    seg: Volume
    unc: Volume
    id: str = ""


def _dtype_name(dt: np.dtype) -> str:
    for name, candidate in SUPPORTED_DTYPES.items():
        if np.dtype(dt) == candidate or np.dtype(dt).name == name:
            return name
    raise VolumeFormatError(f"unsupported dtype {dt!r} (expected one of {sorted(SUPPORTED_DTYPES)})")


def read_volume(header_path: str | Path, voxel_budget: int = DEFAULT_VOXEL_BUDGET) -> Volume:
    """Read a volume from its header file; lossless counterpart of write_volume.

    Raises VolumeFormatError for malformed headers, unsupported dtypes,
    payload length mismatches or shapes exceeding the voxel budget;
    FileNotFoundError if header or payload is missing.
    """
    header_path = Path(header_path)
    try:
        text = header_path.read_text()
    except FileNotFoundError:
        raise FileNotFoundError(f"header file not found: {header_path}")
    try:
        header = json.loads(text)
    except json.JSONDecodeError as exc:
        raise VolumeFormatError(f"malformed header {header_path}: {exc}")
    if not isinstance(header, dict):
        raise VolumeFormatError(f"malformed header {header_path}: expected a JSON object")

    missing = {"shape", "dtype", "payload"} - header.keys()
    if missing:
        raise VolumeFormatError(f"malformed header {header_path}: missing keys {sorted(missing)}")

    shape = header["shape"]
    if not (isinstance(shape, list) and len(shape) == 3 and all(isinstance(s, int) for s in shape)):
        raise VolumeFormatError(f"malformed header {header_path}: shape must be 3 integers")
    meta = VolumeMeta(
        shape=tuple(shape),
        dtype=header["dtype"],
        spacing=tuple(header.get("spacing", (1.0, 1.0, 1.0))),
        endianness=header.get("endianness", "little"),
    )
    if meta.voxel_count > voxel_budget:
        raise VolumeFormatError(
            f"shape {meta.shape} exceeds voxel budget ({meta.voxel_count} > {voxel_budget})"
        )

    payload_path = header_path.parent / header["payload"]
    if not payload_path.is_file():
        raise FileNotFoundError(f"payload file not found: {payload_path}")
    payload = payload_path.read_bytes()
    if len(payload) != meta.nbytes:
        raise VolumeFormatError(
            f"payload length mismatch for {header_path}: "
            f"expected {meta.nbytes} bytes, found {len(payload)}"
        )
    data = np.frombuffer(payload, dtype=SUPPORTED_DTYPES[meta.dtype]).reshape(meta.shape)
    return Volume(meta=meta, data=data.copy())


def write_volume(vol: Volume, header_path: str | Path) -> None:
    """Write header + raw payload so that read_volume round-trips bit-exactly."""
    header_path = Path(header_path)
    payload_name = header_path.stem + ".raw"
    header = {
        "shape": list(vol.meta.shape),
        "dtype": vol.meta.dtype,
        "spacing": list(vol.meta.spacing),
        "payload": payload_name,
        "endianness": "little",
    }
    (header_path.parent / payload_name).write_bytes(vol.tobytes())
    header_path.write_text(json.dumps(header, sort_keys=True) + "\n")


def validate_triplet(raw: Volume, seg: Volume, unc: Volume, dataset_id: str = "") -> DatasetTriplet:
    """Check the triplet invariants and return the validated bundle.

    Shapes must be identical, seg must be binary {0, 1}, unc must be float32
    within [0, 1]. The error message names the violated constraint.
    """
    if not (raw.shape == seg.shape == unc.shape):
        raise TripletValidationError(
            f"shape mismatch: raw {raw.shape}, seg {seg.shape}, unc {unc.shape}"
        )
    if not np.issubdtype(seg.data.dtype, np.integer):
        raise TripletValidationError(f"segmentation must be integer-valued, got {seg.meta.dtype}")
    seg_max = int(seg.data.max(initial=0))
    if seg_max > 1 or int(seg.data.min(initial=0)) < 0:
        raise TripletValidationError(
            f"segmentation must be binary with values in {{0, 1}}, found max {seg_max}"
        )
    if unc.meta.dtype != "float32":
        raise TripletValidationError(f"uncertainty must be float32, got {unc.meta.dtype}")
    lo, hi = float(unc.data.min()), float(unc.data.max())
    if lo < 0.0 or hi > 1.0:
        raise TripletValidationError(
            f"uncertainty values out of range [0, 1]: min {lo:.6g}, max {hi:.6g}"
        )
    return DatasetTriplet(raw=raw, seg=seg, unc=unc, id=dataset_id)


def load_triplet(dataset_dir: str | Path, dataset_id: str | None = None) -> DatasetTriplet:
    """Load raw.vqh / seg.vqh / unc.vqh from a dataset directory and validate."""
    dataset_dir = Path(dataset_dir)
    raw = read_volume(dataset_dir / "raw.vqh")
    seg = read_volume(dataset_dir / "seg.vqh")
    unc = read_volume(dataset_dir / "unc.vqh")
    if dataset_id is None:
        dataset_id = dataset_dir.name
    return validate_triplet(raw, seg, unc, dataset_id=dataset_id)
