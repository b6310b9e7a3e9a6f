"""Local HTTP API exposing datasets, regions, slices, edits and exports.

Volumes stay server-side; only 2D slices cross the wire as PNG. Mutations are
serialized per dataset behind a lock, and clients may send expected_seq for
optimistic concurrency (409 on mismatch). Error bodies are {code, message}.

Slice pixel contracts (bit-exact):
  raw            8-bit grayscale, pixel = round(255 * clip((v - lo)/(hi - lo), 0, 1));
                 default window is the layer's volume-wide (min, max)
  seg            palette PNG, background transparent, foreground red (255, 0, 0)
  region_labels  palette PNG, background transparent, deterministic per-id colors
  unc            RGBA yellow (255, 255, 0), alpha = round(255 * u)
"""

from __future__ import annotations

import colorsys
import io
import tempfile
import threading
import zipfile
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from PIL import Image

from .errors import EditError, UqcureError
from .regions import ExtractionConfig, RegionSet, extract_regions, rank_volumes
from .session import CurationSession, journal_sidecar_path, open_session
from .topology import betti_numbers
from .volume import DatasetTriplet, load_triplet

AXES = {"z": 0, "y": 1, "x": 2}
LAYERS = ("raw", "seg", "unc", "region_labels")

DEFAULT_PORT = 8077
PORT_ENV_VAR = "UQCURE_PORT"


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


class DatasetEntry:
    """One curation session plus its serialization lock."""

    def __init__(self, triplet: DatasetTriplet, regions: RegionSet):
        self.triplet = triplet
        self.session: CurationSession = open_session(triplet, regions)
        self.lock = threading.Lock()


class DatasetStore:
    def __init__(self, config: ExtractionConfig | None = None):
        self.config = config or ExtractionConfig()
        self.entries: dict[str, DatasetEntry] = {}

    def add_triplet(self, triplet: DatasetTriplet) -> DatasetEntry:
        regions = extract_regions(triplet.unc, self.config, dataset_id=triplet.id)
        entry = DatasetEntry(triplet, regions)
        self.entries[triplet.id] = entry
        return entry

    def load_directory(self, data_dir: str | Path) -> None:
        data_dir = Path(data_dir)
        for sub in sorted(p for p in data_dir.iterdir() if p.is_dir()):
            if (sub / "raw.vqh").is_file():
                self.add_triplet(load_triplet(sub))

    def get(self, dataset_id: str) -> DatasetEntry:
        entry = self.entries.get(dataset_id)
        if entry is None:
            raise ApiError(404, "unknown_dataset", f"no dataset with id {dataset_id!r}")
        return entry

    def ranked_ids(self) -> list[str]:
        return rank_volumes([e.session.regions for e in self.entries.values()])


def _label_color(region_id: int) -> tuple[int, int, int]:
    hue = (region_id * 0.618033988749895) % 1.0
    r, g, b = colorsys.hsv_to_rgb(hue, 0.75, 1.0)
    return int(round(r * 255)), int(round(g * 255)), int(round(b * 255))


def _slice_2d(data: np.ndarray, axis: int, index: int) -> np.ndarray:
    if axis == 0:
        return data[index]
    if axis == 1:
        return data[:, index]
    return data[:, :, index]


def render_slice(
    volume_data: np.ndarray,
    axis: int,
    index: int,
    layer: str,
    window: tuple[float, float] | None = None,
) -> bytes:
    """Encode one slice per the documented pixel contracts; deterministic."""
    plane = _slice_2d(volume_data, axis, index)
    if layer == "raw":
        if window is None:
            lo, hi = float(volume_data.min()), float(volume_data.max())
        else:
            lo, hi = window
        if hi > lo:
            norm = np.clip((plane.astype(np.float64) - lo) / (hi - lo), 0.0, 1.0)
        else:
            norm = np.zeros(plane.shape, dtype=np.float64)
        img = Image.fromarray(np.rint(norm * 255).astype(np.uint8), mode="L")
    elif layer == "seg":
        img = Image.fromarray((plane > 0).astype(np.uint8), mode="P")
        img.putpalette([0, 0, 0, 255, 0, 0])
        img.info["transparency"] = 0
    elif layer == "region_labels":
        # palette slot per id; ids beyond 255 reuse slots (display-only)
        idx = plane.astype(np.int64)
        slot = np.where(idx > 0, (idx - 1) % 255 + 1, 0).astype(np.uint8)
        img = Image.fromarray(slot, mode="P")
        palette = [0, 0, 0]
        for rid in range(1, 256):
            palette.extend(_label_color(rid))
        img.putpalette(palette)
        img.info["transparency"] = 0
    elif layer == "unc":
        u = np.clip(plane.astype(np.float64), 0.0, 1.0)
        rgba = np.zeros((*plane.shape, 4), dtype=np.uint8)
        rgba[..., 0] = 255
        rgba[..., 1] = 255
        rgba[..., 3] = np.rint(u * 255).astype(np.uint8)
        img = Image.fromarray(rgba, mode="RGBA")
    else:
        raise ApiError(400, "bad_layer", f"layer must be one of {LAYERS}")

    buf = io.BytesIO()
    if layer in ("seg", "region_labels"):
        img.save(buf, format="PNG", transparency=0)
    else:
        img.save(buf, format="PNG")
    return buf.getvalue()


def create_app(
    data_dir: str | Path | None = None,
    config: ExtractionConfig | None = None,
    store: DatasetStore | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="uqcure", version="0.1.0")
    # browser client may be served from another local origin
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    if store is None:
        store = DatasetStore(config)
        if data_dir is not None:
            store.load_directory(data_dir)
    app.state.store = store
    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    @app.exception_handler(EditError)
    async def _edit_error(_request: Request, exc: EditError):
        return JSONResponse(status_code=400, content={"code": "bad_edit", "message": str(exc)})

    @app.exception_handler(UqcureError)
    async def _engine_error(_request: Request, exc: UqcureError):
        return JSONResponse(status_code=400, content={"code": "bad_request", "message": str(exc)})

    @app.get("/datasets")
    def list_datasets():
        out = []
        for dataset_id in store.ranked_ids():
            entry = store.entries[dataset_id]
            session = entry.session
            out.append(
                {
                    "id": dataset_id,
                    "shape": list(entry.triplet.seg.shape),
                    "top_score": session.regions.top_score(),
                    "n_regions": len(session.regions.regions),
                    "n_done": session.n_done(),
                }
            )
        return out

    @app.get("/datasets/{dataset_id}/regions")
    def list_regions(dataset_id: str):
        entry = store.get(dataset_id)
        return [r.to_dict() for r in entry.session.regions.regions]

    @app.get("/datasets/{dataset_id}/regions/{region_id}")
    def get_region(dataset_id: str, region_id: int):
        entry = store.get(dataset_id)
        region = entry.session.regions.get(region_id)
        if region is None:
            raise ApiError(404, "unknown_region", f"no region with id {region_id}")
        record = region.to_dict()
        record["recommended_view"] = {
            axis: int(round(region.centroid[i])) for axis, i in AXES.items()
        }
        return record

    @app.post("/datasets/{dataset_id}/regions/{region_id}/inspect")
    def inspect_region(dataset_id: str, region_id: int):
        entry = store.get(dataset_id)
        with entry.lock:
            if entry.session.regions.get(region_id) is None:
                raise ApiError(404, "unknown_region", f"no region with id {region_id}")
            entry.session.mark_inspected(region_id)
            return {"region_id": region_id, "status": entry.session.regions.get(region_id).status}

    @app.get("/datasets/{dataset_id}/slice")
    def get_slice(
        dataset_id: str,
        axis: str,
        index: int,
        layer: str,
        window: str | None = None,
    ):
        entry = store.get(dataset_id)
        if axis not in AXES:
            raise ApiError(400, "bad_axis", f"axis must be one of {sorted(AXES)}")
        if layer not in LAYERS:
            raise ApiError(400, "bad_layer", f"layer must be one of {LAYERS}")
        ax = AXES[axis]
        shape = entry.triplet.raw.shape
        if not (0 <= index < shape[ax]):
            raise ApiError(400, "bad_index", f"index {index} out of range for axis {axis}")
        win = None
        if window is not None:
            try:
                lo, hi = (float(part) for part in window.split(","))
            except ValueError:
                raise ApiError(400, "bad_window", "window must be 'low,high'")
            if not lo < hi:
                raise ApiError(400, "bad_window", "window low must be < high")
            win = (lo, hi)
        if layer == "raw":
            data = entry.triplet.raw.data
        elif layer == "seg":
            # hold the writer lock so the slice reflects a journal prefix,
            # never a half-applied op
            with entry.lock:
                data = entry.session.working_seg.copy()
        elif layer == "unc":
            data = entry.triplet.unc.data
        else:
            data = entry.session.regions.label_volume.data
        png = render_slice(data, ax, index, layer, win)
        return Response(content=png, media_type="image/png")

    @app.post("/datasets/{dataset_id}/edits")
    async def post_edit(dataset_id: str, request: Request):
        entry = store.get(dataset_id)
        body = await request.json()
        kind = body.get("kind")
        voxels = body.get("voxels")
        region_id = body.get("region_id")
        expected_seq = body.get("expected_seq")
        if not isinstance(voxels, list):
            raise ApiError(400, "bad_voxels", "voxels must be a list of [z, y, x] triples")
        with entry.lock:
            if expected_seq is not None and expected_seq != entry.session.seq:
                raise ApiError(
                    409,
                    "stale_seq",
                    f"expected_seq {expected_seq} != current seq {entry.session.seq}",
                )
            diff = entry.session.apply_edit(kind, voxels, region_id)
            return {"seq": entry.session.seq, "local_topology_diff": diff.to_dict()}

    @app.post("/datasets/{dataset_id}/undo")
    def post_undo(dataset_id: str):
        entry = store.get(dataset_id)
        with entry.lock:
            try:
                entry.session.undo()
            except EditError as exc:
                raise ApiError(409, "nothing_to_undo", str(exc))
            return {"seq": entry.session.seq}

    @app.post("/datasets/{dataset_id}/regions/{region_id}/done")
    def post_done(dataset_id: str, region_id: int):
        entry = store.get(dataset_id)
        with entry.lock:
            region = entry.session.regions.get(region_id)
            if region is None:
                raise ApiError(404, "unknown_region", f"no region with id {region_id}")
            if region.status == "done":
                raise ApiError(409, "already_done", f"region {region_id} is already done")
            next_region = entry.session.mark_done(region_id)
            return {"seq": entry.session.seq, "next_region": next_region}

    @app.get("/datasets/{dataset_id}/export")
    def get_export(dataset_id: str):
        entry = store.get(dataset_id)
        with entry.lock:
            with tempfile.TemporaryDirectory() as tmp:
                header = Path(tmp) / "export.vqh"
                entry.session.export_segmentation(header)
                buf = io.BytesIO()
                with zipfile.ZipFile(buf, "w", zipfile.ZIP_STORED) as zf:
                    for name in ("export.vqh", "export.raw"):
                        zf.writestr(name, (Path(tmp) / name).read_bytes())
                    sidecar = journal_sidecar_path(header)
                    zf.writestr(sidecar.name, sidecar.read_bytes())
        return Response(
            content=buf.getvalue(),
            media_type="application/zip",
            headers={"Content-Disposition": f'attachment; filename="{dataset_id}_export.zip"'},
        )

    @app.get("/datasets/{dataset_id}/topology")
    def get_topology(dataset_id: str):
        entry = store.get(dataset_id)
        with entry.lock:
            snapshot = entry.session.working_seg.copy()
        return betti_numbers(snapshot).to_dict()

    @app.get("/datasets/{dataset_id}/state")
    def get_state(dataset_id: str):
        # lightweight reconciliation point for optimistic clients
        entry = store.get(dataset_id)
        session = entry.session
        return {
            "seq": session.seq,
            "n_done": session.n_done(),
            "n_regions": len(session.regions.regions),
            "current_region": session.cursor,
        }

    return app


def serve(
    data_dir: str | Path,
    port: int = DEFAULT_PORT,
    host: str = "127.0.0.1",
    config: ExtractionConfig | None = None,
    ui_dir: str | Path | None = None,
) -> None:
    import uvicorn

    app = create_app(data_dir=data_dir, config=config, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
