"""HTTP facade: volume upload, slice images, segmentation, mask download.

Endpoints (all under /api/v1):
  POST /volumes                                multipart upload (header+raw or .mha)
  GET  /volumes/{id}/slices/{axis}/{index}     8-bit PNG, window/level query params
  POST /volumes/{id}/segmentations             run the engine at a seed point
  GET  /segmentations/{id}/mask                MetaImage mask (.mha, local payload)
  GET  /segmentations/{id}/overlays/{axis}/{index}  slice with mask fill composited

Errors carry ``{"error": str, "field"?: str}``. Environment: GLIOCUT_HOST,
GLIOCUT_PORT, GLIOCUT_MAX_UPLOAD_BYTES (default 512 MiB), GLIOCUT_PERSIST_DIR.
"""

from __future__ import annotations

import io
import json
import os
import threading
import uuid
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from PIL import Image
from pydantic import BaseModel, Field, field_validator

from .graph import SegmentationParams
from .segment import SeedOutsideVolumeError, segment
from .volume import (MetaImageError, Volume, load_volume_bytes, mask_bytes,
                     mask_from_volume, volume_bytes)

DEFAULT_MAX_UPLOAD = 512 * 1024 * 1024

AXES = {"x": 0, "y": 1, "z": 2}


def slice_image(data: np.ndarray, axis: str, index: int) -> np.ndarray:
    """2D float slice as [row, col]; columns follow the first remaining axis
    in (x, y, z) order, rows the second."""
    a = AXES[axis]
    sl = [slice(None)] * 3
    sl[a] = index
    return data[tuple(sl)].T


def window_level_to_u8(img: np.ndarray, window: float, level: float) -> np.ndarray:
    window = max(float(window), 1e-9)
    lo = level - window / 2.0
    u = np.clip((img - lo) / window, 0.0, 1.0)
    return np.round(u * 255.0).astype(np.uint8)


def _png_bytes(arr: np.ndarray, mode: str) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(arr, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


class SegmentationRequest(BaseModel):
    seed_mm: list[float] = Field(min_length=3, max_length=3)
    delta_r: int = 2
    subdivisions: int = 3
    samples_per_ray: int = 60
    max_radius_mm: float = 50.0
    mean_region_d: int = 5

    @field_validator("delta_r")
    @classmethod
    def _delta_r_nonneg(cls, v):
        if v < 0:
            raise ValueError("must be >= 0")
        return v

    @field_validator("subdivisions")
    @classmethod
    def _subdiv_range(cls, v):
        if not (0 <= v <= 7):
            raise ValueError("must be in 0..7")
        return v

    @field_validator("samples_per_ray")
    @classmethod
    def _samples_min(cls, v):
        if v < 2:
            raise ValueError("must be >= 2")
        return v

    @field_validator("max_radius_mm")
    @classmethod
    def _radius_pos(cls, v):
        if v <= 0:
            raise ValueError("must be > 0")
        return v

    @field_validator("mean_region_d")
    @classmethod
    def _d_odd(cls, v):
        if v < 1 or v % 2 == 0:
            raise ValueError("must be an odd integer >= 1")
        return v


@dataclass
class SessionStore:
    """Uploaded volumes and finished segmentations, keyed by opaque ids.

    Volumes are immutable once stored; concurrent segmentations never block
    each other, only the id-table insert is serialized.
    """

    persist_dir: str | None = None
    volumes: dict = field(default_factory=dict)
    segmentations: dict = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def _manifest_path(self):
        return os.path.join(self.persist_dir, "manifest.json")

    def _write_manifest(self):
        manifest = {
            "volumes": {vid: f"{vid}.mha" for vid in self.volumes},
            "segmentations": {
                sid: {"file": f"{sid}.mha", "volume_id": entry["volume_id"],
                      "summary": entry["summary"]}
                for sid, entry in self.segmentations.items()
            },
        }
        tmp = self._manifest_path() + ".tmp"
        with open(tmp, "w", encoding="ascii") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
        os.replace(tmp, self._manifest_path())

    def load_persisted(self):
        if not self.persist_dir or not os.path.exists(self._manifest_path()):
            return
        with open(self._manifest_path(), "r", encoding="ascii") as fh:
            manifest = json.load(fh)
        for vid, name in manifest.get("volumes", {}).items():
            with open(os.path.join(self.persist_dir, name), "rb") as fh:
                self.volumes[vid] = load_volume_bytes(fh.read())
        for sid, entry in manifest.get("segmentations", {}).items():
            with open(os.path.join(self.persist_dir, entry["file"]), "rb") as fh:
                blob = fh.read()
            self.segmentations[sid] = {
                "volume_id": entry["volume_id"],
                "summary": entry["summary"],
                "mask_bytes": blob,
                "mask": mask_from_volume(load_volume_bytes(blob)),
            }

    def add_volume(self, volume: Volume, blob: bytes) -> str:
        vid = uuid.uuid4().hex
        with self.lock:
            self.volumes[vid] = volume
            if self.persist_dir:
                with open(os.path.join(self.persist_dir, f"{vid}.mha"), "wb") as fh:
                    fh.write(blob)
                self._write_manifest()
        return vid

    def add_segmentation(self, volume_id: str, summary: dict, mask, blob: bytes) -> str:
        sid = uuid.uuid4().hex
        with self.lock:
            self.segmentations[sid] = {
                "volume_id": volume_id, "summary": summary,
                "mask": mask, "mask_bytes": blob,
            }
            if self.persist_dir:
                with open(os.path.join(self.persist_dir, f"{sid}.mha"), "wb") as fh:
                    fh.write(blob)
                self._write_manifest()
        return sid


def _error(status: int, message: str, fieldname: str | None = None) -> JSONResponse:
    body = {"error": message}
    if fieldname:
        body["field"] = fieldname
    return JSONResponse(status_code=status, content=body)


def create_app(max_upload_bytes: int | None = None, persist_dir: str | None = None) -> FastAPI:
    max_upload = max_upload_bytes if max_upload_bytes is not None else int(
        os.environ.get("GLIOCUT_MAX_UPLOAD_BYTES", DEFAULT_MAX_UPLOAD))
    persist = persist_dir if persist_dir is not None else os.environ.get("GLIOCUT_PERSIST_DIR")
    if persist:
        os.makedirs(persist, exist_ok=True)
    store = SessionStore(persist_dir=persist)
    store.load_persisted()

    app = FastAPI(title="gliocut service")
    app.state.store = store

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        loc = [str(p) for p in first.get("loc", []) if p != "body"]
        return _error(422, first.get("msg", "validation error"), ".".join(loc) or None)

    @app.post("/api/v1/volumes", status_code=201)
    async def post_volume(header: UploadFile | None = None, raw: UploadFile | None = None,
                          file: UploadFile | None = None):
        if file is not None:
            blob = await file.read()
            if len(blob) > max_upload:
                return _error(413, f"upload exceeds {max_upload} bytes")
            parts = (blob, None)
        elif header is not None and raw is not None:
            head = await header.read()
            payload = await raw.read()
            if len(head) + len(payload) > max_upload:
                return _error(413, f"upload exceeds {max_upload} bytes")
            parts = (head, payload)
        else:
            return _error(400, "expected fields 'header' and 'raw', or a single 'file'")
        try:
            volume = load_volume_bytes(*parts)
        except MetaImageError as exc:
            return _error(400, str(exc))
        # stored canonically as a single local-payload file
        blob = parts[0] if parts[1] is None else volume_bytes(volume)
        vid = store.add_volume(volume, blob)
        lo, hi = volume.value_range()
        return JSONResponse(status_code=201, content={
            "id": vid,
            "dims": list(volume.dims),
            "spacing": list(volume.spacing),
            "origin": list(volume.origin),
            "gray_min": lo,
            "gray_max": hi,
        })

    def _get_volume(volume_id: str) -> Volume | None:
        return store.volumes.get(volume_id)

    def _slice_png(data: np.ndarray, volume: Volume, axis: str, index: int,
                   window: float | None, level: float | None,
                   mask: np.ndarray | None = None):
        if axis not in AXES:
            return _error(422, f"axis must be one of x, y, z, got {axis!r}", "axis")
        dim = volume.dims[AXES[axis]]
        if not (0 <= index < dim):
            return _error(416, f"slice index {index} out of range 0..{dim - 1}", "index")
        lo, hi = volume.value_range()
        if window is None:
            window = hi - lo if hi > lo else 1.0
        if level is None:
            level = (hi + lo) / 2.0
        img = window_level_to_u8(slice_image(data, axis, index), window, level)
        if mask is None:
            return Response(content=_png_bytes(img, "L"), media_type="image/png")
        msl = slice_image(mask, axis, index) != 0
        rgb = np.stack([img, img, img], axis=-1).astype(np.float64)
        rgb[msl] = rgb[msl] * 0.5 + np.array([255.0, 0.0, 0.0]) * 0.5
        return Response(content=_png_bytes(np.round(rgb).astype(np.uint8), "RGB"),
                        media_type="image/png")

    @app.get("/api/v1/volumes/{volume_id}/slices/{axis}/{index}")
    async def get_slice(volume_id: str, axis: str, index: int,
                        window: float | None = None, level: float | None = None):
        volume = _get_volume(volume_id)
        if volume is None:
            return _error(404, "unknown volume id")
        return _slice_png(volume.data, volume, axis, index, window, level)

    @app.post("/api/v1/volumes/{volume_id}/segmentations", status_code=201)
    async def post_segment(volume_id: str, body: SegmentationRequest):
        volume = _get_volume(volume_id)
        if volume is None:
            return _error(404, "unknown volume id")
        params = SegmentationParams(
            delta_r=body.delta_r,
            samples_per_ray=body.samples_per_ray,
            max_radius_mm=body.max_radius_mm,
            subdivisions=body.subdivisions,
            mean_region_d=body.mean_region_d,
        )
        try:
            params.validate()
        except ValueError as exc:
            return _error(422, str(exc), "params")
        try:
            result = segment(volume, body.seed_mm, params)
        except SeedOutsideVolumeError as exc:
            return _error(422, str(exc), "seed_mm")
        histogram = np.bincount(result.cut_indices, minlength=params.samples_per_ray)
        summary = {
            "volume_mm3": result.volume_mm3,
            "mean_gray": result.mean_gray,
            "runtime_ms": result.runtime_ms,
            "degenerate": result.degenerate,
            "cut_index_histogram": histogram.tolist(),
        }
        sid = store.add_segmentation(volume_id, summary, result.mask, mask_bytes(result.mask))
        return JSONResponse(status_code=201, content={"id": sid, **summary})

    @app.get("/api/v1/segmentations/{segmentation_id}/mask")
    async def get_mask(segmentation_id: str):
        entry = store.segmentations.get(segmentation_id)
        if entry is None:
            return _error(404, "unknown segmentation id")
        return Response(content=entry["mask_bytes"], media_type="application/octet-stream",
                        headers={"Content-Disposition": 'attachment; filename="mask.mha"'})

    @app.get("/api/v1/segmentations/{segmentation_id}/overlays/{axis}/{index}")
    async def get_overlay(segmentation_id: str, axis: str, index: int,
                          window: float | None = None, level: float | None = None):
        entry = store.segmentations.get(segmentation_id)
        if entry is None:
            return _error(404, "unknown segmentation id")
        volume = _get_volume(entry["volume_id"])
        if volume is None:
            return _error(404, "volume of this segmentation is gone")
        return _slice_png(volume.data, volume, axis, index, window, level,
                          mask=entry["mask"].data)

    return app


def main() -> None:
    import uvicorn

    uvicorn.run(create_app(),
                host=os.environ.get("GLIOCUT_HOST", "127.0.0.1"),
                port=int(os.environ.get("GLIOCUT_PORT", "8000")))


if __name__ == "__main__":
    main()
