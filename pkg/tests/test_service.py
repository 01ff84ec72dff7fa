import io

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from gliocut import PhantomSpec, SegmentationParams, generate_phantom, segment
from gliocut.service import create_app
from gliocut.volume import (load_volume_bytes, mask_bytes, save_mask, save_volume,
                            volume_bytes)


@pytest.fixture(scope="module")
def phantom():
    spec = PhantomSpec(dims=(48, 48, 48), radius_mm=15.0)
    volume, truth = generate_phantom(spec, 0)
    return spec, volume, truth


@pytest.fixture()
def client():
    app = create_app(max_upload_bytes=64 * 1024 * 1024)
    with TestClient(app) as c:
        yield c


def upload_pair(client, volume, tmp_path):
    save_volume(volume, tmp_path / "v.mhd")
    files = {
        "header": ("v.mhd", (tmp_path / "v.mhd").read_bytes()),
        "raw": ("v.raw", (tmp_path / "v.raw").read_bytes()),
    }
    return client.post("/api/v1/volumes", files=files)


class TestPostVolume:
    def test_multipart_pair(self, client, phantom, tmp_path):
        _, volume, _ = phantom
        resp = upload_pair(client, volume, tmp_path)
        assert resp.status_code == 201
        body = resp.json()
        assert body["dims"] == [48, 48, 48]
        assert body["gray_min"] == 50.0
        assert body["gray_max"] == 200.0

    def test_single_file_upload(self, client, phantom):
        _, volume, _ = phantom
        resp = client.post("/api/v1/volumes",
                           files={"file": ("v.mha", volume_bytes(volume))})
        assert resp.status_code == 201

    def test_truncated_raw_400(self, client, phantom, tmp_path):
        _, volume, _ = phantom
        save_volume(volume, tmp_path / "v.mhd")
        raw = (tmp_path / "v.raw").read_bytes()[:-10]
        resp = client.post("/api/v1/volumes", files={
            "header": ("v.mhd", (tmp_path / "v.mhd").read_bytes()),
            "raw": ("v.raw", raw),
        })
        assert resp.status_code == 400
        assert "length mismatch" in resp.json()["error"]

    def test_oversize_413(self, phantom, tmp_path):
        _, volume, _ = phantom
        app = create_app(max_upload_bytes=1000)
        with TestClient(app) as small:
            resp = upload_pair(small, volume, tmp_path)
        assert resp.status_code == 413

    def test_no_fields_400(self, client):
        resp = client.post("/api/v1/volumes")
        assert resp.status_code == 400


class TestSlices:
    @pytest.fixture()
    def vid(self, client, phantom, tmp_path):
        _, volume, _ = phantom
        return upload_pair(client, volume, tmp_path).json()["id"]

    def test_png_slice(self, client, vid):
        resp = client.get(f"/api/v1/volumes/{vid}/slices/z/24")
        assert resp.status_code == 200
        assert resp.headers["content-type"] == "image/png"
        img = np.asarray(Image.open(io.BytesIO(resp.content)))
        assert img.shape == (48, 48)
        assert img.max() == 255 and img.min() == 0

    def test_unknown_volume_404(self, client):
        assert client.get("/api/v1/volumes/nope/slices/z/0").status_code == 404

    def test_index_out_of_range_416(self, client, vid):
        assert client.get(f"/api/v1/volumes/{vid}/slices/z/48").status_code == 416

    def test_bad_axis_422(self, client, vid):
        assert client.get(f"/api/v1/volumes/{vid}/slices/w/0").status_code == 422

    def test_window_level_clamps(self, client, vid):
        resp = client.get(f"/api/v1/volumes/{vid}/slices/z/24?window=1&level=125")
        img = np.asarray(Image.open(io.BytesIO(resp.content)))
        assert set(np.unique(img).tolist()) <= {0, 255}

    def test_idempotent_reads(self, client, vid):
        a = client.get(f"/api/v1/volumes/{vid}/slices/x/10").content
        b = client.get(f"/api/v1/volumes/{vid}/slices/x/10").content
        assert a == b


class TestSegmentation:
    @pytest.fixture()
    def vid(self, client, phantom, tmp_path):
        _, volume, _ = phantom
        return upload_pair(client, volume, tmp_path).json()["id"]

    def seed_body(self, **overrides):
        body = {"seed_mm": [23.5, 23.5, 23.5]}
        body.update(overrides)
        return body

    def test_segment_and_mask_parity(self, client, phantom, vid, solver_warm):
        spec, volume, _ = phantom
        resp = client.post(f"/api/v1/volumes/{vid}/segmentations", json=self.seed_body())
        assert resp.status_code == 201
        body = resp.json()
        analytic = 4.0 / 3.0 * np.pi * 15 ** 3
        assert abs(body["volume_mm3"] - analytic) < 0.10 * analytic
        assert len(body["cut_index_histogram"]) == 60

        mask_resp = client.get(f"/api/v1/segmentations/{body['id']}/mask")
        assert mask_resp.status_code == 200
        # engine parity: payload equals a direct engine run, byte for byte
        direct = segment(volume, (23.5, 23.5, 23.5), SegmentationParams())
        assert mask_resp.content == mask_bytes(direct.mask)
        fetched = load_volume_bytes(mask_resp.content)
        assert fetched.dims == volume.dims
        # re-fetch is byte-identical
        assert client.get(f"/api/v1/segmentations/{body['id']}/mask").content == mask_resp.content

    def test_invalid_delta_422(self, client, vid):
        resp = client.post(f"/api/v1/volumes/{vid}/segmentations",
                           json=self.seed_body(delta_r=-1))
        assert resp.status_code == 422
        assert "field" in resp.json()

    def test_seed_outside_422(self, client, vid):
        resp = client.post(f"/api/v1/volumes/{vid}/segmentations",
                           json=self.seed_body(seed_mm=[500.0, 0.0, 0.0]))
        assert resp.status_code == 422
        assert resp.json()["field"] == "seed_mm"

    def test_unknown_volume_404(self, client):
        resp = client.post("/api/v1/volumes/zzz/segmentations", json=self.seed_body())
        assert resp.status_code == 404

    def test_mask_unknown_404(self, client):
        assert client.get("/api/v1/segmentations/zzz/mask").status_code == 404


class TestOverlay:
    @pytest.fixture()
    def seg(self, client, phantom, tmp_path, solver_warm):
        _, volume, _ = phantom
        vid = upload_pair(client, volume, tmp_path).json()["id"]
        resp = client.post(f"/api/v1/volumes/{vid}/segmentations",
                           json={"seed_mm": [23.5, 23.5, 23.5]})
        return vid, resp.json()["id"]

    def test_overlay_marks_exactly_mask_pixels(self, client, seg, phantom):
        vid, sid = seg
        k = 24
        plain = np.asarray(Image.open(io.BytesIO(
            client.get(f"/api/v1/volumes/{vid}/slices/z/{k}").content)))
        over = np.asarray(Image.open(io.BytesIO(
            client.get(f"/api/v1/segmentations/{sid}/overlays/z/{k}").content)))
        mask_blob = client.get(f"/api/v1/segmentations/{sid}/mask").content
        mask = load_volume_bytes(mask_blob).data[:, :, k].T != 0
        differs = (over != np.stack([plain] * 3, axis=-1)).any(axis=2)
        assert np.array_equal(differs, mask)

    def test_overlay_outside_mask_is_plain(self, client, seg):
        vid, sid = seg
        plain = client.get(f"/api/v1/volumes/{vid}/slices/z/0").content
        over = client.get(f"/api/v1/segmentations/{sid}/overlays/z/0").content
        img_a = np.asarray(Image.open(io.BytesIO(plain)))
        img_b = np.asarray(Image.open(io.BytesIO(over)))
        assert np.array_equal(np.stack([img_a] * 3, axis=-1), img_b)

    def test_overlay_416(self, client, seg):
        _, sid = seg
        assert client.get(f"/api/v1/segmentations/{sid}/overlays/z/99").status_code == 416


class TestPersistence:
    def test_restart_keeps_volumes_and_masks(self, phantom, tmp_path, solver_warm):
        _, volume, _ = phantom
        persist = tmp_path / "store"
        app = create_app(persist_dir=str(persist))
        with TestClient(app) as c:
            vid = upload_pair(c, volume, tmp_path).json()["id"]
            sid = c.post(f"/api/v1/volumes/{vid}/segmentations",
                         json={"seed_mm": [23.5, 23.5, 23.5]}).json()["id"]
            blob = c.get(f"/api/v1/segmentations/{sid}/mask").content

        app2 = create_app(persist_dir=str(persist))
        with TestClient(app2) as c2:
            assert c2.get(f"/api/v1/volumes/{vid}/slices/z/0").status_code == 200
            assert c2.get(f"/api/v1/segmentations/{sid}/mask").content == blob
