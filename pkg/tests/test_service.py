import io
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from stcube.service import create_app
from stcube.synthetic import make_wave_dataset

_CAM = {
    "position": [32, 32, -100], "view_dir": [0, 0, 1], "up": [0, 1, 0],
    "width": 96, "height": 96, "mode": "orthographic", "ortho_half_height": 50,
}
_MESH_CAM = {
    "position": [0, 0, 240], "view_dir": [0, 0, -1], "up": [0, 1, 0],
    "width": 96, "height": 96, "mode": "orthographic", "ortho_half_height": 120,
}


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app(make_wave_dataset(time_steps=20)))


@pytest.fixture(scope="module")
def stc_id(client):
    req = {"plane": {"origin": [0, 0, 0], "normal": [0, 0, 1]}, "resolution": 64}
    sid = client.post("/api/stc", json=req).json()["stc_id"]
    _wait_ready(client, sid)
    # identical request deduplicates to the same id
    assert client.post("/api/stc", json=req).json()["stc_id"] == sid
    return sid


def _wait_ready(client, sid, timeout=20.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        st = client.get(f"/api/stc/{sid}/status").json()
        if st["state"] != "building":
            assert st["state"] == "ready", st
            return st
        time.sleep(0.05)
    raise TimeoutError("build did not finish")


def test_info(client):
    info = client.get("/api/info").json()
    assert info["name"] == "division-waves"
    assert info["time_range"] == [0, 19]
    names = {p["name"] for p in info["properties"]}
    assert names == {"volume", "generation"}
    assert info["object_counts"]["0"] == 75


def test_status_payload(client, stc_id):
    st = client.get(f"/api/stc/{stc_id}/status").json()
    assert st["shape"] == [64, 64, 20]
    assert st["time_map"] == list(range(20))
    assert client.get("/api/stc/nonesuch/status").status_code == 404


def test_render_returns_deterministic_png(client, stc_id):
    req = {"view": "stc", "stc_id": stc_id, "camera": _CAM}
    r = client.post("/api/render", json=req)
    assert r.status_code == 200
    assert r.headers["content-type"] == "image/png"
    img = np.asarray(Image.open(io.BytesIO(r.content)))
    assert img.shape == (96, 96, 4)
    assert client.post("/api/render", json=req).content == r.content


def test_render_with_session(client, stc_id):
    req = {
        "view": "stc", "stc_id": stc_id, "camera": _CAM,
        "session": {"active_property": "volume", "active_gradient": "plasma"},
    }
    plain = client.post(
        "/api/render", json={"view": "stc", "stc_id": stc_id, "camera": _CAM}
    )
    styled = client.post("/api/render", json=req)
    assert styled.status_code == 200
    assert styled.content != plain.content


def test_render_mesh_view(client, stc_id):
    req = {"view": "mesh", "stc_id": stc_id, "time": 5, "camera": _MESH_CAM,
           "overlay": True}
    r = client.post("/api/render", json=req)
    assert r.status_code == 200
    bare = client.post("/api/render", json={**req, "overlay": False})
    assert bare.content != r.content


def test_pick_hits_and_misses(client, stc_id):
    base = {"view": "stc", "stc_id": stc_id, "camera": _CAM}
    found = None
    for px in range(8, 96, 8):
        for py in range(8, 96, 8):
            r = client.post("/api/pick", json={**base, "pixel": [px, py]})
            assert r.status_code == 200
            if r.json() is not None:
                found = r.json()
                break
        if found:
            break
    assert found is not None
    assert set(found) == {"id", "t", "summary"}
    assert "properties" in found["summary"]
    assert found["summary"]["lifespan"] is not None
    corner = client.post("/api/pick", json={**base, "pixel": [0, 0]})
    assert corner.json() is None


def test_pick_mesh_view(client):
    req = {"view": "mesh", "time": 5, "camera": _MESH_CAM, "pixel": [48, 48]}
    r = client.post("/api/pick", json=req)
    assert r.status_code == 200  # may be null depending on layout; shape only


def test_masked_pick_returns_null(client, stc_id):
    base = {"view": "stc", "stc_id": stc_id, "camera": _CAM}
    hit = None
    for px in range(8, 96, 4):
        r = client.post("/api/pick", json={**base, "pixel": [px, 48]})
        if r.json():
            hit = r.json()
            pixel = [px, 48]
            break
    assert hit
    masked = client.post(
        "/api/pick",
        json={**base, "pixel": pixel,
              "session": {"object_states": {str(hit["id"]): "masked"}}},
    ).json()
    assert masked is None or masked["id"] != hit["id"]


def test_lineage_and_histogram(client):
    lin = client.get("/api/lineage/1").json()
    assert lin["id"] == 1
    assert [1] == lin["ids"] or set(lin["ids"]) >= {1}
    assert client.get("/api/lineage/99999").status_code == 404
    hist = client.get("/api/histogram/divisions").json()["histogram"]
    assert [(t, n) for t, n in hist if n] == [(10, 50)]


def test_error_codes(client, stc_id):
    # malformed body
    r = client.post("/api/stc", json={"plane": {"origin": [0, 0], "normal": [0, 0, 1]}})
    assert r.status_code == 400
    assert "detail" in r.json()
    # zero normal fails model validation, also 400
    r = client.post(
        "/api/stc",
        json={"plane": {"origin": [0, 0, 0], "normal": [0, 0, 0]}, "resolution": 64},
    )
    assert r.status_code == 400
    # unknown fields are rejected rather than silently dropped
    r = client.post(
        "/api/stc",
        json={"plane": {"origin": [0, 0, 0], "normal": [0, 0, 1]}, "res": 64},
    )
    assert r.status_code == 400
    cam = _CAM
    assert client.post(
        "/api/render", json={"view": "stc", "stc_id": "nope", "camera": cam}
    ).status_code == 404
    assert client.post(
        "/api/render",
        json={"view": "stc", "stc_id": stc_id, "camera": cam,
              "session": {"active_property": "nope"}},
    ).status_code == 400
    assert client.post(
        "/api/pick",
        json={"view": "stc", "stc_id": stc_id, "camera": cam, "pixel": [500, 0]},
    ).status_code == 400
    assert client.post(
        "/api/render",
        json={"view": "stc", "stc_id": stc_id, "camera": cam,
              "session": {"active_gradient": "sepia"}},
    ).status_code == 400


def test_render_while_building_gives_409(client):
    req = {"plane": {"origin": [50, 0, 0], "normal": [1, 0, 0]}, "resolution": 512}
    sid = client.post("/api/stc", json=req).json()["stc_id"]
    r = client.post(
        "/api/render", json={"view": "stc", "stc_id": sid, "camera": _CAM}
    )
    assert r.status_code in (200, 409)  # 409 unless the build already won
    if r.status_code == 409:
        _wait_ready(client, sid)
        r2 = client.post(
            "/api/render", json={"view": "stc", "stc_id": sid, "camera": _CAM}
        )
        assert r2.status_code == 200
