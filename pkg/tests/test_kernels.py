"""Backend parity: the compiled kernels must match the pure versions bit for
bit on identical inputs, and the dispatch module must honor the override."""

import os
import subprocess
import sys

import numpy as np
import pytest

from stcube import kernels
from stcube.kernels import _pure

_core = kernels.backends().get("compiled")
needs_compiled = pytest.mark.skipif(
    _core is None, reason="compiled backend not built"
)


def _random_loops(rng, n_loops):
    vx, vy, starts = [], [], [0]
    for _ in range(n_loops):
        n = rng.integers(3, 9)
        ang = np.sort(rng.uniform(0, 2 * np.pi, n))
        r = rng.uniform(2.0, 20.0, n)
        cx, cy = rng.uniform(5, 60, 2)
        vx.extend(cx + r * np.cos(ang))
        vy.extend(cy + r * np.sin(ang))
        starts.append(len(vx))
    return (
        np.asarray(vx, dtype=np.float64),
        np.asarray(vy, dtype=np.float64),
        np.asarray(starts, dtype=np.int64),
    )


@needs_compiled
def test_fill_parity():
    rng = np.random.default_rng(7)
    for trial in range(50):
        vx, vy, starts = _random_loops(rng, rng.integers(1, 4))
        a = np.zeros((64, 64), dtype=np.uint32)
        b = np.zeros((64, 64), dtype=np.uint32)
        _pure.fill_polygon(a, trial + 1, vx, vy, starts, 0.0, 0.0, 1.0)
        _core.fill_polygon(b, trial + 1, vx, vy, starts, 0.0, 0.0, 1.0)
        np.testing.assert_array_equal(a, b)


@needs_compiled
def test_raycast_parity():
    rng = np.random.default_rng(11)
    ids = rng.integers(0, 5, size=(20, 32, 32)).astype(np.uint32)
    vis = np.ones((5, 20), dtype=np.uint8)
    vis[0] = 0
    vis[2, ::2] = 0
    origins = rng.uniform(-40, 70, size=(200, 3))
    dirs = rng.normal(size=(200, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    for clip in (np.zeros(7), np.array([1.0, 16, 16, 10, 0, 0, 1.0])):
        id_a, vox_a = _pure.raycast_first_hit(ids, vis, origins, dirs, clip)
        id_b, vox_b = _core.raycast_first_hit(ids, vis, origins, dirs, clip)
        np.testing.assert_array_equal(id_a, id_b)
        np.testing.assert_array_equal(vox_a, vox_b)
    assert (id_a > 0).any() and (id_a == 0).any()


@needs_compiled
def test_raster_parity():
    rng = np.random.default_rng(3)
    m = 40
    pts = rng.uniform(-10, 70, size=(m, 3, 2))
    z = rng.uniform(0.1, 50.0, size=(m, 3))
    colors = rng.uniform(0, 1, size=(m, 3)).astype(np.float32)
    img_a, z_a, t_a = _pure.raster_triangles(pts, z, colors, 64, 64)
    img_b, z_b, t_b = _core.raster_triangles(pts, z, colors, 64, 64)
    np.testing.assert_array_equal(img_a, img_b)
    np.testing.assert_array_equal(z_a, z_b)
    np.testing.assert_array_equal(t_a, t_b)


def test_fill_claims_only_empty_pixels():
    ids = np.zeros((16, 16), dtype=np.uint32)
    sq = lambda x0, y0, s: (  # noqa: E731
        np.array([x0, x0 + s, x0 + s, x0], dtype=float),
        np.array([y0, y0, y0 + s, y0 + s], dtype=float),
        np.array([0, 4], dtype=np.int64),
    )
    vx, vy, st = sq(2, 2, 8)
    kernels.fill_polygon(ids, 1, vx, vy, st, 0.0, 0.0, 1.0)
    before = ids.copy()
    vx, vy, st = sq(4, 4, 8)
    kernels.fill_polygon(ids, 2, vx, vy, st, 0.0, 0.0, 1.0)
    overlap = (before == 1) & (ids != 1)
    assert not overlap.any()
    assert (ids == 2).any()


def test_fill_even_odd_hole():
    ids = np.zeros((32, 32), dtype=np.uint32)
    vx = np.array([1, 31, 31, 1, 8, 24, 24, 8], dtype=float)
    vy = np.array([1, 1, 31, 31, 8, 8, 24, 24], dtype=float)
    starts = np.array([0, 4, 8], dtype=np.int64)
    kernels.fill_polygon(ids, 5, vx, vy, starts, 0.0, 0.0, 1.0)
    assert ids[16, 16] == 0  # inside the hole
    assert ids[4, 4] == 5


def test_raycast_visibility_gates_hits():
    ids = np.ones((4, 8, 8), dtype=np.uint32)
    vis = np.zeros((2, 4), dtype=np.uint8)
    origins = np.array([[4.0, 4.0, -5.0]])
    dirs = np.array([[0.0, 0.0, 1.0]])
    hid, _ = kernels.raycast_first_hit(ids, vis, origins, dirs, np.zeros(7))
    assert hid[0] == 0
    vis[1, 2] = 1  # only depth slice 2 visible
    hid, vox = kernels.raycast_first_hit(ids, vis, origins, dirs, np.zeros(7))
    assert hid[0] == 1 and vox[0, 2] == 2


def test_raycast_clip_removes_positive_side():
    ids = np.ones((8, 8, 8), dtype=np.uint32)
    vis = np.ones((2, 8), dtype=np.uint8)
    vis[0] = 0
    origins = np.array([[4.0, 4.0, -5.0]])
    dirs = np.array([[0.0, 0.0, 1.0]])
    # clip off z < 4 (normal -z keeps the far half)
    clip = np.array([1.0, 4.0, 4.0, 4.0, 0.0, 0.0, -1.0])
    hid, vox = kernels.raycast_first_hit(ids, vis, origins, dirs, clip)
    assert hid[0] == 1
    assert vox[0, 2] == 4


def test_force_pure_env():
    code = (
        "from stcube import kernels; "
        "assert kernels.BACKEND == 'python', kernels.BACKEND; "
        "print('ok')"
    )
    env = dict(os.environ, STCUBE_FORCE_PURE="1")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True
    )
    assert out.returncode == 0, out.stderr
    assert out.stdout.strip() == "ok"


def test_backend_dispatch():
    backs = kernels.backends()
    assert "python" in backs
    assert (kernels.BACKEND == "compiled") == kernels.COMPILED_AVAILABLE
    if kernels.COMPILED_AVAILABLE:
        assert "compiled" in backs
