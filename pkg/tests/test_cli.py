import json

import pytest
from click.testing import CliRunner

from stcube.cli import main


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def built(runner, waves_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "a.stc"
    r = runner.invoke(main, [
        "build", str(waves_dir), "--plane", "0,0,50:0,0,1", "--res", "64",
        "-o", str(out),
    ])
    assert r.exit_code == 0, r.output
    return out


def test_validate_ok(runner, waves_dir):
    r = runner.invoke(main, ["validate", str(waves_dir)])
    assert r.exit_code == 0, r.output
    assert "0 errors" in r.output


def test_validate_rejects_missing_file(runner):
    r = runner.invoke(main, ["validate", "nope.json"])
    assert r.exit_code != 0


def test_build_deterministic(runner, waves_dir, built, tmp_path):
    again = tmp_path / "b.stc"
    r = runner.invoke(main, [
        "build", str(waves_dir), "--plane", "0,0,50:0,0,1", "--res", "64",
        "-o", str(again),
    ])
    assert r.exit_code == 0, r.output
    assert again.read_bytes() == built.read_bytes()


def test_build_bad_plane_spec(runner, waves_dir, tmp_path):
    r = runner.invoke(main, [
        "build", str(waves_dir), "--plane", "0,0:0,0,1", "-o",
        str(tmp_path / "x.stc"),
    ])
    assert r.exit_code != 0
    assert "expected" in r.output


def test_render_deterministic(runner, built, tmp_path):
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    for out in (a, b):
        r = runner.invoke(main, [
            "render", str(built), "--size", "96", "-o", str(out),
        ])
        assert r.exit_code == 0, r.output
    assert a.read_bytes() == b.read_bytes()


def test_render_with_property_needs_manifest(runner, built, tmp_path):
    r = runner.invoke(main, [
        "render", str(built), "--property", "volume", "-o",
        str(tmp_path / "x.png"),
    ])
    assert r.exit_code != 0
    assert "manifest" in r.output


def test_render_with_property(runner, built, waves_dir, tmp_path):
    out = tmp_path / "v.png"
    r = runner.invoke(main, [
        "render", str(built), "--manifest", str(waves_dir),
        "--property", "volume", "--gradient", "coolwarm",
        "--size", "96", "-o", str(out),
    ])
    assert r.exit_code == 0, r.output
    assert out.stat().st_size > 0


def test_render_mesh_view(runner, built, waves_dir, tmp_path):
    out = tmp_path / "m.png"
    r = runner.invoke(main, [
        "render", str(built), "--view", "mesh", "--manifest", str(waves_dir),
        "--time", "5", "--camera", "50,50,240:0,0,-1:0,1,0:80",
        "--size", "96", "-o", str(out),
    ])
    assert r.exit_code == 0, r.output
    assert out.stat().st_size > 0


def test_render_session_file(runner, built, waves_dir, tmp_path):
    session = tmp_path / "s.json"
    session.write_text(json.dumps({
        "time_window": [2, 8], "active_property": "volume",
        "value_filter": [0.0, 1.0],
    }))
    out = tmp_path / "s.png"
    r = runner.invoke(main, [
        "render", str(built), "--manifest", str(waves_dir),
        "--session", str(session), "--size", "96", "-o", str(out),
    ])
    assert r.exit_code == 0, r.output


def test_slice_round_trip(runner, built, tmp_path):
    import numpy as np
    from PIL import Image

    from stcube.volume import load_volume

    out = tmp_path / "t3.png"
    r = runner.invoke(main, [
        "slice", str(built), "--axis", "t", "--index", "3", "-o", str(out),
    ])
    assert r.exit_code == 0, r.output
    v, _ = load_volume(built)
    back = np.asarray(Image.open(out))[::-1]
    np.testing.assert_array_equal(back, v.ids[3].astype(np.uint16))


def test_slice_axes_and_bounds(runner, built, tmp_path):
    for axis, idx in (("x", 10), ("y", 20)):
        r = runner.invoke(main, [
            "slice", str(built), "--axis", axis, "--index", str(idx),
            "-o", str(tmp_path / f"{axis}.png"),
        ])
        assert r.exit_code == 0, r.output
    r = runner.invoke(main, [
        "slice", str(built), "--axis", "t", "--index", "999",
        "-o", str(tmp_path / "oob.png"),
    ])
    assert r.exit_code != 0
    assert "out of range" in r.output


def test_bench_reports_both_backends(runner, waves_dir):
    r = runner.invoke(main, [
        "bench", str(waves_dir), "--res", "32", "--render-size", "64",
    ])
    assert r.exit_code == 0, r.output
    rep = json.loads(r.output)
    assert rep["dataset"]["time_steps"] == 10
    assert rep["build"]["seconds"] >= 0
    assert "python" in rep["kernels"]["raycast_seconds"]
    from stcube import kernels

    if kernels.COMPILED_AVAILABLE:
        assert "compiled" in rep["kernels"]["raycast_seconds"]
        assert rep["kernels"]["raycast_speedup"] > 0


def test_demo_writes_loadable_dataset(runner, tmp_path):
    r = runner.invoke(main, [
        "demo", str(tmp_path / "d"), "--kind", "sphere", "--steps", "6",
    ])
    assert r.exit_code == 0, r.output
    from stcube.dataset import load_dataset

    d = load_dataset(tmp_path / "d" / "manifest.json")
    assert d.time_steps == list(range(6))
