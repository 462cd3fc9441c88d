import numpy as np
import pytest

from stcube.dataset import division_histogram, load_dataset, mesh_volume, validate
from stcube.synthetic import (
    icosphere,
    make_wave_dataset,
    sphere_track_dataset,
    unit_cube,
    write_dataset,
)


def test_icosphere_volume_converges():
    r = 1.0
    exact = 4.0 / 3.0 * np.pi * r**3
    errs = []
    for sub in (2, 3, 4):
        s = icosphere((0, 0, 0), r, sub)
        assert s.is_closed()
        errs.append(abs(mesh_volume(s) - exact) / exact)
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 0.005


def test_unit_cube():
    c = unit_cube((2.0, -1.0, 3.0), 2.0)
    assert c.is_closed()
    assert mesh_volume(c) == pytest.approx(8.0)
    assert c.vertices.min(axis=0).tolist() == [1.0, -2.0, 2.0]


def test_wave_population(waves):
    assert len(waves.all_ids()) == 299  # 75 roots + 2*(50 + 62) children
    counts = waves.counts()
    assert counts[0] == 75
    # a burst at t divides, so the children appear at t + 1; each divider
    # stops existing and leaves two children (net +1 per division)
    assert counts[10] == 75 and counts[11] == 75 + 50
    assert counts[30] == 125 and counts[31] == 125 + 62
    assert counts[99] == 187


def test_wave_burst_histogram(waves):
    hist = division_histogram(waves.lineage)
    nonzero = [(t, n) for t, n in hist if n]
    assert nonzero == [(10, 50), (30, 62)]


def test_wave_dataset_validates(waves):
    report = validate(waves)
    assert report.accepted, report.errors


def test_wave_properties_cover_every_instance(waves):
    vol = waves.properties.values["volume"]
    gen = waves.properties.values["generation"]
    for t in (0, 50, 99):
        for obj in waves.ids_at(t):
            assert (obj, t) in vol
            assert gen[(obj, t)] in {"gen0", "gen1", "gen2"}
    assert all(v > 0 for v in vol.values())


def test_wave_determinism():
    a = make_wave_dataset(time_steps=8)
    b = make_wave_dataset(time_steps=8)
    assert a.all_ids() == b.all_ids()
    np.testing.assert_array_equal(a.mesh(1, 5).vertices, b.mesh(1, 5).vertices)
    assert a.properties.values == b.properties.values


def test_write_round_trip(tmp_path):
    d = make_wave_dataset(time_steps=4, n_roots=6, bursts={2: 3})
    manifest = write_dataset(d, tmp_path / "out")
    back = load_dataset(manifest)
    assert back.time_steps == d.time_steps
    assert back.all_ids() == d.all_ids()
    obj = sorted(d.ids_at(0))[0]
    np.testing.assert_array_equal(
        back.mesh(obj, 0).vertices, d.mesh(obj, 0).vertices
    )
    assert back.lineage.edges == d.lineage.edges
    assert back.properties.values == d.properties.values


def test_sphere_track():
    centers = np.array([[0.0, 0, -5], [0, 0, 0], [0, 0, 5]])
    d = sphere_track_dataset(centers, radius=2.0)
    assert d.time_steps == [0, 1, 2]
    assert d.all_ids() == [1]
    m = d.mesh(1, 1)
    assert np.allclose(m.vertices.mean(axis=0), [0, 0, 0], atol=1e-9)
    assert np.allclose(np.linalg.norm(m.vertices, axis=1), 2.0, atol=1e-9)
