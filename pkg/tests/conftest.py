import numpy as np
import pytest

from stcube.synthetic import make_wave_dataset, sphere_track_dataset, write_dataset


@pytest.fixture(scope="session")
def waves():
    """Full 100-step dividing-population dataset, seed 0."""
    return make_wave_dataset()


@pytest.fixture(scope="session")
def small_waves():
    return make_wave_dataset(time_steps=12)


@pytest.fixture(scope="session")
def waves_dir(tmp_path_factory):
    """A 10-step dataset written to disk; returns the manifest path."""
    root = tmp_path_factory.mktemp("waves10")
    d = make_wave_dataset(time_steps=10)
    return write_dataset(d, root)


@pytest.fixture(scope="session")
def moving_sphere():
    """Radius-10 sphere crossing z=0: tangent at t=25 and t=75, deepest at 50."""
    steps = 100
    t = np.arange(steps)
    dz = (t - 50.0) / 25.0 * 10.0  # signed distance of center to the plane
    centers = np.column_stack([np.zeros(steps), np.zeros(steps), dz])
    return sphere_track_dataset(centers, radius=10.0)
