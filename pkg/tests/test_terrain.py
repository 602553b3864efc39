import numpy as np
import pytest

from modgait.terrain import Terrain, flat, slope, step


def test_flat_height_zero_everywhere(rng):
    t = flat()
    xy = rng.normal(scale=5.0, size=(100, 2))
    assert (t.height_at(xy[:, 0], xy[:, 1]) == 0.0).all()


def test_slope_height():
    t = slope(10.0)
    assert t.height_at(1.0, 0.0) == pytest.approx(np.tan(np.radians(10.0)), abs=1e-5)
    assert t.height_at(1.0, 0.0) == pytest.approx(0.17633, abs=1e-5)
    assert t.height_at(-0.3, 2.0) == 0.0


def test_step_height_piecewise():
    t = step(0.10, edge_x_m=0.5)
    assert t.height_at(0.49, 0.0) == 0.0
    assert t.height_at(0.51, 0.0) == 0.10


def test_flat_normal():
    assert np.array_equal(flat().surface_normal(0.3, -2.0), [0.0, 0.0, 1.0])


def test_slope_normal():
    th = np.radians(10.0)
    n = slope(10.0).surface_normal(1.0, 0.0)
    assert np.allclose(n, [-np.sin(th), 0.0, np.cos(th)])
    # Before the slope start the ground is flat.
    assert np.array_equal(slope(10.0).surface_normal(-1.0, 0.0), [0.0, 0.0, 1.0])


def test_normals_are_unit_and_orthogonal_to_surface(rng):
    for t in (flat(), slope(17.0), step(0.2)):
        xy = rng.uniform(-3, 3, size=(1000, 2))
        n = t.surface_normal(xy[:, 0], xy[:, 1])
        assert np.allclose(np.linalg.norm(n, axis=-1), 1.0, atol=1e-12)
        # Tangent along y never changes height: normal y-component is 0.
        assert (np.abs(n[:, 1]) < 1e-12).all()


def test_slope_normal_orthogonal_to_tangent():
    t = slope(25.0)
    p0 = np.array([1.0, 0.0, float(t.height_at(1.0, 0.0))])
    p1 = np.array([1.5, 0.0, float(t.height_at(1.5, 0.0))])
    tangent = (p1 - p0) / np.linalg.norm(p1 - p0)
    assert abs(np.dot(t.surface_normal(1.2, 0.0), tangent)) < 1e-12


def test_validation():
    with pytest.raises(ValueError):
        Terrain(kind="lava")
    with pytest.raises(ValueError):
        Terrain(kind="slope", slope_deg=45.0)
    with pytest.raises(ValueError):
        Terrain(kind="step", step_height_m=-0.1)
    with pytest.raises(ValueError):
        Terrain(kind="flat", friction=0.0)
