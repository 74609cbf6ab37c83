import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from beltrami.grid import make_grid
from beltrami.regions import Box, Disk, box_cell_weights, cell_weights, disk_cell_weights, polygon_cell_weights

SPEC = make_grid(0.1, 1.5, 64)


@settings(max_examples=40, deadline=None)
@given(cx=st.floats(-0.5, 0.5), cy=st.floats(-0.5, 0.5), r=st.floats(0.01, 0.9))
def test_disk_weights_exact_area(cx, cy, r):
    w = disk_cell_weights(SPEC, Disk(complex(cx, cy), r))
    assert w.min() >= 0 and w.max() <= 1
    assert w.sum() * SPEC.cell_area == pytest.approx(np.pi * r * r, rel=1e-10, abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(cx=st.floats(-0.5, 0.5), cy=st.floats(-0.5, 0.5), a=st.floats(0.01, 0.8))
def test_box_weights_exact_area(cx, cy, a):
    w = box_cell_weights(SPEC, Box(complex(cx, cy), a))
    assert w.sum() * SPEC.cell_area == pytest.approx(4 * a * a, rel=1e-10)


def test_polygon_matches_box():
    box = Box(0.23 - 0.11j, 0.61)
    c, a = box.center, box.halfwidth
    square = c + a * np.array([-1 - 1j, 1 - 1j, 1 + 1j, -1 + 1j])
    np.testing.assert_allclose(polygon_cell_weights(SPEC, square), box_cell_weights(SPEC, box), atol=1e-12)


def test_polygon_circle_area():
    d = Disk(0.2, 0.8)
    w = polygon_cell_weights(SPEC, d.boundary(4096))
    assert w.sum() * SPEC.cell_area == pytest.approx(d.area, rel=1e-5)
    np.testing.assert_allclose(w, disk_cell_weights(SPEC, d), atol=1e-3)


def test_cell_weights_dispatch():
    np.testing.assert_array_equal(cell_weights(SPEC, SPEC), np.ones(SPEC.shape))
    assert cell_weights(SPEC, Disk(0, 0.5)).sum() > 0


def test_disk_validation():
    with pytest.raises(ValueError):
        Disk(0, -1)
    assert Disk(0, 1).inside_window(make_grid(0, 1.5, 8))
    assert not Disk(0.6, 1).inside_window(make_grid(0, 1.5, 8))
