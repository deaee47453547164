import numpy as np
import pytest
from hypothesis import given, strategies as st

from charon.errors import InputError, PreconditionError
from charon.geometry import Box, Property, brightening, diameter, split


def test_diameter():
    assert diameter(Box([0, 0], [1, 1])) == pytest.approx(1.41421356, abs=1e-8)
    assert diameter(Box.point([0.3, 2.0])) == 0.0
    assert diameter(Box([-1], [1])) == 2.0


def test_split_fixture():
    left, right = split(Box([0.3, 0.3], [0.7, 0.7]), 0, 0.5)
    assert left == Box([0.3, 0.3], [0.5, 0.7])
    assert right == Box([0.5, 0.3], [0.7, 0.7])


def test_bisection_halves():
    left, right = split(Box([0], [1]), 0, 0.5)
    assert diameter(left) == diameter(right) == 0.5


@pytest.mark.parametrize("c", [0.0, 1.0, 1.5, -0.1])
def test_split_rejects_boundary(c):
    with pytest.raises(PreconditionError):
        split(Box([0, 0], [1, 1]), 0, c)


def test_split_degenerate_dim_rejected():
    with pytest.raises(PreconditionError):
        split(Box([0, 2], [1, 2]), 1, 2.0)


boxes = st.integers(1, 4).flatmap(lambda n: st.tuples(
    st.lists(st.floats(-5, 5), min_size=n, max_size=n),
    st.lists(st.floats(0.01, 3), min_size=n, max_size=n)))


@given(boxes, st.data())
def test_split_properties(spec, data):
    lo, w = np.array(spec[0]), np.array(spec[1])
    box = Box(lo, lo + w)
    d = data.draw(st.integers(0, box.dim - 1))
    frac = data.draw(st.floats(0.05, 0.95))
    c = box.lower[d] + frac * box.widths[d]
    if not box.lower[d] < c < box.upper[d]:
        return
    left, right = split(box, d, c)
    for child in (left, right):
        assert child.widths[d] < box.widths[d]
        others = np.arange(box.dim) != d
        np.testing.assert_array_equal(child.widths[others], box.widths[others])
        assert diameter(child) <= diameter(box)
    pts = box.sample(np.random.default_rng(0), 200)
    assert all(left.contains(p) or right.contains(p) for p in pts)
    assert all(box.contains(p) for p in left.sample(np.random.default_rng(1), 50))


def test_brightening():
    b = brightening([0.95, 0.2], 0.9)
    assert b == Box([0.95, 0.2], [1.0, 0.2])
    x = np.array([0.1, 0.5, 1.0])
    assert brightening(x, 0.0) == Box(x, [1, 1, 1])
    assert brightening([0.1, 0.5, 0.99], 1.0) == Box.point([0.1, 0.5, 0.99])


@given(st.lists(st.floats(0, 1), min_size=1, max_size=6), st.floats(0, 1))
def test_brightening_is_subbox(x, tau):
    b = brightening(x, tau)
    assert b.contains(x)
    assert np.all(b.lower >= 0) and np.all(b.upper <= 1)


def test_brightening_rejects_out_of_range():
    with pytest.raises(InputError):
        brightening([1.2, 0.3], 0.5)


def test_box_validation():
    with pytest.raises(InputError):
        Box([1, 0], [0, 1])
    with pytest.raises(InputError):
        Box([0], [np.inf])


def test_property_round_trip():
    p = Property(Box([0, 0.5], [1, 0.5]), 1)
    assert Property.from_dict(p.to_dict()) == p
