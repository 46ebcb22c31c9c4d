import random

import pytest

from hsti_indexer.errors import EmptyDatasetError, InvalidParameterError
from hsti_indexer.geo_core import (
    Cube3D,
    QuerySpec,
    Rect2D,
    TimeInterval,
    WorldBounds,
    euclidean_distance,
    interval_overlaps,
    mindist_point_rect,
    normalize_dataset,
)


@pytest.mark.parametrize(
    ("p1", "p2", "expected"),
    [((0, 0), (3, 4), 5.0), ((7, 2), (7, 2), 0.0), ((1, 1), (4, 5), 5.0)],
)
def test_euclidean_distance(p1, p2, expected):
    assert euclidean_distance(p1, p2) == pytest.approx(expected)


@pytest.mark.parametrize(("p", "expected"), [((4, 5), 0.0), ((0, 0), 5.0), ((4, 0), 4.0)])
def test_mindist_point_rect(p, expected):
    assert mindist_point_rect(p, Rect2D(3, 5, 4, 6)) == pytest.approx(expected)


def test_mindist_never_exceeds_distance_to_any_rect_point():
    r = Rect2D(3, 5, 4, 6)
    p = (-2.0, 9.5)
    samples = [(3 + i * 0.2, 4 + j * 0.2) for i in range(11) for j in range(11)]
    assert all(mindist_point_rect(p, r) <= euclidean_distance(p, s) + 1e-12 for s in samples)


@pytest.mark.parametrize(
    ("a", "b", "expected"),
    [((0, 10), (10, 20), True), ((0, 5), (6, 9), False), ((3, 7), (0, 100), True)],
)
def test_interval_overlaps(a, b, expected):
    assert interval_overlaps(TimeInterval(*a), TimeInterval(*b)) is expected
    assert interval_overlaps(TimeInterval(*b), TimeInterval(*a)) is expected


def test_invalid_interval_raises():
    with pytest.raises(InvalidParameterError):
        TimeInterval(5, 1)


def test_rect_intersects_on_shared_edge_and_corner():
    a = Rect2D(0, 1, 0, 1)
    assert a.intersects(Rect2D(1, 2, 0, 1))
    assert a.intersects(Rect2D(1, 2, 1, 2))
    assert not a.intersects(Rect2D(1.5, 2, 0, 1))


def test_rect_clamp_and_contains_rect():
    r = Rect2D(0, 10, 0, 10)
    assert r.clamp(-5, 20) == (0, 10)
    assert r.clamp(3, 4) == (3, 4)
    assert r.contains_rect(Rect2D(2, 3, 2, 3))
    assert not Rect2D(2, 3, 2, 3).contains_rect(r)


def test_cube_contains_and_midpoint():
    cube = Cube3D(Rect2D(0, 10, 0, 20), 0, 100)
    assert cube.contains(10, 20, 100)
    assert not cube.contains(10, 20, 101)
    assert cube.midpoint == (5, 10, 50)


def test_world_bounds_validation():
    with pytest.raises(InvalidParameterError):
        WorldBounds(x_max=0)
    assert WorldBounds().contains(10000, 10000, 5000)
    assert not WorldBounds().contains(10000.1, 0)


def test_query_spec_requires_positive_k():
    with pytest.raises(InvalidParameterError):
        QuerySpec(1, 1, TimeInterval(0, 1), 0)


def test_normalize_linear_scaling():
    objects = normalize_dataset([(1, 0, 0, 0), (2, 50, 1, 1), (3, 100, 2, 2)], WorldBounds())
    assert [o.x for o in objects] == [0, 5000, 10000]
    assert [o.oid for o in objects] == [1, 2, 3]


def test_normalize_degenerate_axis_maps_to_midpoint():
    objects = normalize_dataset([(1, 0, 0, 7), (2, 1, 1, 7)], WorldBounds())
    assert all(o.t == 2500 for o in objects)


def test_normalize_affine_map():
    objects = normalize_dataset([(1, 2, 2, 0), (2, 4, 4, 10), (3, 3, 3, 5)], WorldBounds())
    middle = objects[2]
    assert (middle.x, middle.y, middle.t) == pytest.approx((5000, 5000, 2500))


def test_normalize_empty_dataset():
    with pytest.raises(EmptyDatasetError, match="empty dataset"):
        normalize_dataset([], WorldBounds())


def test_normalize_rejects_non_finite():
    with pytest.raises(InvalidParameterError):
        normalize_dataset([(1, float("nan"), 0, 0)], WorldBounds())


def test_distance_triangle_inequality():
    rng = random.Random(2)
    for _ in range(1000):
        a, b, c = ((rng.uniform(-1e4, 1e4), rng.uniform(-1e4, 1e4)) for _ in range(3))
        assert euclidean_distance(a, c) <= euclidean_distance(a, b) + euclidean_distance(b, c) + 1e-9
        assert euclidean_distance(a, b) == euclidean_distance(b, a)


def test_normalize_is_idempotent():
    rng = random.Random(4)
    world = WorldBounds()
    raw = [(oid, rng.uniform(-50, 900), rng.uniform(3, 7), rng.uniform(1e6, 2e6)) for oid in range(500)]
    once = normalize_dataset(raw, world)
    twice = normalize_dataset([(o.oid, o.x, o.y, o.t) for o in once], world)
    for a, b in zip(once, twice, strict=True):
        assert a.oid == b.oid
        assert abs(a.x - b.x) < 1e-9
        assert abs(a.y - b.y) < 1e-9
        assert abs(a.t - b.t) < 1e-9
