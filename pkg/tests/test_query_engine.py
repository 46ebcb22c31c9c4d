import pytest

from hsti_indexer.bench import generate_queries
from hsti_indexer.errors import InvalidParameterError, OutOfBoundsError
from hsti_indexer.geo_core import Cube3D, QuerySpec, Rect2D, STObject, TimeInterval
from hsti_indexer.meta_router import build_cluster
from hsti_indexer.oracle import brute_force_knn
from hsti_indexer.query_engine import KnnQueue, full_scan_knn, knn_search, search_region
from hsti_indexer.region_store import RegionServer
from hsti_indexer.zoctree import ZOctreeConfig
from hsti_indexer.zorder import GridConfig

GRID = GridConfig(g=6)
WORLD_CUBE = Cube3D(Rect2D(0, 10000, 0, 10000), 0, 5000)


def octree_cfg(xi=50):
    return ZOctreeConfig(bounds=WORLD_CUBE, depth_l=16, xi=xi)


def small_region(objects, xi=8):
    region = RegionServer(0, (0, 4), GridConfig(g=1), octree_cfg(xi))
    for obj in objects:
        region.put(obj)
    region.freeze()
    return region


def corner_query_points():
    # one point per octant of the world cube, plus one more in octant 0
    points = []
    for d in range(8):
        x = 7500 if d & 1 else 2500
        y = 7500 if d & 2 else 2500
        t = 3750 if d & 4 else 1250
        points.append(STObject(d, x, y, t))
    points.append(STObject(8, 1000, 1000, 1000))
    return points


def test_search_region_empty_region():
    region = small_region([])
    queue = KnnQueue()
    search_region(region, 0, QuerySpec(10, 10, TimeInterval(0, 5000), 5), queue)
    assert len(queue) == 0


def test_search_region_single_leaf():
    region = small_region([STObject(i, 100 * i, 100, 10 * i) for i in range(1, 4)])
    queue = KnnQueue()
    search_region(region, 0, QuerySpec(0, 0, TimeInterval(0, 5000), 5), queue)
    assert queue.pushed_points == 3
    assert len(queue) == 3


def test_search_region_once_split_corner():
    region = small_region(corner_query_points())
    assert len(region.octree.root.children) == 8
    queue = KnnQueue()
    search_region(region, 0, QuerySpec(0, 0, TimeInterval(0, 5000), 10), queue)
    # covering leaves are octants 0 and 4 holding 3 points; the 6 other leaves go in as cubes
    assert queue.pushed_points == 3
    assert len(queue) == 9


def test_search_region_rejects_foreign_space():
    region = RegionServer(0, (0, 2), GridConfig(g=1), octree_cfg())
    with pytest.raises(InvalidParameterError):
        search_region(region, 3, QuerySpec(0, 0, TimeInterval(0, 1), 1), KnnQueue())


def test_single_in_interval_object():
    objects = [STObject(1, 10, 10, 100), STObject(2, 20, 20, 4000), STObject(3, 9000, 9000, 150)]
    cluster = build_cluster(objects, 2, GRID, octree_cfg())
    result = knn_search(cluster, QuerySpec(5000, 5000, TimeInterval(3900, 4100), 1))
    assert result.oids == [2]


def test_no_object_in_interval(make_objects):
    objects = [obj for obj in make_objects(500) if not 1000 <= obj.t <= 1200]
    cluster = build_cluster(objects, 4, GRID, octree_cfg())
    result = knn_search(cluster, QuerySpec(5000, 5000, TimeInterval(1000, 1200), 10))
    assert len(result) == 0


def test_short_result_returns_every_in_interval_object(make_objects):
    objects = make_objects(1000, seed=4)
    cluster = build_cluster(objects, 4, GRID, octree_cfg())
    q = QuerySpec(100, 9900, TimeInterval(0, 100), 1000)
    expected = brute_force_knn(objects, q)
    result = knn_search(cluster, q)
    assert len(result) == len(expected) == sum(1 for o in objects if o.t <= 100)
    assert result.oids == expected.oids


def test_ties_break_by_oid():
    objects = [
        STObject(7, 5100, 5000, 10),
        STObject(3, 4900, 5000, 10),
        STObject(9, 5000, 5100, 10),
        STObject(1, 5000, 4900, 10),
        STObject(5, 9000, 9000, 10),
    ]
    cluster = build_cluster(objects, 2, GRID, octree_cfg())
    q = QuerySpec(5000, 5000, TimeInterval(0, 20), 3)
    assert knn_search(cluster, q).oids == [1, 3, 7]
    assert full_scan_knn(cluster, q).oids == [1, 3, 7]
    assert brute_force_knn(objects, q).oids == [1, 3, 7]


@pytest.mark.parametrize("distribution", ["uniform", "clustered"])
@pytest.mark.parametrize("k", [1, 10, 100])
def test_matches_brute_force(make_objects, distribution, k):
    objects = make_objects(5000, seed=17, distribution=distribution)
    cluster = build_cluster(objects, 4, GRID, octree_cfg())
    queries = generate_queries(30, k, 200.0, seed=k)
    queries.append(QuerySpec(10000, 10000, TimeInterval(0, 5000), k))
    queries.append(QuerySpec(0, 0, TimeInterval(2500, 2700), k))
    for q in queries:
        expected = brute_force_knn(objects, q)
        result = knn_search(cluster, q)
        assert result.oids == expected.oids
        assert result.distances == pytest.approx(expected.distances, abs=1e-9)
        assert full_scan_knn(cluster, q).oids == expected.oids


def test_results_are_ordered_unique_and_in_interval(make_objects):
    objects = make_objects(3000, seed=2)
    cluster = build_cluster(objects, 6, GRID, octree_cfg(xi=20))
    for q in generate_queries(20, 50, 400.0, seed=5):
        result = knn_search(cluster, q)
        assert result.distances == sorted(result.distances)
        assert len(set(result.oids)) == len(result)
        assert all(q.interval.contains(n.obj.t) for n in result)


def test_mbr_pruning_keeps_results(make_objects):
    objects = make_objects(5000, seed=23)
    cluster = build_cluster(objects, 4, GRID, octree_cfg(xi=20))
    pruned_total = unpruned_total = 0
    for q in generate_queries(30, 10, 200.0, seed=8):
        with_mbr = knn_search(cluster, q, use_mbr=True)
        without_mbr = knn_search(cluster, q, use_mbr=False)
        assert with_mbr.oids == without_mbr.oids
        assert with_mbr.distances == without_mbr.distances
        assert with_mbr.stats.visited_leaves <= without_mbr.stats.visited_leaves
        pruned_total += with_mbr.stats.visited_leaves
        unpruned_total += without_mbr.stats.visited_leaves
    assert pruned_total < unpruned_total


def test_literal_mode_runs_and_stays_sorted(make_objects):
    objects = make_objects(3000, seed=29)
    cluster = build_cluster(objects, 4, GRID, octree_cfg())
    for q in generate_queries(10, 10, 200.0, seed=3):
        result = knn_search(cluster, q, mode="literal")
        assert len(result) <= q.k
        assert result.distances == sorted(result.distances)


def test_unknown_mode():
    cluster = build_cluster([STObject(1, 1, 1, 1)], 1, GRID)
    with pytest.raises(InvalidParameterError):
        knn_search(cluster, QuerySpec(1, 1, TimeInterval(0, 5), 1), mode="depth_first")


def test_query_outside_world():
    cluster = build_cluster([STObject(1, 1, 1, 1)], 1, GRID)
    with pytest.raises(OutOfBoundsError):
        knn_search(cluster, QuerySpec(-5, 1, TimeInterval(0, 5), 1))


def test_empty_cluster():
    cluster = build_cluster([], 4, GRID)
    q = QuerySpec(1, 1, TimeInterval(0, 5), 3)
    assert len(knn_search(cluster, q)) == 0
    assert len(full_scan_knn(cluster, q)) == 0


def test_full_scan_visits_every_row(make_objects):
    objects = make_objects(2000, seed=31)
    cluster = build_cluster(objects, 4, GRID, octree_cfg())
    q = QuerySpec(5000, 5000, TimeInterval(0, 200), 10)
    result = full_scan_knn(cluster, q)
    assert result.stats.visited_rows == len(objects)
    assert sum(result.stats.region_rows.values()) == len(objects)


def test_index_visits_fewer_rows_than_full_scan(make_objects):
    objects = make_objects(20_000, seed=37)
    cluster = build_cluster(objects, 4, GRID, octree_cfg(xi=50))
    hsti_rows = scan_rows = 0
    for q in generate_queries(20, 10, 200.0, seed=1):
        hsti_rows += knn_search(cluster, q).stats.visited_rows
        scan_rows += full_scan_knn(cluster, q).stats.visited_rows
    assert hsti_rows < scan_rows


def test_searches_leave_frozen_regions_untouched(make_objects):
    cluster = build_cluster(make_objects(5000, seed=41), 4, GRID, octree_cfg())
    before = [dict(vars(region)) for region in cluster.regions]
    q = QuerySpec(5000, 5000, TimeInterval(0, 5000), 20)
    first = knn_search(cluster, q)
    full_scan_knn(cluster, q)
    second = knn_search(cluster, q)
    assert [dict(vars(region)) for region in cluster.regions] == before
    assert first.stats.to_dict() == second.stats.to_dict()
    assert first.oids == second.oids
