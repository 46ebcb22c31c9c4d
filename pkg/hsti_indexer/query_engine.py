"""
Spatio-temporal kNN over a simulated cluster.

`knn_search` is a best-first search over three kinds of queue entries: grid
spaces, octree leaves (cubes) and points, each keyed by its minimum spatial
distance to the query location. Time only filters. Entries with equal priority
dequeue spaces and cubes before points, and points by ascending oid, so the
emitted sequence is ordered by (distance, oid).

`mode="literal"` runs the plain loop: a dequeued space only
contributes its covering cubes and their neighbours, with no completion sweep of
the space and no MBR pruning. It can miss nearer objects and is kept for study.
"""

from __future__ import annotations

import heapq
import itertools
from collections import defaultdict
from collections.abc import Iterator
from dataclasses import dataclass, field
from typing import Any, Literal

from hsti_indexer.errors import InvalidParameterError, OutOfBoundsError
from hsti_indexer.geo_core import Cube3D, QuerySpec, Rect2D, STObject, euclidean_distance, mindist_point_rect
from hsti_indexer.meta_router import SimCluster, region_for
from hsti_indexer.region_store import RegionServer, full_scan
from hsti_indexer.zoctree import OctNode, adjacent_cubes, cell_cubes, covering_cubes, leaf_points, mbr_check
from hsti_indexer.zorder import adjacent_spaces, cell_of, cell_rect

SearchMode = Literal["best_first", "literal"]

# spaces and cubes win priority ties against points
_RANK_NODE = 0
_RANK_POINT = 1


@dataclass(frozen=True, slots=True)
class SpaceEntry:
    zn: int


@dataclass(frozen=True, slots=True)
class CubeEntry:
    region_id: int
    leaf: OctNode


@dataclass(frozen=True, slots=True)
class PointEntry:
    obj: STObject
    distance: float


PQEntry = SpaceEntry | CubeEntry | PointEntry


class KnnQueue:
    """Min-heap of queue entries keyed by (priority, rank, oid, insertion order)."""

    def __init__(self) -> None:
        self._heap: list[tuple[float, int, int, int, PQEntry]] = []
        self._counter = itertools.count()
        self.pushed_points = 0

    def push_space(self, zn: int, priority: float) -> None:
        heapq.heappush(self._heap, (priority, _RANK_NODE, -1, next(self._counter), SpaceEntry(zn)))

    def push_cube(self, region_id: int, leaf: OctNode, priority: float) -> None:
        heapq.heappush(self._heap, (priority, _RANK_NODE, -1, next(self._counter), CubeEntry(region_id, leaf)))

    def push_point(self, obj: STObject, distance: float) -> None:
        heapq.heappush(self._heap, (distance, _RANK_POINT, obj.oid, next(self._counter), PointEntry(obj, distance)))
        self.pushed_points += 1

    def pop(self) -> tuple[float, PQEntry]:
        """Remove and return the entry with the smallest key."""
        priority, _, _, _, entry = heapq.heappop(self._heap)
        return priority, entry

    def __len__(self) -> int:
        return len(self._heap)

    def __bool__(self) -> bool:
        return bool(self._heap)


@dataclass(slots=True)
class QueryStats:
    visited_rows: int = 0
    visited_leaves: int = 0
    pruned_leaves: int = 0
    spaces_expanded: int = 0
    region_rows: dict[int, int] = field(default_factory=lambda: defaultdict(int))

    @property
    def max_region_rows(self) -> int:
        return max(self.region_rows.values(), default=0)

    def record_scan(self, region_id: int, rows: int) -> None:
        """Count rows read from one region."""
        self.visited_rows += rows
        self.region_rows[region_id] += rows

    def to_dict(self) -> dict[str, Any]:
        return {
            "visited_rows": self.visited_rows,
            "visited_leaves": self.visited_leaves,
            "pruned_leaves": self.pruned_leaves,
            "spaces_expanded": self.spaces_expanded,
            "max_region_rows": self.max_region_rows,
            "region_rows": {str(k): v for k, v in sorted(self.region_rows.items())},
        }


@dataclass(frozen=True, slots=True)
class Neighbor:
    obj: STObject
    distance: float


@dataclass(slots=True)
class ResultList:
    """Neighbours in (distance, oid) order; shorter than k only when the interval holds fewer objects."""

    k: int
    neighbors: list[Neighbor] = field(default_factory=list)
    stats: QueryStats = field(default_factory=QueryStats)

    def __len__(self) -> int:
        return len(self.neighbors)

    def __iter__(self) -> Iterator[Neighbor]:
        return iter(self.neighbors)

    @property
    def distances(self) -> list[float]:
        return [n.distance for n in self.neighbors]

    @property
    def oids(self) -> list[int]:
        return [n.obj.oid for n in self.neighbors]

    def to_records(self) -> list[dict[str, Any]]:
        return [
            {"oid": n.obj.oid, "x": n.obj.x, "y": n.obj.y, "t": n.obj.t, "distance": n.distance}
            for n in self.neighbors
        ]


class _CandidateBound:
    """Tracks the k-th smallest point distance pushed so far, the radius of the MBR probe."""

    def __init__(self, k: int) -> None:
        self.k = k
        self._heap: list[float] = []

    def add(self, distance: float) -> None:
        if len(self._heap) < self.k:
            heapq.heappush(self._heap, -distance)
        elif distance < -self._heap[0]:
            heapq.heapreplace(self._heap, -distance)

    @property
    def radius(self) -> float | None:
        if len(self._heap) < self.k:
            return None
        return -self._heap[0]


@dataclass(slots=True)
class _SearchState:
    q: QuerySpec
    queue: KnnQueue
    stats: QueryStats
    use_mbr: bool = True
    sweep: bool = True
    bound: _CandidateBound = field(init=False)
    visited_spaces: set[int] = field(default_factory=set)
    visited_leaves: set[OctNode] = field(default_factory=set)

    def __post_init__(self) -> None:
        self.bound = _CandidateBound(self.q.k)

    def probe_for(self, leaf: OctNode) -> Cube3D:
        interval = self.q.interval
        radius = self.bound.radius
        if radius is None:
            return Cube3D(leaf.cube.rect, interval.t_start, interval.t_end)
        x, y = self.q.location
        return Cube3D(Rect2D(x - radius, x + radius, y - radius, y + radius), interval.t_start, interval.t_end)

    def scan_leaf(self, region: RegionServer, leaf: OctNode) -> None:
        """Push the leaf's in-interval points, unless the MBR probe rules the leaf out."""
        if self.use_mbr and not mbr_check(leaf, self.probe_for(leaf)):
            self.stats.pruned_leaves += 1
            return
        self.stats.visited_leaves += 1
        self.stats.record_scan(region.region_id, len(leaf.entries))
        location = self.q.location
        for obj in leaf_points(leaf, self.q.interval):
            distance = euclidean_distance(location, obj.location)
            self.queue.push_point(obj, distance)
            self.bound.add(distance)

    def enqueue_cube(self, region: RegionServer, leaf: OctNode) -> None:
        if leaf in self.visited_leaves:
            return
        self.visited_leaves.add(leaf)
        self.queue.push_cube(region.region_id, leaf, mindist_point_rect(self.q.location, leaf.cube.rect))


def search_region(
    region: RegionServer, zn: int, q: QuerySpec, queue: KnnQueue, state: _SearchState | None = None
) -> None:
    """
    Region-local step for the space `zn`.

    Points of the leaves covering the query location (clamped into the space) are
    pushed directly; leaves adjacent to those are pushed as cubes. In best-first mode
    every other leaf touching the space is pushed as a cube as well, so no object of
    the space can be skipped.
    """
    if not region.covers(zn):
        raise InvalidParameterError(f"Space {zn} is not held by region {region.region_id}")
    if state is None:
        state = _SearchState(q=q, queue=queue, stats=QueryStats())
    if len(region) == 0:
        return

    tree = region.octree
    interval = q.interval
    space = cell_rect(zn, region.grid)
    anchor_x, anchor_y = space.clamp(q.x_q, q.y_q)

    covering = covering_cubes(tree, anchor_x, anchor_y, interval)
    for leaf in covering:
        if leaf in state.visited_leaves:
            continue
        state.visited_leaves.add(leaf)
        state.scan_leaf(region, leaf)
    for leaf in covering:
        for neighbor in adjacent_cubes(tree, leaf.cube, interval):
            state.enqueue_cube(region, neighbor)
    if state.sweep:
        for leaf in cell_cubes(tree, space, interval):
            state.enqueue_cube(region, leaf)


def knn_search(
    cluster: SimCluster, q: QuerySpec, use_mbr: bool = True, mode: SearchMode = "best_first"
) -> ResultList:
    """
    The k objects nearest to (x_q, y_q) whose t lies in the query interval.

    Ties on distance are broken by ascending oid. `use_mbr=False` scans every leaf the
    search reaches; the answer is the same, only the leaf counters change.
    """
    if mode not in ("best_first", "literal"):
        raise InvalidParameterError(f"Unknown search mode {mode!r}")
    if not cluster.grid.world.contains(q.x_q, q.y_q):
        raise OutOfBoundsError(f"Query location ({q.x_q}, {q.y_q}) outside the world bounds")

    result = ResultList(k=q.k)
    if cluster.total_objects == 0:
        return result

    literal = mode == "literal"
    queue = KnnQueue()
    state = _SearchState(q=q, queue=queue, stats=result.stats, use_mbr=use_mbr and not literal, sweep=not literal)
    grid = cluster.grid
    location = q.location
    seen_oids: set[int] = set()

    start = cell_of(q.x_q, q.y_q, grid)
    state.visited_spaces.add(start)
    queue.push_space(start, 0.0)

    while queue and len(result.neighbors) < q.k:
        _, entry = queue.pop()
        if isinstance(entry, SpaceEntry):
            result.stats.spaces_expanded += 1
            for zn in sorted(adjacent_spaces(entry.zn, grid)):
                if zn not in state.visited_spaces:
                    state.visited_spaces.add(zn)
                    queue.push_space(zn, mindist_point_rect(location, cell_rect(zn, grid)))
            search_region(region_for(cluster, entry.zn), entry.zn, q, queue, state)
        elif isinstance(entry, CubeEntry):
            state.scan_leaf(cluster.region_by_id[entry.region_id], entry.leaf)
        elif entry.obj.oid not in seen_oids:
            seen_oids.add(entry.obj.oid)
            result.neighbors.append(Neighbor(entry.obj, entry.distance))

    return result


def full_scan_knn(cluster: SimCluster, q: QuerySpec) -> ResultList:
    """Baseline: scan every row of every region, filter by the interval, sort by (distance, oid)."""
    result = ResultList(k=q.k)
    interval = q.interval
    location = q.location
    candidates = []
    for region in cluster.regions:
        matched = full_scan(region, lambda obj: interval.contains(obj.t), result.stats.record_scan)
        candidates.extend((euclidean_distance(location, obj.location), obj.oid, obj) for obj in matched)
    candidates.sort(key=lambda c: (c[0], c[1]))
    result.neighbors = [Neighbor(obj, distance) for distance, _, obj in candidates[: q.k]]
    return result
