"""Brute-force spatio-temporal kNN used as the reference answer in tests and benchmarks."""

from __future__ import annotations

from collections.abc import Iterable

from hsti_indexer.geo_core import QuerySpec, STObject, euclidean_distance
from hsti_indexer.query_engine import Neighbor, ResultList


def brute_force_knn(objects: Iterable[STObject], q: QuerySpec) -> ResultList:
    """Exact kNN by filtering every object on the interval and sorting by (distance, oid)."""
    location = q.location
    interval = q.interval
    candidates = sorted(
        ((euclidean_distance(location, obj.location), obj.oid, obj) for obj in objects if interval.contains(obj.t)),
        key=lambda c: (c[0], c[1]),
    )
    result = ResultList(k=q.k)
    result.neighbors = [Neighbor(obj, distance) for distance, _, obj in candidates[: q.k]]
    return result
