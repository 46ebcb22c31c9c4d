"""
Simulated RegionServer: rows ordered by composite row key plus the region's Z-Octree.

A row key is (zn, floor(t), oid). Its text form joins fixed-width zero-padded
decimal fields with '#', so byte order of the rendered keys equals the numeric
order of the triples, as in an HBase table.
"""

from __future__ import annotations

import math
import sys
from collections.abc import Callable, Iterator
from dataclasses import dataclass

from hsti_indexer.errors import InvalidParameterError, RoutingViolationError
from hsti_indexer.geo_core import STObject
from hsti_indexer.zorder import GridConfig, cell_of
from hsti_indexer.zoctree import ZOctree, ZOctreeConfig

ZN_WIDTH = 10
T_WIDTH = 5
OID_WIDTH = 10

Predicate = Callable[[STObject], bool]
ScanHook = Callable[[int, int], None]


@dataclass(frozen=True, slots=True, order=True)
class RowKey:
    zn: int
    t: int
    oid: int

    def __post_init__(self) -> None:
        for name, value, width in (("zn", self.zn, ZN_WIDTH), ("t", self.t, T_WIDTH), ("oid", self.oid, OID_WIDTH)):
            if not 0 <= value < 10**width:
                raise InvalidParameterError(f"Row key field {name}={value} does not fit {width} decimal digits")

    def render(self) -> str:
        return f"{self.zn:0{ZN_WIDTH}d}#{self.t:0{T_WIDTH}d}#{self.oid:0{OID_WIDTH}d}"

    def __str__(self) -> str:
        return self.render()


def make_row_key(zn: int, obj: STObject) -> RowKey:
    """Row key of obj inside cell zn, with t truncated to its integer bucket."""
    return RowKey(zn=zn, t=math.floor(obj.t), oid=obj.oid)


class RegionServer:
    """One region: a half-open zn range, its rows and its Z-Octree."""

    def __init__(
        self, region_id: int, key_range: tuple[int, int], grid: GridConfig, octree_cfg: ZOctreeConfig
    ) -> None:
        self.region_id = region_id
        self.grid = grid
        self.key_range = key_range
        self.octree = ZOctree(octree_cfg)
        self._rows: dict[RowKey, STObject] = {}
        self._sorted_keys: list[RowKey] = []
        self._dirty = False

    def __len__(self) -> int:
        return len(self._rows)

    def covers(self, zn: int) -> bool:
        return self.key_range[0] <= zn < self.key_range[1]

    def put(self, obj: STObject, zn: int | None = None) -> RowKey:
        """Store obj under its row key and index it; `zn` may be passed when already computed."""
        if zn is None:
            zn = cell_of(obj.x, obj.y, self.grid)
        if not self.covers(zn):
            raise RoutingViolationError(
                f"Object {obj.oid} with zn={zn} routed to region {self.region_id} "
                f"covering [{self.key_range[0]}, {self.key_range[1]})"
            )
        key = make_row_key(zn, obj)
        if key in self._rows:
            raise InvalidParameterError(f"Duplicate row key {key.render()} in region {self.region_id}")
        self.octree.insert(obj)
        self._rows[key] = obj
        self._dirty = True
        return key

    def get(self, key: RowKey) -> STObject | None:
        return self._rows.get(key)

    def keys(self) -> list[RowKey]:
        """Row keys in (zn, t, oid) order."""
        # rows are appended during load and ordered once on first read
        if self._dirty:
            self._sorted_keys = sorted(self._rows)
            self._dirty = False
        return self._sorted_keys

    def scan(self) -> Iterator[tuple[RowKey, STObject]]:
        rows = self._rows
        for key in self.keys():
            yield key, rows[key]

    def freeze(self) -> None:
        """Sort the rows once and stop accepting writes to the octree."""
        self.keys()
        self.octree.freeze()

    def memory_bytes(self) -> int:
        return sys.getsizeof(self._rows) + sys.getsizeof(self._sorted_keys) + self.octree.memory_bytes()


def put(region: RegionServer, obj: STObject) -> RowKey:
    """Store obj in the region, deriving its cell code from its location."""
    return region.put(obj)


def full_scan(region: RegionServer, predicate: Predicate, on_scan: ScanHook | None = None) -> list[STObject]:
    """
    Visit every row in key order and keep those matching the predicate.

    `on_scan(region_id, rows)` receives the visited-row cost of this call, which is
    always the store size; the region itself keeps no counters.
    """
    if on_scan is not None:
        on_scan(region.region_id, len(region))
    return [obj for _, obj in region.scan() if predicate(obj)]
