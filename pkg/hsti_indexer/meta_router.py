"""
First index layer: the META table and the simulated cluster behind it.

The Z-order code space [0, 4^g) is cut into contiguous ranges, one per region,
balanced by object count. Routing a code is a predecessor search over the
ordered range starts, which stands in for the META lookup of the two-level
HBase scheme (ROOT table and ZooKeeper steps are left out).
"""

from __future__ import annotations

from bisect import bisect_right
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from hsti_indexer.errors import InvalidParameterError, OutOfBoundsError
from hsti_indexer.geo_core import Cube3D, STObject
from hsti_indexer.region_store import RegionServer
from hsti_indexer.zoctree import DEFAULT_DEPTH_L, DEFAULT_XI, ZOctreeConfig
from hsti_indexer.zorder import GridConfig, cells_of, range_rect


@dataclass(frozen=True, slots=True)
class MetaTable:
    """Ordered (zn_start, region_id) entries; entry i owns [zn_start_i, zn_start_{i+1})."""

    starts: tuple[int, ...]
    region_ids: tuple[int, ...]
    code_count: int

    def __post_init__(self) -> None:
        if not self.starts or self.starts[0] != 0:
            raise InvalidParameterError("META table must start at code 0")
        if len(self.starts) != len(self.region_ids):
            raise InvalidParameterError("META table starts and region ids differ in length")
        if any(a >= b for a, b in zip(self.starts, self.starts[1:])):
            raise InvalidParameterError("META table starts must be strictly increasing")
        if self.starts[-1] >= self.code_count:
            raise InvalidParameterError("META table start beyond the code space")

    def ranges(self) -> list[tuple[int, int]]:
        ends = (*self.starts[1:], self.code_count)
        return list(zip(self.starts, ends))


@dataclass(slots=True)
class SimCluster:
    grid: GridConfig
    meta: MetaTable
    regions: list[RegionServer]
    region_by_id: dict[int, RegionServer] = field(init=False)

    def __post_init__(self) -> None:
        self.region_by_id = {region.region_id: region for region in self.regions}

    @property
    def cluster_size(self) -> int:
        return len(self.regions)

    @property
    def total_objects(self) -> int:
        return sum(len(region) for region in self.regions)

    def region_counts(self) -> dict[int, int]:
        return {region.region_id: len(region) for region in self.regions}

    def index_memory_bytes(self) -> int:
        """Summed octree size of every region."""
        return sum(region.octree.memory_bytes() for region in self.regions)


def route(meta: MetaTable, zn: int) -> int:
    """Region id owning code zn: the entry with the largest start not above zn."""
    if not 0 <= zn < meta.code_count:
        raise OutOfBoundsError(f"Morton code {zn} outside [0, {meta.code_count})")
    return meta.region_ids[bisect_right(meta.starts, zn) - 1]


def region_for(cluster: SimCluster, zn: int) -> RegionServer:
    """Region server that holds code zn."""
    return cluster.region_by_id[route(cluster.meta, zn)]


def partition_code_space(histogram: np.ndarray, cluster_size: int) -> list[int]:
    """
    Greedy prefix partition of the per-cell histogram into `cluster_size` contiguous ranges.

    Returns the start code of every range. Cut i falls at the first code whose
    cumulative count reaches i/cluster_size of the total; every range keeps at least
    one code. With no objects the code space is cut into equal widths.
    """
    codes = len(histogram)
    total = int(histogram.sum())
    if total == 0:
        return [i * codes // cluster_size for i in range(cluster_size)]

    cumulative = np.cumsum(histogram)
    starts = [0]
    for i in range(1, cluster_size):
        target = total * i / cluster_size
        cut = int(np.searchsorted(cumulative, target, side="left")) + 1
        # keep room for the remaining ranges and stay past the previous cut
        cut = max(cut, starts[-1] + 1)
        cut = min(cut, codes - (cluster_size - i))
        starts.append(cut)
    return starts


def build_cluster(
    objects: Sequence[STObject],
    cluster_size: int,
    grid: GridConfig,
    octree_cfg: ZOctreeConfig | None = None,
) -> SimCluster:
    """
    Partition the code space, route every object to its region and freeze the regions.

    `octree_cfg` supplies L and xi; its bounds are replaced per region by the bounding
    box of the region's cells times [0, t_max].
    """
    if cluster_size < 1:
        raise InvalidParameterError(f"cluster_size must be at least 1, got {cluster_size}")
    if cluster_size > grid.cell_count:
        raise InvalidParameterError(f"cluster_size {cluster_size} exceeds the {grid.cell_count} grid cells")
    depth_l = octree_cfg.depth_l if octree_cfg else DEFAULT_DEPTH_L
    xi = octree_cfg.xi if octree_cfg else DEFAULT_XI

    zns = cells_of([o.x for o in objects], [o.y for o in objects], grid)
    histogram = np.bincount(zns, minlength=grid.cell_count)
    starts = partition_code_space(histogram, cluster_size)
    meta = MetaTable(starts=tuple(starts), region_ids=tuple(range(cluster_size)), code_count=grid.cell_count)

    regions = []
    for region_id, (lo, hi) in enumerate(meta.ranges()):
        bounds = Cube3D(range_rect(lo, hi, grid), 0.0, grid.world.t_max)
        regions.append(RegionServer(region_id, (lo, hi), grid, ZOctreeConfig(bounds=bounds, depth_l=depth_l, xi=xi)))

    for obj, zn in zip(objects, zns.tolist(), strict=True):
        regions[route(meta, zn)].put(obj, zn=zn)
    for region in regions:
        region.freeze()

    return SimCluster(grid=grid, meta=meta, regions=regions)
