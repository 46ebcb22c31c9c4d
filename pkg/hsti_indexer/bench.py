"""
Benchmark pipeline: synthetic datasets, CSV ingestion, cluster builds and the
hsti-versus-fullscan query sweep.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field
from typing import IO, Any, Literal

import numpy as np
import pandas as pd

from hsti_indexer.config import Settings
from hsti_indexer.errors import ChecksumMismatchError, EmptyDatasetError, InvalidParameterError
from hsti_indexer.geo_core import (
    Cube3D,
    QuerySpec,
    RawRecord,
    Rect2D,
    STObject,
    TimeInterval,
    WorldBounds,
    normalize_dataset,
)
from hsti_indexer.meta_router import SimCluster, build_cluster
from hsti_indexer.query_engine import ResultList, full_scan_knn, knn_search
from hsti_indexer.region_store import OID_WIDTH
from hsti_indexer.zoctree import ZOctreeConfig
from hsti_indexer.zorder import GridConfig
from utils.tools import result_checksum, write_log_entry

Distribution = Literal["uniform", "clustered"]
CSV_COLUMNS = ["oid", "x", "y", "t"]


def gen_data(
    path: str,
    n: int,
    distribution: Distribution = "uniform",
    seed: int = 42,
    clusters: int = 5,
    sigma: float = 250.0,
    world: WorldBounds | None = None,
) -> str:
    """
    Write n synthetic `oid,x,y,t` records inside the world bounds.

    Clustered mode draws cluster centres uniformly, then spreads x and y normally
    around a randomly chosen centre and clips to the bounds; t stays uniform.
    """
    if n < 1:
        raise InvalidParameterError(f"n must be at least 1, got {n}")
    if distribution not in ("uniform", "clustered"):
        raise InvalidParameterError(f"Unknown distribution {distribution!r}")
    if distribution == "clustered" and (clusters < 1 or sigma < 0):
        raise InvalidParameterError(f"Clustered mode needs clusters >= 1 and sigma >= 0, got {clusters}, {sigma}")
    world = world or WorldBounds()
    rng = np.random.default_rng(seed)

    if distribution == "uniform":
        x = rng.uniform(0, world.x_max, n)
        y = rng.uniform(0, world.y_max, n)
    else:
        centers = rng.uniform((0, 0), (world.x_max, world.y_max), size=(clusters, 2))
        owner = rng.integers(0, clusters, n)
        spread = rng.normal(0.0, sigma, size=(n, 2))
        x = np.clip(centers[owner, 0] + spread[:, 0], 0, world.x_max)
        y = np.clip(centers[owner, 1] + spread[:, 1], 0, world.y_max)
    t = rng.uniform(0, world.t_max, n)

    df = pd.DataFrame({"oid": np.arange(n, dtype=np.int64), "x": x, "y": y, "t": t})
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    df.to_csv(path, index=False, columns=CSV_COLUMNS)
    return path


@dataclass
class IngestResult:
    objects: list[STObject]
    rows: int
    rejected: list[tuple[int, str]] = field(default_factory=list)

    @property
    def rejected_count(self) -> int:
        return len(self.rejected)


def _parse_row(fields: list[str]) -> RawRecord:
    if len(fields) != 4:
        raise ValueError(f"expected 4 fields, got {len(fields)}")
    oid = int(fields[0])
    if not 0 <= oid < 10**OID_WIDTH:
        raise ValueError(f"oid {oid} outside [0, 10^{OID_WIDTH})")
    x, y, t = (float(v) for v in fields[1:])
    if not all(math.isfinite(v) for v in (x, y, t)):
        raise ValueError("non-finite coordinate")
    return oid, x, y, t


def _data_lines(f: IO[str]) -> Iterator[tuple[int, list[str]]]:
    for line_no, fields in enumerate(csv.reader(f), start=1):
        if not fields or not "".join(fields).strip():
            continue
        if fields[0].lstrip().startswith("#"):
            continue
        yield line_no, [v.strip() for v in fields]


def ingest(path: str, world: WorldBounds | None = None, detailed_log_path: str | None = None) -> IngestResult:
    """
    Parse an `oid,x,y,t` CSV (optional header, '#' comments, LF or CRLF) and normalize it.

    Malformed rows and repeated oids are rejected with their line number; the run goes on.
    """
    world = world or WorldBounds()
    records: list[RawRecord] = []
    rejected: list[tuple[int, str]] = []
    seen: set[int] = set()
    first = True

    with open(path, encoding="utf-8", newline="") as f:
        for line_no, fields in _data_lines(f):
            if first and fields and fields[0].lower() == "oid":
                first = False
                continue
            first = False
            try:
                record = _parse_row(fields)
            except ValueError as e:
                rejected.append((line_no, str(e)))
                continue
            if record[0] in seen:
                rejected.append((line_no, f"duplicate oid {record[0]}"))
                continue
            seen.add(record[0])
            records.append(record)

    for line_no, reason in rejected:
        print(f"[WARNING] {path}:{line_no} rejected: {reason}")
    write_log_entry(
        detailed_log_path,
        "ingest",
        "REJECTED_ROWS" if rejected else "SUCCESS",
        path=path,
        rows=len(records),
        rejected=len(rejected),
        rejected_lines=[line_no for line_no, _ in rejected],
    )
    if not records:
        raise EmptyDatasetError(f"empty dataset: no valid rows in {path}")
    return IngestResult(objects=normalize_dataset(records, world), rows=len(records), rejected=rejected)


def generate_queries(
    count: int, k: int, interval_width: float, seed: int, world: WorldBounds | None = None
) -> list[QuerySpec]:
    """Seeded query centres uniform in the world, intervals of the given width inside [0, t_max]."""
    world = world or WorldBounds()
    rng = np.random.default_rng(seed)
    xs = rng.uniform(0, world.x_max, count)
    ys = rng.uniform(0, world.y_max, count)
    latest_start = max(world.t_max - interval_width, 0.0)
    starts = rng.uniform(0, latest_start, count)
    return [
        QuerySpec(float(x), float(y), TimeInterval(float(s), float(s) + interval_width), k)
        for x, y, s in zip(xs, ys, starts, strict=True)
    ]


@dataclass
class BuildMetrics:
    cluster_size: int
    n: int
    build_ms: float
    index_memory_bytes: int
    region_counts: dict[int, int]
    max_depth: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "cluster_size": self.cluster_size,
            "n": self.n,
            "build_ms": round(self.build_ms, 3),
            "index_memory_bytes": self.index_memory_bytes,
            "region_counts": {str(k): v for k, v in self.region_counts.items()},
            "max_depth": self.max_depth,
        }


def build(objects: Sequence[STObject], cluster_size: int, settings: Settings) -> tuple[SimCluster, BuildMetrics]:
    """Build a cluster of cluster_size regions and measure build time and index size."""
    grid = GridConfig(g=settings.grid_g)
    world = grid.world
    placeholder = Cube3D(Rect2D(0.0, world.x_max, 0.0, world.y_max), 0.0, world.t_max)
    octree_cfg = ZOctreeConfig(bounds=placeholder, depth_l=settings.depth_l, xi=settings.xi)

    start = time.perf_counter()
    cluster = build_cluster(objects, cluster_size, grid, octree_cfg)
    build_ms = (time.perf_counter() - start) * 1000
    metrics = BuildMetrics(
        cluster_size=cluster_size,
        n=cluster.total_objects,
        build_ms=build_ms,
        index_memory_bytes=cluster.index_memory_bytes(),
        region_counts=cluster.region_counts(),
        max_depth=max(region.octree.depth for region in cluster.regions),
    )
    return cluster, metrics


def checksum_of(result: ResultList) -> str:
    """CRC32 checksum of a result's (oid, distance) sequence."""
    return result_checksum((n.obj.oid, n.distance) for n in result)


def _method_record(method: str, result: ResultList, wall_ms: float) -> dict[str, Any]:
    return {
        "method": method,
        "wall_ms": round(wall_ms, 4),
        "visited_rows": result.stats.visited_rows,
        "visited_leaves": result.stats.visited_leaves,
        "max_region_rows": result.stats.max_region_rows,
        "result_count": len(result),
        "checksum": checksum_of(result),
    }


def _timed(fn: Callable[..., ResultList], *args: Any, **kwargs: Any) -> tuple[ResultList, float]:
    start = time.perf_counter()
    result = fn(*args, **kwargs)
    return result, (time.perf_counter() - start) * 1000


def run_bench(
    objects: Sequence[STObject],
    settings: Settings,
    dataset: str,
    report: IO[str],
    detailed_log_path: str | None = None,
    use_mbr: bool = True,
) -> list[dict[str, Any]]:
    """
    Run every (cluster_size, k) sweep point and write one JSON line per query.

    Each line holds the hsti and fullscan records for the same query. A checksum
    disagreement is logged and raises ChecksumMismatchError after the line is written.
    """
    records: list[dict[str, Any]] = []
    for cluster_size in settings.cluster_size:
        print(f">>> Building cluster with {cluster_size} regions...")
        cluster, metrics = build(objects, cluster_size, settings)
        print(f"   >> Built in {metrics.build_ms:.1f} ms, index memory {metrics.index_memory_bytes} bytes")
        write_log_entry(detailed_log_path, "build", "SUCCESS", dataset=dataset, **metrics.to_dict())

        for k in settings.k:
            print(f">>> Running {settings.queries} queries with k={k}, cluster_size={cluster_size}...")
            queries = generate_queries(settings.queries, k, settings.interval_width, settings.seed, cluster.grid.world)
            for query_id, q in enumerate(queries):
                hsti, hsti_ms = _timed(knn_search, cluster, q, use_mbr=use_mbr)
                scan, scan_ms = _timed(full_scan_knn, cluster, q)
                record = {
                    "dataset": dataset,
                    "n": metrics.n,
                    "cluster_size": cluster_size,
                    "k": k,
                    "interval_width": settings.interval_width,
                    "spatial_region": settings.spatial_region,
                    "query_id": query_id,
                    "query": {"x": q.x_q, "y": q.y_q, "t_start": q.interval.t_start, "t_end": q.interval.t_end},
                    "methods": [_method_record("hsti", hsti, hsti_ms), _method_record("fullscan", scan, scan_ms)],
                }
                report.write(json.dumps(record) + "\n")
                records.append(record)

                hsti_sum, scan_sum = record["methods"][0]["checksum"], record["methods"][1]["checksum"]
                if hsti_sum != scan_sum:
                    write_log_entry(
                        detailed_log_path,
                        "query",
                        "CHECKSUM_MISMATCH",
                        dataset=dataset,
                        cluster_size=cluster_size,
                        k=k,
                        query_id=query_id,
                        hsti=hsti_sum,
                        fullscan=scan_sum,
                    )
                    raise ChecksumMismatchError(
                        f"Query {query_id} (k={k}, cluster_size={cluster_size}) at ({q.x_q}, {q.y_q}) "
                        f"[{q.interval.t_start}, {q.interval.t_end}]: hsti {hsti_sum} != fullscan {scan_sum}"
                    )
        report.flush()

    write_log_entry(detailed_log_path, "bench", "SUCCESS", dataset=dataset, lines=len(records))
    return records
