"""
Geometric and temporal types shared by every layer of the index.

All coordinates are planar, normalized world units stored as floats. Intervals,
rectangles and cubes are closed: points on a boundary count as inside.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from hsti_indexer.errors import EmptyDatasetError, InvalidParameterError

DEFAULT_X_MAX = 10000.0
DEFAULT_Y_MAX = 10000.0
DEFAULT_T_MAX = 5000.0

Point2D = tuple[float, float]
RawRecord = tuple[int, float, float, float]


@dataclass(frozen=True, slots=True)
class STObject:
    """One spatio-temporal record: an identifier observed at (x, y) at time t."""

    oid: int
    x: float
    y: float
    t: float

    @property
    def location(self) -> Point2D:
        return (self.x, self.y)


@dataclass(frozen=True, slots=True)
class WorldBounds:
    """Extent of the normalized world; the lower corner is always the origin."""

    x_max: float = DEFAULT_X_MAX
    y_max: float = DEFAULT_Y_MAX
    t_max: float = DEFAULT_T_MAX

    def __post_init__(self) -> None:
        for name, value in (("x_max", self.x_max), ("y_max", self.y_max), ("t_max", self.t_max)):
            if not (math.isfinite(value) and value > 0):
                raise InvalidParameterError(f"{name} must be a positive finite number, got {value}")

    def contains(self, x: float, y: float, t: float | None = None) -> bool:
        inside = 0 <= x <= self.x_max and 0 <= y <= self.y_max
        if t is None:
            return inside
        return inside and 0 <= t <= self.t_max


@dataclass(frozen=True, slots=True)
class TimeInterval:
    t_start: float
    t_end: float

    def __post_init__(self) -> None:
        if self.t_start > self.t_end:
            raise InvalidParameterError(f"Invalid interval: t_start ({self.t_start}) > t_end ({self.t_end})")

    def contains(self, t: float) -> bool:
        return self.t_start <= t <= self.t_end

    @property
    def width(self) -> float:
        return self.t_end - self.t_start


@dataclass(frozen=True, slots=True)
class Rect2D:
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    def __post_init__(self) -> None:
        if self.x_hi < self.x_lo:
            raise InvalidParameterError(f"Invalid rect: x_hi ({self.x_hi}) < x_lo ({self.x_lo})")
        if self.y_hi < self.y_lo:
            raise InvalidParameterError(f"Invalid rect: y_hi ({self.y_hi}) < y_lo ({self.y_lo})")

    @property
    def area(self) -> float:
        return (self.x_hi - self.x_lo) * (self.y_hi - self.y_lo)

    def contains(self, x: float, y: float) -> bool:
        return self.x_lo <= x <= self.x_hi and self.y_lo <= y <= self.y_hi

    def contains_rect(self, other: Rect2D) -> bool:
        return (
            self.x_lo <= other.x_lo
            and other.x_hi <= self.x_hi
            and self.y_lo <= other.y_lo
            and other.y_hi <= self.y_hi
        )

    def intersects(self, other: Rect2D) -> bool:
        """Closed-set test: rectangles sharing only an edge or a corner intersect."""
        return (
            self.x_lo <= other.x_hi
            and other.x_lo <= self.x_hi
            and self.y_lo <= other.y_hi
            and other.y_lo <= self.y_hi
        )

    def clamp(self, x: float, y: float) -> Point2D:
        """Nearest point of the rectangle to (x, y)."""
        return (min(max(x, self.x_lo), self.x_hi), min(max(y, self.y_lo), self.y_hi))


@dataclass(frozen=True, slots=True)
class Cube3D:
    rect: Rect2D
    t_lo: float
    t_hi: float

    def __post_init__(self) -> None:
        if self.t_hi < self.t_lo:
            raise InvalidParameterError(f"Invalid cube: t_hi ({self.t_hi}) < t_lo ({self.t_lo})")

    def contains(self, x: float, y: float, t: float) -> bool:
        return self.rect.contains(x, y) and self.t_lo <= t <= self.t_hi

    def overlaps_interval(self, interval: TimeInterval) -> bool:
        return self.t_lo <= interval.t_end and interval.t_start <= self.t_hi

    @property
    def midpoint(self) -> tuple[float, float, float]:
        return (
            (self.rect.x_lo + self.rect.x_hi) / 2,
            (self.rect.y_lo + self.rect.y_hi) / 2,
            (self.t_lo + self.t_hi) / 2,
        )


@dataclass(frozen=True, slots=True)
class QuerySpec:
    """A spatio-temporal kNN query: the k objects nearest to (x_q, y_q) with t inside the interval."""

    x_q: float
    y_q: float
    interval: TimeInterval
    k: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise InvalidParameterError(f"k must be at least 1, got {self.k}")
        if not (math.isfinite(self.x_q) and math.isfinite(self.y_q)):
            raise InvalidParameterError(f"Query location must be finite, got ({self.x_q}, {self.y_q})")

    @property
    def location(self) -> Point2D:
        return (self.x_q, self.y_q)


def euclidean_distance(p1: Sequence[float], p2: Sequence[float]) -> float:
    """Planar distance between two (x, y) points."""
    return math.hypot(p1[0] - p2[0], p1[1] - p2[1])


def mindist_point_rect(p: Sequence[float], r: Rect2D) -> float:
    """Minimum distance from p to any point of the closed rectangle r (0 when p is inside)."""
    dx = max(r.x_lo - p[0], 0.0, p[0] - r.x_hi)
    dy = max(r.y_lo - p[1], 0.0, p[1] - r.y_hi)
    return math.hypot(dx, dy)


def interval_overlaps(a: TimeInterval, b: TimeInterval) -> bool:
    """True when the closed intervals share at least one instant."""
    return a.t_start <= b.t_end and b.t_start <= a.t_end


def _scale_axis(values: list[float], target_max: float) -> list[float]:
    lo, hi = min(values), max(values)
    if hi == lo:
        return [target_max / 2] * len(values)
    span = hi - lo
    # pin the extremes so rounding never leaves the target range
    return [0.0 if v == lo else target_max if v == hi else (v - lo) / span * target_max for v in values]


def normalize_dataset(records: Iterable[RawRecord], world: WorldBounds) -> list[STObject]:
    """
    Min-max scale raw (oid, x, y, t) records onto the world bounds.

    Each axis is mapped affinely from its raw [min, max] onto [0, axis max]; an axis
    whose values are all equal maps to the axis midpoint.
    """
    rows = list(records)
    if not rows:
        raise EmptyDatasetError("empty dataset")
    for oid, x, y, t in rows:
        if not all(math.isfinite(v) for v in (x, y, t)):
            raise InvalidParameterError(f"Non-finite coordinate in record {oid}: ({x}, {y}, {t})")

    xs = _scale_axis([r[1] for r in rows], world.x_max)
    ys = _scale_axis([r[2] for r in rows], world.y_max)
    ts = _scale_axis([r[3] for r in rows], world.t_max)
    return [STObject(oid=r[0], x=x, y=y, t=t) for r, x, y, t in zip(rows, xs, ys, ts, strict=True)]
