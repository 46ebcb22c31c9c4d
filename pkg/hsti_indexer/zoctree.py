"""
Z-Octree: the per-region adaptive octree over (x, y, t).

A leaf splits into 8 children once it holds more than xi entries, unless it already
sits on the deepest level L. Children are ordered by octant digit
bx + 2*by + 4*bt, where a coordinate on a midpoint belongs to the upper half.
Each leaf carries the Morton value v of the smallest level-L virtual subspace it
covers, and a tight 3-D bounding box (MBR) of its entries.
"""

from __future__ import annotations

import sys
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field

from hsti_indexer.errors import FrozenIndexError, InvalidParameterError, OutOfBoundsError
from hsti_indexer.geo_core import Cube3D, Rect2D, STObject, TimeInterval

DEFAULT_DEPTH_L = 16
DEFAULT_XI = 200


@dataclass(frozen=True, slots=True)
class ZOctreeConfig:
    bounds: Cube3D
    depth_l: int = DEFAULT_DEPTH_L
    xi: int = DEFAULT_XI

    def __post_init__(self) -> None:
        if self.depth_l < 2:
            raise InvalidParameterError(f"Deepest level L must be at least 2, got {self.depth_l}")
        if self.xi < 1:
            raise InvalidParameterError(f"Split threshold xi must be at least 1, got {self.xi}")


@dataclass(slots=True)
class MBR3D:
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float
    t_lo: float
    t_hi: float

    @classmethod
    def of_point(cls, obj: STObject) -> MBR3D:
        return cls(obj.x, obj.x, obj.y, obj.y, obj.t, obj.t)

    @classmethod
    def of_entries(cls, entries: Sequence[STObject]) -> MBR3D | None:
        if not entries:
            return None
        return cls(
            min(e.x for e in entries),
            max(e.x for e in entries),
            min(e.y for e in entries),
            max(e.y for e in entries),
            min(e.t for e in entries),
            max(e.t for e in entries),
        )

    def include(self, obj: STObject) -> None:
        if obj.x < self.x_lo:
            self.x_lo = obj.x
        elif obj.x > self.x_hi:
            self.x_hi = obj.x
        if obj.y < self.y_lo:
            self.y_lo = obj.y
        elif obj.y > self.y_hi:
            self.y_hi = obj.y
        if obj.t < self.t_lo:
            self.t_lo = obj.t
        elif obj.t > self.t_hi:
            self.t_hi = obj.t

    def intersects(self, cube: Cube3D) -> bool:
        r = cube.rect
        return (
            self.x_lo <= r.x_hi
            and r.x_lo <= self.x_hi
            and self.y_lo <= r.y_hi
            and r.y_lo <= self.y_hi
            and self.t_lo <= cube.t_hi
            and cube.t_lo <= self.t_hi
        )


@dataclass(slots=True, eq=False)
class OctNode:
    """A Z-Octree node; a leaf while `children` is None, internal afterwards."""

    level: int
    cube: Cube3D
    path: tuple[int, ...]
    v: int
    entries: list[STObject] = field(default_factory=list)
    children: list[OctNode] | None = None
    mbr: MBR3D | None = None

    @property
    def is_leaf(self) -> bool:
        return self.children is None


def leaf_morton(path: Sequence[int], depth_l: int) -> int:
    """Smallest level-L virtual-subspace code inside the node reached by `path` from the root."""
    if len(path) > depth_l - 1:
        raise InvalidParameterError(f"Path of length {len(path)} is deeper than L={depth_l}")
    v = 0
    for i, digit in enumerate(path, start=1):
        if not 0 <= digit <= 7:
            raise InvalidParameterError(f"Octant digit must be in 0..7, got {digit}")
        v += digit * 8 ** (depth_l - 1 - i)
    return v


def _octant(x: float, y: float, t: float, mid: tuple[float, float, float]) -> int:
    return (x >= mid[0]) | ((y >= mid[1]) << 1) | ((t >= mid[2]) << 2)


def octant_of(point: tuple[float, float, float], cube: Cube3D) -> int:
    """Child digit of the cube that holds point."""
    x, y, t = point
    if not cube.contains(x, y, t):
        raise OutOfBoundsError(f"Point {point} outside cube {cube}")
    return _octant(x, y, t, cube.midpoint)


def child_cube(cube: Cube3D, digit: int) -> Cube3D:
    """Sub-cube of cube addressed by octant digit."""
    mx, my, mt = cube.midpoint
    r = cube.rect
    x_lo, x_hi = (mx, r.x_hi) if digit & 1 else (r.x_lo, mx)
    y_lo, y_hi = (my, r.y_hi) if digit & 2 else (r.y_lo, my)
    t_lo, t_hi = (mt, cube.t_hi) if digit & 4 else (cube.t_lo, mt)
    return Cube3D(Rect2D(x_lo, x_hi, y_lo, y_hi), t_lo, t_hi)


class ZOctree:
    """Adaptive octree over one region's spatio-temporal extent."""

    def __init__(self, config: ZOctreeConfig) -> None:
        self.config = config
        self.root = OctNode(level=1, cube=config.bounds, path=(), v=0)
        self._count = 0
        self._frozen = False

    @property
    def count(self) -> int:
        return self._count

    @property
    def frozen(self) -> bool:
        return self._frozen

    def freeze(self) -> None:
        self._frozen = True

    def insert(self, obj: STObject) -> None:
        if self._frozen:
            raise FrozenIndexError("Cannot insert into a frozen Z-Octree")
        if not self.config.bounds.contains(obj.x, obj.y, obj.t):
            raise OutOfBoundsError(f"Object {obj.oid} at ({obj.x}, {obj.y}, {obj.t}) outside the tree bounds")

        node = self.root
        while node.children is not None:
            node = node.children[_octant(obj.x, obj.y, obj.t, node.cube.midpoint)]
        node.entries.append(obj)
        if node.mbr is None:
            node.mbr = MBR3D.of_point(obj)
        else:
            node.mbr.include(obj)
        self._count += 1

        if len(node.entries) > self.config.xi and node.level < self.config.depth_l:
            self._split(node)

    def _split(self, node: OctNode) -> None:
        depth_l, xi = self.config.depth_l, self.config.xi
        pending = [node]
        while pending:
            current = pending.pop()
            weight = 8 ** (depth_l - 1 - current.level)
            children = [
                OctNode(
                    level=current.level + 1,
                    cube=child_cube(current.cube, d),
                    path=(*current.path, d),
                    v=current.v + d * weight,
                )
                for d in range(8)
            ]
            mid = current.cube.midpoint
            for obj in current.entries:
                children[_octant(obj.x, obj.y, obj.t, mid)].entries.append(obj)
            current.entries = []
            current.mbr = None
            current.children = children
            for child in children:
                child.mbr = MBR3D.of_entries(child.entries)
                if len(child.entries) > xi and child.level < depth_l:
                    pending.append(child)

    def nodes(self) -> Iterator[OctNode]:
        """All nodes, depth-first in octant order."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if node.children is not None:
                stack.extend(reversed(node.children))

    def leaves(self) -> Iterator[OctNode]:
        """Leaves only, in the same order as nodes()."""
        return (node for node in self.nodes() if node.children is None)

    @property
    def depth(self) -> int:
        return max(leaf.level for leaf in self.leaves())

    def memory_bytes(self) -> int:
        """Approximate in-memory size of the index structure (nodes, entry lists, boxes)."""
        total = 0
        for node in self.nodes():
            total += sys.getsizeof(node) + sys.getsizeof(node.path)
            if node.children is not None:
                total += sys.getsizeof(node.children)
            else:
                total += sys.getsizeof(node.entries)
                if node.mbr is not None:
                    total += sys.getsizeof(node.mbr)
        return total


def insert(tree: ZOctree, obj: STObject) -> ZOctree:
    """Insert obj into tree and return the tree."""
    tree.insert(obj)
    return tree


def _descend(tree: ZOctree, touches: Callable[[OctNode], bool], interval: TimeInterval) -> Iterator[OctNode]:
    """Leaves in octant order, pruning subtrees `touches` rejects or that miss the interval."""
    stack = [tree.root]
    while stack:
        node = stack.pop()
        if not (touches(node) and node.cube.overlaps_interval(interval)):
            continue
        if node.children is None:
            yield node
        else:
            stack.extend(reversed(node.children))


def covering_cubes(tree: ZOctree, x_q: float, y_q: float, interval: TimeInterval) -> list[OctNode]:
    """Leaves whose footprint contains (x_q, y_q) and whose time extent overlaps the interval."""
    return list(_descend(tree, lambda node: node.cube.rect.contains(x_q, y_q), interval))


def adjacent_cubes(tree: ZOctree, cube: Cube3D, interval: TimeInterval) -> list[OctNode]:
    """
    Leaves spatially touching the cube's footprint and overlapping the interval.

    Leaves whose footprint covers the whole footprint of `cube` form the vertical stack
    over it (they are covering cubes of any point inside) and are left out.
    """
    touching = _descend(tree, lambda node: node.cube.rect.intersects(cube.rect), interval)
    return [leaf for leaf in touching if not leaf.cube.rect.contains_rect(cube.rect)]


def cell_cubes(tree: ZOctree, rect: Rect2D, interval: TimeInterval) -> list[OctNode]:
    """Leaves whose footprint touches `rect` and whose time extent overlaps the interval."""
    return list(_descend(tree, lambda node: node.cube.rect.intersects(rect), interval))


def mbr_check(leaf: OctNode, probe: Cube3D) -> bool:
    """False when the leaf is empty or its MBR misses the probe; only leaves passing are scanned."""
    if not leaf.entries or leaf.mbr is None:
        return False
    return leaf.mbr.intersects(probe)


def leaf_points(leaf: OctNode, interval: TimeInterval) -> list[STObject]:
    """Entries of the leaf whose t lies inside the interval."""
    t_start, t_end = interval.t_start, interval.t_end
    return [obj for obj in leaf.entries if t_start <= obj.t <= t_end]
