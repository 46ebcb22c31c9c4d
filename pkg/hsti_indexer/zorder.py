"""
Z-order (Morton) codes for the META grid.

The world is cut into 2^g x 2^g equal cells. A cell (cx, cy) is identified by the
bit-interleaved code with x on the even bits and y on the odd bits, so every
dyadic-aligned block of cells occupies one contiguous code range whose
bottom-left cell has the smallest code and whose top-right cell has the largest.
"""

from __future__ import annotations

import math
from collections.abc import Iterator
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from hsti_indexer.errors import InvalidParameterError, OutOfBoundsError
from hsti_indexer.geo_core import Rect2D, WorldBounds

MAX_GRID_DEPTH = 16
DEFAULT_GRID_DEPTH = 6

MortonCode2D = int
MortonCode3D = int


@dataclass(frozen=True, slots=True)
class GridConfig:
    g: int = DEFAULT_GRID_DEPTH
    world: WorldBounds = field(default_factory=WorldBounds)

    def __post_init__(self) -> None:
        if not 1 <= self.g <= MAX_GRID_DEPTH:
            raise InvalidParameterError(f"Grid depth g must be in [1, {MAX_GRID_DEPTH}], got {self.g}")

    @property
    def side(self) -> int:
        return 1 << self.g

    @property
    def cell_count(self) -> int:
        return 1 << (2 * self.g)

    @property
    def cell_width(self) -> float:
        return self.world.x_max / self.side

    @property
    def cell_height(self) -> float:
        return self.world.y_max / self.side


# Bit spreading with the divide and conquer masks; inputs are at most 21 bits.
def _part1by1(v: int) -> int:
    v &= 0xFFFFFFFF
    v = (v | (v << 16)) & 0x0000FFFF0000FFFF
    v = (v | (v << 8)) & 0x00FF00FF00FF00FF
    v = (v | (v << 4)) & 0x0F0F0F0F0F0F0F0F
    v = (v | (v << 2)) & 0x3333333333333333
    v = (v | (v << 1)) & 0x5555555555555555
    return v


def _compact1by1(v: int) -> int:
    v &= 0x5555555555555555
    v = (v | (v >> 1)) & 0x3333333333333333
    v = (v | (v >> 2)) & 0x0F0F0F0F0F0F0F0F
    v = (v | (v >> 4)) & 0x00FF00FF00FF00FF
    v = (v | (v >> 8)) & 0x0000FFFF0000FFFF
    v = (v | (v >> 16)) & 0x00000000FFFFFFFF
    return v


def _part1by2(v: int) -> int:
    v &= 0x1FFFFF
    v = (v | (v << 32)) & 0x1F00000000FFFF
    v = (v | (v << 16)) & 0x1F0000FF0000FF
    v = (v | (v << 8)) & 0x100F00F00F00F00F
    v = (v | (v << 4)) & 0x10C30C30C30C30C3
    v = (v | (v << 2)) & 0x1249249249249249
    return v


def encode2d(cx: int, cy: int, g: int) -> MortonCode2D:
    """Interleave cell indices (cx, cy) into the grid's Morton code."""
    side = 1 << g
    if not (0 <= cx < side and 0 <= cy < side):
        raise OutOfBoundsError(f"Cell index ({cx}, {cy}) outside a {side}x{side} grid")
    return _part1by1(cx) | (_part1by1(cy) << 1)


def decode2d(z: MortonCode2D, g: int) -> tuple[int, int]:
    """Split a Morton code back into its (cx, cy) cell indices."""
    if not 0 <= z < (1 << (2 * g)):
        raise OutOfBoundsError(f"Morton code {z} outside [0, 4^{g})")
    return _compact1by1(z), _compact1by1(z >> 1)


def encode3d(ix: int, iy: int, it: int, levels: int) -> MortonCode3D:
    """Interleave three indices of `levels` bits each; x on bit 0, y on bit 1, t on bit 2 of every triple."""
    side = 1 << levels
    if not (0 <= ix < side and 0 <= iy < side and 0 <= it < side):
        raise OutOfBoundsError(f"Subspace index ({ix}, {iy}, {it}) outside a {side}^3 grid")
    return _part1by2(ix) | (_part1by2(iy) << 1) | (_part1by2(it) << 2)


def _cell_index(value: float, axis_max: float, side: int) -> int:
    return min(math.floor(value * side / axis_max), side - 1)


def cell_of(x: float, y: float, grid: GridConfig) -> MortonCode2D:
    """Code of the cell containing (x, y); points on the world's max boundary go to the last cell."""
    if not grid.world.contains(x, y):
        raise OutOfBoundsError(f"Point ({x}, {y}) outside the world bounds")
    side = grid.side
    return encode2d(_cell_index(x, grid.world.x_max, side), _cell_index(y, grid.world.y_max, side), grid.g)


def _spread_bits(v: npt.NDArray[np.uint64]) -> npt.NDArray[np.uint64]:
    v = (v | (v << np.uint64(16))) & np.uint64(0x0000FFFF0000FFFF)
    v = (v | (v << np.uint64(8))) & np.uint64(0x00FF00FF00FF00FF)
    v = (v | (v << np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    v = (v | (v << np.uint64(2))) & np.uint64(0x3333333333333333)
    v = (v | (v << np.uint64(1))) & np.uint64(0x5555555555555555)
    return v


def cells_of(xs: npt.ArrayLike, ys: npt.ArrayLike, grid: GridConfig) -> npt.NDArray[np.int64]:
    """Vectorized cell_of over coordinate arrays."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    world = grid.world
    if x.size and (x.min() < 0 or x.max() > world.x_max or y.min() < 0 or y.max() > world.y_max):
        raise OutOfBoundsError("Point outside the world bounds")
    side = grid.side
    cx = np.minimum(np.floor(x * side / world.x_max), side - 1).astype(np.uint64)
    cy = np.minimum(np.floor(y * side / world.y_max), side - 1).astype(np.uint64)
    return (_spread_bits(cx) | (_spread_bits(cy) << np.uint64(1))).astype(np.int64)


def cell_rect(z: MortonCode2D, grid: GridConfig) -> Rect2D:
    """Closed world rectangle of the cell with code z."""
    cx, cy = decode2d(z, grid.g)
    w, h = grid.cell_width, grid.cell_height
    return Rect2D(cx * w, (cx + 1) * w, cy * h, (cy + 1) * h)


def adjacent_spaces(z: MortonCode2D, grid: GridConfig) -> set[MortonCode2D]:
    """Moore neighborhood of a cell, clipped at the world boundary."""
    cx, cy = decode2d(z, grid.g)
    side = grid.side
    neighbors = set()
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            nx, ny = cx + dx, cy + dy
            if (dx or dy) and 0 <= nx < side and 0 <= ny < side:
                neighbors.add(encode2d(nx, ny, grid.g))
    return neighbors


def block_rect(prefix: MortonCode2D, level: int, grid: GridConfig) -> Rect2D:
    """Rectangle of the dyadic block holding the 4^level codes starting at prefix."""
    cx, cy = decode2d(prefix, grid.g)
    span = 1 << level
    w, h = grid.cell_width, grid.cell_height
    return Rect2D(cx * w, (cx + span) * w, cy * h, (cy + span) * h)


def range_blocks(lo: MortonCode2D, hi: MortonCode2D, g: int) -> Iterator[tuple[MortonCode2D, int]]:
    """
    Split the half-open code range [lo, hi) into maximal dyadic-aligned blocks.

    Yields (first code, level) pairs; a block of level j holds 4^j codes and covers
    a 2^j x 2^j square of cells.
    """
    if not 0 <= lo <= hi <= (1 << (2 * g)):
        raise OutOfBoundsError(f"Code range [{lo}, {hi}) outside [0, 4^{g})")
    z = lo
    while z < hi:
        level = 0
        while level < g:
            size = 1 << (2 * (level + 1))
            if z % size or z + size > hi:
                break
            level += 1
        yield z, level
        z += 1 << (2 * level)


def range_rect(lo: MortonCode2D, hi: MortonCode2D, grid: GridConfig) -> Rect2D:
    """Bounding rectangle of the cells whose codes lie in [lo, hi)."""
    if lo >= hi:
        raise OutOfBoundsError(f"Empty code range [{lo}, {hi})")
    rects = [block_rect(prefix, level, grid) for prefix, level in range_blocks(lo, hi, grid.g)]
    return Rect2D(
        min(r.x_lo for r in rects),
        max(r.x_hi for r in rects),
        min(r.y_lo for r in rects),
        max(r.y_hi for r in rects),
    )
