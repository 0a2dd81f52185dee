"""Pixel-center coordinate grids on [-1, 1]^2.

Column ``n`` of ``N`` maps to ``x = 2n/(N-1) - 1`` and row ``m`` of ``M`` to
``y = 2m/(M-1) - 1``, so corner pixels land exactly on +-1. A single row or
column sits at 0. Encoder and decoder must agree on this convention; it is
part of the bitstream contract.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError

__all__ = ["CoordGrid", "axis_coords", "make_grid", "pixel_coords"]


def axis_coords(index, size: int) -> np.ndarray:
    index = np.asarray(index, dtype=np.float64)
    if size == 1:
        return np.zeros_like(index)
    return 2.0 * index / (size - 1) - 1.0


def pixel_coords(rows, cols, height: int, width: int) -> np.ndarray:
    """``(len(rows)*len(cols), 2)`` array of ``(x, y)`` for a row-major sub-grid."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    if rows.size and (rows.min() < 0 or rows.max() >= height):
        raise ValidationError(f"row index out of range for height {height}")
    if cols.size and (cols.min() < 0 or cols.max() >= width):
        raise ValidationError(f"column index out of range for width {width}")
    y = axis_coords(rows, height)
    x = axis_coords(cols, width)
    return np.stack([np.tile(x, rows.size), np.repeat(y, cols.size)], axis=1)


@dataclass(frozen=True, eq=False)
class CoordGrid:
    height: int
    width: int
    rows: np.ndarray
    cols: np.ndarray
    coords: np.ndarray

    def __len__(self) -> int:
        return self.coords.shape[0]


def make_grid(height: int, width: int) -> CoordGrid:
    if height < 1 or width < 1:
        raise ValidationError(f"grid needs positive dimensions, got {height}x{width}")
    rows = np.repeat(np.arange(height), width)
    cols = np.tile(np.arange(width), height)
    coords = pixel_coords(np.arange(height), np.arange(width), height, width)
    for a in (rows, cols, coords):
        a.flags.writeable = False
    return CoordGrid(height, width, rows, cols, coords)
