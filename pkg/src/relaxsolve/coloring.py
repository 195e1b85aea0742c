"""Greedy graph coloring and the multicolor Gauss-Seidel sweep.

Rows i and j may share a color only when neither a[i,j] nor a[j,i] is
stored, so a color class has no internal couplings and its rows can be
updated in any order (or in parallel) with identical results.  The
coloring therefore works for both forward and backward sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .relax import DIRECTIONS, _check_system, _ordered_sweep
from .sparse import CsrMatrix, DenseVector, Splitting


@dataclass(frozen=True)
class Coloring:
    """Per-row colors plus the rows of each color in ascending order."""

    color: np.ndarray
    num_colors: int
    rows_by_color: list

    def __post_init__(self):
        if self.num_colors < 1 or len(self.rows_by_color) != self.num_colors:
            raise ValueError("rows_by_color must have one entry per color")


def _symmetrized_adjacency(a: CsrMatrix):
    rows = a.row_indices()
    off = a.col_idx != rows
    r = np.concatenate([rows[off], a.col_idx[off]])
    c = np.concatenate([a.col_idx[off], rows[off]])
    order = np.lexsort((c, r))
    r, c = r[order], c[order]
    if r.size:
        first = np.ones(r.size, dtype=bool)
        first[1:] = (r[1:] != r[:-1]) | (c[1:] != c[:-1])
        r, c = r[first], c[first]
    ptr = np.zeros(a.nrows + 1, dtype=np.int64)
    np.cumsum(np.bincount(r, minlength=a.nrows), out=ptr[1:])
    return ptr, c


def greedy_color(a: CsrMatrix) -> Coloring:
    """Sequential greedy coloring of the symmetrized stored pattern.

    Deterministic: rows ascending, smallest available color.  The color
    count is bounded by 1 + the maximum symmetrized degree.
    """
    if a.nrows != a.ncols:
        raise ValueError(f"coloring requires a square matrix, got {a.nrows}x{a.ncols}")
    n = a.nrows
    ptr, idx = _symmetrized_adjacency(a)
    color = np.full(n, -1, dtype=np.int64)
    mark = np.full(max(n, 1), -1, dtype=np.int64)
    num_colors = int(_kernels.greedy_color(ptr, idx, color, mark)) if n else 1
    rows_by_color = [np.flatnonzero(color == c).astype(np.int64) for c in range(num_colors)]
    return Coloring(color=color, num_colors=num_colors, rows_by_color=rows_by_color)


def mt_gs_sweep(
    a: CsrMatrix,
    s: Splitting,
    coloring: Coloring,
    b: DenseVector,
    x: DenseVector,
    direction: str = "forward",
) -> None:
    """One multicolor GS sweep: colors in order, rows of a color together.

    Backward iterates over the colors in reverse.  Row updates reuse the
    sequential-GS kernel, so with n colors in natural ascending order the
    sweep reproduces the sequential sweep bitwise.
    """
    _check_system(a, b, x)
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    if coloring.color.shape[0] != a.nrows:
        raise ValueError(f"coloring covers {coloring.color.shape[0]} rows, matrix has {a.nrows}")
    dirs = ("forward", "backward") if direction == "symmetric" else (direction,)
    for d in dirs:
        groups = coloring.rows_by_color if d == "forward" else coloring.rows_by_color[::-1]
        _ordered_sweep(a, s, b, x, np.concatenate(groups))
