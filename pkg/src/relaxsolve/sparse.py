"""CSR storage, SpMV, residuals, matrix splitting, and precision casting.

Everything downstream (sweeps, Krylov solvers, generators, file I/O) is
built on the two containers defined here: :class:`CsrMatrix` and the
:class:`Splitting` extracted from it.  Vectors are plain 1-D numpy arrays.
Scalar precision is the dtype of the value arrays, restricted to float64
("double") and float32 ("single"); all algorithms are written once over
that parameter and the numba kernels specialize per dtype.

All containers are treated as immutable after construction; operations are
pure functions of their inputs and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels

# Vectors are bare numpy arrays; the alias only names the role.
DenseVector = np.ndarray

PRECISION_DTYPES = {"double": np.float64, "single": np.float32}
_DTYPE_PRECISION = {np.dtype(np.float64): "double", np.dtype(np.float32): "single"}

_INDEX = np.int64


@dataclass(frozen=True)
class CsrMatrix:
    """Compressed-sparse-row matrix with sorted, duplicate-free rows.

    ``row_ptr`` has length ``nrows + 1`` with ``row_ptr[0] == 0``; the
    column indices of row ``i`` live in
    ``col_idx[row_ptr[i]:row_ptr[i+1]]`` and are strictly increasing.
    Values are float64 or float32; the precision tag is the dtype.
    """

    nrows: int
    ncols: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "row_ptr", np.ascontiguousarray(self.row_ptr, dtype=_INDEX))
        object.__setattr__(self, "col_idx", np.ascontiguousarray(self.col_idx, dtype=_INDEX))
        object.__setattr__(self, "values", np.ascontiguousarray(self.values))
        if self.values.dtype not in (np.float64, np.float32):
            raise ValueError(f"unsupported scalar dtype {self.values.dtype}; use float64 or float32")
        if self.nrows < 0 or self.ncols < 0:
            raise ValueError("matrix dimensions must be nonnegative")
        rp = self.row_ptr
        if rp.shape != (self.nrows + 1,):
            raise ValueError(f"row_ptr has length {rp.shape[0]}, expected nrows+1 = {self.nrows + 1}")
        if rp[0] != 0:
            raise ValueError("row_ptr[0] must be 0")
        if np.any(np.diff(rp) < 0):
            raise ValueError("row_ptr must be non-decreasing")
        nnz = self.col_idx.shape[0]
        if rp[-1] != nnz or self.values.shape[0] != nnz:
            raise ValueError(
                f"row_ptr[-1]={rp[-1]} must equal len(col_idx)={nnz} and len(values)={self.values.shape[0]}"
            )
        if nnz and (self.col_idx.min() < 0 or self.col_idx.max() >= self.ncols):
            raise ValueError("column index out of range")
        if nnz > 1:
            increasing = np.diff(self.col_idx) > 0
            # Positions k where entry k+1 starts a new row are exempt.
            new_row = np.zeros(nnz - 1, dtype=bool)
            starts = rp[1:-1]
            starts = starts[(starts > 0) & (starts < nnz)]
            new_row[starts - 1] = True
            if not np.all(increasing | new_row):
                bad = int(np.flatnonzero(~(increasing | new_row))[0])
                raise ValueError(f"column indices not strictly increasing within a row near entry {bad}")

    @property
    def nnz(self) -> int:
        return self.col_idx.shape[0]

    @property
    def dtype(self) -> np.dtype:
        return self.values.dtype

    @property
    def precision(self) -> str:
        return _DTYPE_PRECISION[self.values.dtype]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def row_indices(self) -> np.ndarray:
        """Row index of every stored entry (COO expansion of row_ptr)."""
        return np.repeat(np.arange(self.nrows, dtype=_INDEX), np.diff(self.row_ptr))

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.nrows, self.ncols), dtype=self.values.dtype)
        out[self.row_indices(), self.col_idx] = self.values
        return out


@dataclass(frozen=True)
class Splitting:
    """A = diag(d) + l + u, plus the diagonally prescaled triangles.

    ``dinv_l`` row i is row i of ``l`` divided by ``d[i]`` (likewise
    ``dinv_u``); the prescaled forms feed the inner sweeps so no extra
    diagonal scaling happens per sweep.  ``omega`` and ``gamma`` are the
    outer and inner damping factors the splitting was built for.
    """

    d: np.ndarray
    l: CsrMatrix
    u: CsrMatrix
    dinv_l: CsrMatrix
    dinv_u: CsrMatrix
    omega: float = 1.0
    gamma: float = 1.0

    @property
    def n(self) -> int:
        return self.d.shape[0]

    @property
    def dtype(self) -> np.dtype:
        return self.d.dtype


def from_coo(nrows, ncols, rows, cols, vals, dtype=None) -> CsrMatrix:
    """Build a CsrMatrix from coordinate triplets.

    Duplicate coordinates are summed (left to right in (row, col) sorted
    order, which is deterministic for a deterministic input order); rows
    come out sorted.
    """
    rows = np.asarray(rows, dtype=_INDEX)
    cols = np.asarray(cols, dtype=_INDEX)
    vals = np.asarray(vals, dtype=dtype if dtype is not None else np.float64)
    if not (rows.shape == cols.shape == vals.shape):
        raise ValueError("rows, cols, vals must have identical lengths")
    if rows.size:
        if rows.min() < 0 or rows.max() >= nrows:
            raise ValueError("row index out of range")
        if cols.min() < 0 or cols.max() >= ncols:
            raise ValueError("column index out of range")
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    if rows.size:
        first = np.ones(rows.size, dtype=bool)
        first[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
        starts = np.flatnonzero(first)
        vals = np.add.reduceat(vals, starts)
        rows, cols = rows[starts], cols[starts]
    row_ptr = np.zeros(nrows + 1, dtype=_INDEX)
    np.cumsum(np.bincount(rows, minlength=nrows), out=row_ptr[1:])
    return CsrMatrix(nrows, ncols, row_ptr, cols, vals)


def from_dense(arr, dtype=None) -> CsrMatrix:
    """CSR from a dense 2-D array, keeping exactly the nonzero entries."""
    arr = np.asarray(arr, dtype=dtype if dtype is not None else np.float64)
    if arr.ndim != 2:
        raise ValueError("expected a 2-D array")
    rows, cols = np.nonzero(arr)
    return from_coo(arr.shape[0], arr.shape[1], rows, cols, arr[rows, cols], dtype=arr.dtype)


def _check_vector(a: CsrMatrix, v: np.ndarray, what: str) -> np.ndarray:
    v = np.asarray(v, dtype=a.values.dtype)
    if v.ndim != 1 or v.shape[0] != a.ncols:
        raise ValueError(f"{what} has length {v.shape[0] if v.ndim == 1 else v.shape}, matrix has ncols {a.ncols}")
    return v


def spmv(a: CsrMatrix, x: DenseVector) -> DenseVector:
    """y = A x."""
    x = _check_vector(a, x, "x")
    out = np.empty(a.nrows, dtype=a.values.dtype)
    _kernels.csr_matvec(a.row_ptr, a.col_idx, a.values, x, out)
    return out


def residual(a: CsrMatrix, b: DenseVector, x: DenseVector) -> DenseVector:
    """r = b - A x."""
    b = np.asarray(b, dtype=a.values.dtype)
    if b.ndim != 1 or b.shape[0] != a.nrows:
        raise ValueError(f"b has length {b.shape[0] if b.ndim == 1 else b.shape}, matrix has nrows {a.nrows}")
    return b - spmv(a, x)


def extract_splitting(a: CsrMatrix, omega: float = 1.0, gamma: float = 1.0) -> Splitting:
    """Split A into diagonal, strict lower, and strict upper parts.

    Every diagonal entry must be stored, finite, and nonzero.  The strict
    triangles keep their original (sorted) entry order; the prescaled
    copies divide each row by its diagonal.
    """
    if a.nrows != a.ncols:
        raise ValueError(f"splitting requires a square matrix, got {a.nrows}x{a.ncols}")
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    n = a.nrows
    rows = a.row_indices()
    diag_mask = a.col_idx == rows
    have_diag = np.zeros(n, dtype=bool)
    have_diag[rows[diag_mask]] = True
    if not have_diag.all():
        raise ValueError(f"row {int(np.flatnonzero(~have_diag)[0])} has no stored diagonal entry")
    d = np.zeros(n, dtype=a.values.dtype)
    d[rows[diag_mask]] = a.values[diag_mask]
    bad = ~np.isfinite(d) | (d == 0)
    if bad.any():
        raise ValueError(f"row {int(np.flatnonzero(bad)[0])} has a zero or non-finite diagonal entry")

    def triangle(mask):
        tri_rows = rows[mask]
        row_ptr = np.zeros(n + 1, dtype=_INDEX)
        np.cumsum(np.bincount(tri_rows, minlength=n), out=row_ptr[1:])
        vals = a.values[mask]
        tri = CsrMatrix(n, n, row_ptr, a.col_idx[mask], vals)
        scaled = CsrMatrix(n, n, row_ptr, a.col_idx[mask], vals / d[tri_rows])
        return tri, scaled

    l, dinv_l = triangle(a.col_idx < rows)
    u, dinv_u = triangle(a.col_idx > rows)
    return Splitting(d=d, l=l, u=u, dinv_l=dinv_l, dinv_u=dinv_u, omega=float(omega), gamma=float(gamma))


def _resolve_dtype(precision):
    if isinstance(precision, str):
        try:
            return np.dtype(PRECISION_DTYPES[precision])
        except KeyError:
            raise ValueError(f"unknown precision {precision!r}; expected 'double' or 'single'") from None
    return np.dtype(precision)


def cast_vector(v: DenseVector, precision) -> DenseVector:
    """Round a vector to the target precision.

    Downcasting a value outside float32 range raises, listing the entry.
    """
    v = np.asarray(v)
    dtype = _resolve_dtype(precision)
    out = v.astype(dtype)
    if dtype == np.float32:
        bad = np.isinf(out) & np.isfinite(v)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise OverflowError(f"entry {i} ({v[i]!r}) overflows single precision")
    return out


def cast_matrix(a: CsrMatrix, precision) -> CsrMatrix:
    """Same matrix with values rounded to the target precision."""
    dtype = _resolve_dtype(precision)
    if dtype == a.values.dtype:
        return a
    try:
        vals = cast_vector(a.values, dtype)
    except OverflowError as exc:
        raise OverflowError(f"matrix value {exc}") from None
    return CsrMatrix(a.nrows, a.ncols, a.row_ptr, a.col_idx, vals)
