"""Stationary relaxation sweeps.

The schemes here all derive from the splitting A = L + D + U:

* Jacobi-Richardson (JR):  x <- x + w D^-1 (b - A x).
* Sequential Gauss-Seidel: in-place row updates in natural order, forward
  (ascending) or backward (descending), damped with w.
* Two-stage Gauss-Seidel (GS2): the triangular solve of classical GS is
  replaced by a fixed number ``n_j`` of inner JR sweeps on the triangular
  system, starting from the diagonally scaled residual g = D^-1 r and
  iterating g <- (1 - gamma) g + gamma D^-1 (r - w L g).  With gamma = 1
  this is the truncated Neumann expansion of (D + w L)^-1, which
  terminates exactly once n_j >= n - 1 because D^-1 L is nilpotent.
* A hybrid block variant: block-Jacobi over row blocks with the off-block
  couplings frozen once per outer round and ``n_k`` local sweeps inside
  each block.

The non-compact form updates through the residual, x <- x + w * g(r); the
compact form replaces the iterate, x <- w * g(b - (U + (1 - 1/w) D) x).
They coincide only when the inner solve is exact.

All sweep functions mutate their ``x`` argument in place and return None.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .sparse import CsrMatrix, DenseVector, Splitting, extract_splitting, from_coo, spmv

DIRECTIONS = ("forward", "backward", "symmetric")
FORMS = ("non_compact", "compact")


@dataclass(frozen=True)
class RelaxConfig:
    """Sweep counts and flavor of a relaxation scheme.

    ``n_t`` outer applications, ``n_k`` local sweeps per application,
    ``n_j`` inner JR sweeps (0 collapses GS2 to plain JR).  ``n_j`` counts
    recurrence applications after the initial guess g = D^-1 r.
    """

    n_t: int = 1
    n_k: int = 1
    n_j: int = 1
    direction: str = "forward"
    form: str = "non_compact"
    omega: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if self.n_t < 1:
            raise ValueError(f"n_t must be >= 1, got {self.n_t}")
        if self.n_k < 1:
            raise ValueError(f"n_k must be >= 1, got {self.n_k}")
        if self.n_j < 0:
            raise ValueError(f"n_j must be >= 0, got {self.n_j}")
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}, got {self.direction!r}")
        if self.form not in FORMS:
            raise ValueError(f"form must be one of {FORMS}, got {self.form!r}")


@dataclass(frozen=True)
class BlockPartition:
    """Contiguous row blocks: offsets[0] = 0 < ... < offsets[-1] = n."""

    offsets: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "offsets", np.asarray(self.offsets, dtype=np.int64))
        if self.offsets.ndim != 1 or self.offsets.shape[0] < 2:
            raise ValueError("partition needs at least one block")
        if self.offsets[0] != 0 or np.any(np.diff(self.offsets) <= 0):
            raise ValueError("offsets must start at 0 and be strictly increasing")

    @property
    def num_blocks(self) -> int:
        return self.offsets.shape[0] - 1

    @classmethod
    def regular(cls, n: int, num_blocks: int) -> "BlockPartition":
        cuts = np.linspace(0, n, num_blocks + 1).round().astype(np.int64)
        return cls(cuts)


def _check_system(a: CsrMatrix, b: DenseVector, x: DenseVector):
    if a.nrows != a.ncols:
        raise ValueError(f"square system required, matrix is {a.nrows}x{a.ncols}")
    if b.shape[0] != a.nrows:
        raise ValueError(f"b has length {b.shape[0]}, matrix has {a.nrows} rows")
    if x.shape[0] != a.ncols:
        raise ValueError(f"x has length {x.shape[0]}, matrix has {a.ncols} columns")
    if b.dtype != a.dtype or x.dtype != a.dtype:
        raise ValueError(f"dtype mismatch: matrix {a.dtype}, b {b.dtype}, x {x.dtype}")


def _scalar(dtype, value):
    return dtype.type(value)


def _inner_jr(s: Splitting, r: DenseVector, n_j: int, direction: str, omega: float, gamma: float) -> DenseVector:
    tri = s.dinv_l if direction == "forward" else s.dinv_u
    g = r / s.d
    w = _scalar(s.dtype, omega)
    if gamma == 1.0:
        rd = g
        for _ in range(n_j):
            g = rd - w * spmv(tri, g)
    else:
        rd = g
        gm = _scalar(s.dtype, gamma)
        gm1 = _scalar(s.dtype, 1.0 - gamma)
        g = rd.copy()
        for _ in range(n_j):
            g = gm1 * g + gm * (rd - w * spmv(tri, g))
    return g


def inner_jr_solve(s: Splitting, r: DenseVector, n_j: int, direction: str = "forward") -> DenseVector:
    """Approximate the triangular solve (D + wL) g = r with n_j JR sweeps.

    Starts from g = D^-1 r; with gamma = 1 the result equals the truncated
    Neumann sum  sum_{j=0}^{n_j} (-w D^-1 L)^j D^-1 r  (U in place of L for
    the backward direction).
    """
    if n_j < 0:
        raise ValueError(f"n_j must be >= 0, got {n_j}")
    if direction not in ("forward", "backward"):
        raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")
    r = np.asarray(r, dtype=s.dtype)
    if r.shape[0] != s.n:
        raise ValueError(f"r has length {r.shape[0]}, splitting has n {s.n}")
    return _inner_jr(s, r, n_j, direction, s.omega, s.gamma)


def jr_sweeps(a: CsrMatrix, s: Splitting, b: DenseVector, x: DenseVector, sweeps: int) -> None:
    """Apply x <- x + w D^-1 (b - A x) exactly ``sweeps`` times."""
    if sweeps < 1:
        raise ValueError(f"sweeps must be >= 1, got {sweeps}")
    _check_system(a, b, x)
    w = _scalar(a.dtype, s.omega)
    for _ in range(sweeps):
        r = b - spmv(a, x)
        g = r / s.d
        x += w * g


_ORDER_CACHE: dict[tuple[int, str], np.ndarray] = {}


def _natural_order(n: int, direction: str) -> np.ndarray:
    key = (n, direction)
    order = _ORDER_CACHE.get(key)
    if order is None:
        order = np.arange(n, dtype=np.int64)
        if direction == "backward":
            order = order[::-1].copy()
        _ORDER_CACHE[key] = order
    return order


def _ordered_sweep(a: CsrMatrix, s: Splitting, b, x, order: np.ndarray) -> None:
    w = _scalar(a.dtype, s.omega)
    w1 = _scalar(a.dtype, 1.0 - s.omega)
    _kernels.gs_ordered_sweep(a.row_ptr, a.col_idx, a.values, s.d, b, x, order, w, w1)


def gs_sequential_sweep(a: CsrMatrix, s: Splitting, b: DenseVector, x: DenseVector, direction: str = "forward") -> None:
    """One in-place sequential GS sweep in natural row order.

    Forward visits rows ascending, backward descending, symmetric does
    both.  With w != 1 each row update is the damped form
    x_i <- (1 - w) x_i + w (b_i - sum_{j != i} a_ij x_j) / a_ii, which is
    the row-wise realization of x <- w (D + w L)^-1 (b - [U + (1 - 1/w) D] x).
    """
    _check_system(a, b, x)
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    dirs = ("forward", "backward") if direction == "symmetric" else (direction,)
    for d in dirs:
        _ordered_sweep(a, s, b, x, _natural_order(a.nrows, d))


def _two_stage_sweep(a: CsrMatrix, s: Splitting, b, x, n_j: int, direction: str, form: str, omega: float, gamma: float) -> None:
    w = _scalar(a.dtype, omega)
    if form == "non_compact":
        r = b - spmv(a, x)
        g = _inner_jr(s, r, n_j, direction, omega, gamma)
        x += w * g
    else:
        other = s.u if direction == "forward" else s.l
        t = b - spmv(other, x)
        if omega != 1.0:
            t -= _scalar(a.dtype, 1.0 - 1.0 / omega) * (s.d * x)
        g = _inner_jr(s, t, n_j, direction, omega, gamma)
        x[:] = w * g


def gs2_apply(a: CsrMatrix, s: Splitting, b: DenseVector, x: DenseVector, cfg: RelaxConfig) -> None:
    """Two-stage GS: cfg.n_t applications of cfg.n_k sweeps each.

    Symmetric direction runs a forward then a backward half-sweep per
    sweep, recomputing the residual in between (non-compact) or the
    triangular right-hand side (compact).  n_j = 0 reduces to JR.
    """
    _check_system(a, b, x)
    dirs = ("forward", "backward") if cfg.direction == "symmetric" else (cfg.direction,)
    for _ in range(cfg.n_t):
        for _ in range(cfg.n_k):
            for d in dirs:
                _two_stage_sweep(a, s, b, x, cfg.n_j, d, cfg.form, cfg.omega, cfg.gamma)


def _extract_diag_block(a: CsrMatrix, lo: int, hi: int) -> CsrMatrix:
    rows = np.repeat(np.arange(lo, hi, dtype=np.int64), np.diff(a.row_ptr[lo : hi + 1]))
    sl = slice(a.row_ptr[lo], a.row_ptr[hi])
    cols = a.col_idx[sl]
    keep = (cols >= lo) & (cols < hi)
    return from_coo(hi - lo, hi - lo, rows[keep] - lo, cols[keep] - lo, a.values[sl][keep], dtype=a.dtype)


def hybrid_relax(
    a: CsrMatrix,
    part: BlockPartition,
    b: DenseVector,
    x: DenseVector,
    cfg: RelaxConfig,
    local: str = "gs",
) -> None:
    """Block-Jacobi outer rounds with local relaxation inside each block.

    Per outer round (cfg.n_t of them) the off-block couplings are folded
    into frozen local right-hand sides  bhat_p = b_p - E_p x_off  using the
    current x ("neighborhood exchange"); each block then runs cfg.n_k local
    sweeps on its diagonal block with those right-hand sides held fixed.
    ``local`` picks the block solver: "gs" for sequential sweeps, "gs2" for
    the two-stage variant with cfg.n_j inner sweeps.
    """
    _check_system(a, b, x)
    if local not in ("gs", "gs2"):
        raise ValueError(f"local must be 'gs' or 'gs2', got {local!r}")
    offs = part.offsets
    if offs[-1] != a.nrows:
        raise ValueError(f"partition covers {offs[-1]} rows, matrix has {a.nrows}")
    blocks = []
    for p in range(part.num_blocks):
        lo, hi = int(offs[p]), int(offs[p + 1])
        ablk = _extract_diag_block(a, lo, hi)
        blocks.append((lo, hi, ablk, extract_splitting(ablk, cfg.omega, cfg.gamma)))
    local_cfg = replace(cfg, n_t=1)
    for _ in range(cfg.n_t):
        y = spmv(a, x)
        for lo, hi, ablk, sblk in blocks:
            xb = x[lo:hi]
            bhat = b[lo:hi] - y[lo:hi] + spmv(ablk, xb)
            if local == "gs":
                for _ in range(cfg.n_k):
                    gs_sequential_sweep(ablk, sblk, bhat, xb, cfg.direction)
            else:
                gs2_apply(ablk, sblk, bhat, xb, local_cfg)
