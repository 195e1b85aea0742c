"""Right-preconditioned restarted GMRES and preconditioned CG.

Preconditioners are fixed linear operators: z = P(r) runs the configured
relaxation on A z = r from z = 0 with fixed sweep counts, so standard
(non-flexible) GMRES/CG applies.  The reported residuals are residuals of
the original system (GMRES is right-preconditioned), and both solvers
converge on the true relative residual ||b - A x|| / ||b||.

The preconditioner may optionally run in single precision inside a double
precision solve: the residual is downcast, the relaxation runs entirely on
float32 copies of the matrix and splitting, and the result is upcast.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .coloring import Coloring, greedy_color, mt_gs_sweep
from .relax import RelaxConfig, gs2_apply, gs_sequential_sweep, jr_sweeps
from .sparse import CsrMatrix, DenseVector, Splitting, cast_matrix, cast_vector, extract_splitting, spmv

PRECOND_KINDS = ("none", "jr", "gs_seq", "sgs_seq", "mt_gs", "mt_sgs", "gs2", "sgs2")
_SYMMETRIC_KINDS = frozenset({"none", "jr", "sgs_seq", "mt_sgs", "sgs2"})
_SYMMETRIC_DIRECTION_KINDS = frozenset({"sgs_seq", "mt_sgs", "sgs2"})
_MT_KINDS = frozenset({"mt_gs", "mt_sgs"})

BREAKDOWN_RTOL = 1e-14


class DivergenceError(RuntimeError):
    """Raised when a solve produces non-finite values."""


class NotSpdError(RuntimeError):
    """Raised when CG detects non-positive curvature (input not SPD)."""


@dataclass(frozen=True)
class ConvergenceHistory:
    """Relative residual per iteration; entry 0 is the initial guess."""

    rel_res: np.ndarray
    converged: bool

    def __post_init__(self):
        object.__setattr__(self, "rel_res", np.asarray(self.rel_res, dtype=np.float64))

    @property
    def iterations(self) -> int:
        return self.rel_res.shape[0] - 1

    @property
    def final_rel_res(self) -> float:
        return float(self.rel_res[-1])


class Preconditioner:
    """Relaxation applied with zero initial guess as a linear operator.

    Parameters
    ----------
    a : CsrMatrix
        System matrix (double precision).
    kind : str
        One of ``none, jr, gs_seq, sgs_seq, mt_gs, mt_sgs, gs2, sgs2``.
    cfg : RelaxConfig
        Sweep counts and damping.  For jr / gs_seq / sgs_seq / mt kinds the
        total sweep count is ``n_t * n_k``; gs2 / sgs2 pass the full config
        to the two-stage recurrence.  Symmetric kinds force a symmetric
        direction.
    precision : str
        "same" applies the relaxation in the matrix precision;
        "single_inside_double" downcasts the residual, relaxes on owned
        float32 copies, and upcasts the result.
    """

    def __init__(self, a: CsrMatrix, kind: str = "none", cfg: RelaxConfig | None = None,
                 precision: str = "same"):
        if kind not in PRECOND_KINDS:
            raise ValueError(f"unknown preconditioner kind {kind!r}; expected one of {PRECOND_KINDS}")
        if precision not in ("same", "single_inside_double"):
            raise ValueError(f"unknown precision mode {precision!r}")
        cfg = cfg if cfg is not None else RelaxConfig()
        if kind in _SYMMETRIC_DIRECTION_KINDS:
            cfg = replace(cfg, direction="symmetric")
        self.a = a
        self.kind = kind
        self.cfg = cfg
        self.precision = precision
        self.n = a.nrows
        self.splitting: Splitting | None = None
        self.coloring: Coloring | None = None
        self._a_single: CsrMatrix | None = None
        self._s_single: Splitting | None = None
        if kind != "none":
            self.splitting = extract_splitting(a, cfg.omega, cfg.gamma)
            if kind in _MT_KINDS:
                self.coloring = greedy_color(a)
            if precision == "single_inside_double":
                self._a_single = cast_matrix(a, "single")
                self._s_single = extract_splitting(self._a_single, cfg.omega, cfg.gamma)

    @property
    def is_symmetric(self) -> bool:
        """Whether z = P(r) is a symmetric operator on symmetric A."""
        return self.kind in _SYMMETRIC_KINDS or self.cfg.direction == "symmetric"

    def apply(self, r: DenseVector) -> DenseVector:
        r = np.asarray(r, dtype=np.float64)
        if r.shape[0] != self.n:
            raise ValueError(f"r has length {r.shape[0]}, preconditioner is for n {self.n}")
        if self.kind == "none":
            return r.copy()
        if self.precision == "single_inside_double":
            a, s = self._a_single, self._s_single
            rhs = cast_vector(r, "single")
        else:
            a, s = self.a, self.splitting
            rhs = r
        z = np.zeros(self.n, dtype=a.dtype)
        cfg = self.cfg
        sweeps = cfg.n_t * cfg.n_k
        if self.kind == "jr":
            jr_sweeps(a, s, rhs, z, sweeps)
        elif self.kind in ("gs_seq", "sgs_seq"):
            for _ in range(sweeps):
                gs_sequential_sweep(a, s, rhs, z, cfg.direction)
        elif self.kind in _MT_KINDS:
            for _ in range(sweeps):
                mt_gs_sweep(a, s, self.coloring, rhs, z, cfg.direction)
        else:  # gs2 / sgs2
            gs2_apply(a, s, rhs, z, cfg)
        if z.dtype != np.float64:
            z = z.astype(np.float64)
        return z


def apply_preconditioner(m: Preconditioner | None, r: DenseVector) -> DenseVector:
    """z = P(r); the identity when no preconditioner is given."""
    if m is None:
        return np.array(r, dtype=np.float64, copy=True)
    return m.apply(r)


def _as_operator(m):
    if m is None:
        return lambda r: r.copy()
    if hasattr(m, "apply"):
        return m.apply
    if callable(m):
        return m
    raise ValueError(f"preconditioner must be None, have .apply, or be callable, got {type(m)!r}")


def _check_finite(v: np.ndarray, where: str):
    if not np.all(np.isfinite(v)):
        raise DivergenceError(f"non-finite values encountered in {where}")


def gmres(
    a: CsrMatrix,
    b: DenseVector,
    m: Preconditioner | None = None,
    restart: int = 60,
    tol: float = 1e-9,
    maxit: int = 10000,
    x0: DenseVector | None = None,
):
    """Restarted GMRES with MGS Arnoldi, Givens rotations, right preconditioning.

    Returns ``(x, ConvergenceHistory)``.  The history holds the Arnoldi
    residual estimate per inner iteration, with the recomputed true
    residual replacing the estimate at each restart.  ``maxit`` caps the
    total number of inner iterations.  An Arnoldi vector with norm below
    ``1e-14 * ||b||`` is treated as a lucky breakdown: the solve returns
    converged with the final true residual on record.
    """
    if a.nrows != a.ncols:
        raise ValueError(f"square system required, matrix is {a.nrows}x{a.ncols}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if restart < 1:
        raise ValueError(f"restart must be >= 1, got {restart}")
    n = a.nrows
    apply_m = _as_operator(m)
    b = np.asarray(b, dtype=np.float64)
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=np.float64, copy=True)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), ConvergenceHistory(np.zeros(1), True)
    r = b - spmv(a, x)
    hist = [np.linalg.norm(r) / bnorm]
    if hist[0] <= tol:
        return x, ConvergenceHistory(np.array(hist), True)

    total = 0
    converged = False
    breakdown_tol = BREAKDOWN_RTOL * bnorm
    while total < maxit and not converged:
        beta = np.linalg.norm(r)
        v = np.empty((restart + 1, n))
        h = np.zeros((restart + 1, restart))
        cs = np.zeros(restart)
        sn = np.zeros(restart)
        g = np.zeros(restart + 1)
        v[0] = r / beta
        g[0] = beta
        j = -1
        lucky = False
        while j + 1 < restart and total < maxit:
            j += 1
            total += 1
            w = spmv(a, apply_m(v[j]))
            _check_finite(w, f"Arnoldi iteration {total}")
            for i in range(j + 1):
                h[i, j] = v[i] @ w
                w -= h[i, j] * v[i]
            h[j + 1, j] = np.linalg.norm(w)
            lucky = h[j + 1, j] < breakdown_tol
            if not lucky:
                v[j + 1] = w / h[j + 1, j]
            for i in range(j):
                hi = cs[i] * h[i, j] + sn[i] * h[i + 1, j]
                h[i + 1, j] = -sn[i] * h[i, j] + cs[i] * h[i + 1, j]
                h[i, j] = hi
            denom = np.hypot(h[j, j], h[j + 1, j])
            cs[j] = h[j, j] / denom
            sn[j] = h[j + 1, j] / denom
            h[j, j] = denom
            h[j + 1, j] = 0.0
            g[j + 1] = -sn[j] * g[j]
            g[j] = cs[j] * g[j]
            est = abs(g[j + 1]) / bnorm
            if not np.isfinite(est):
                raise DivergenceError(f"residual estimate became non-finite at iteration {total}")
            hist.append(est)
            if est <= tol or lucky:
                break
        y = np.zeros(j + 1)
        for i in range(j, -1, -1):
            y[i] = (g[i] - h[i, i + 1 : j + 1] @ y[i + 1 : j + 1]) / h[i, i]
        x += apply_m(v[: j + 1].T @ y)
        r = b - spmv(a, x)
        true_rel = np.linalg.norm(r) / bnorm
        hist[-1] = true_rel
        if lucky or true_rel <= tol:
            converged = True
    return x, ConvergenceHistory(np.array(hist), converged)


def cg(
    a: CsrMatrix,
    b: DenseVector,
    m: Preconditioner | None = None,
    tol: float = 1e-9,
    maxit: int = 10000,
    x0: DenseVector | None = None,
):
    """Preconditioned conjugate gradients for SPD systems.

    Returns ``(x, ConvergenceHistory)`` with the true relative residual
    recorded every iteration.  A Preconditioner of a non-symmetric kind is
    rejected; non-positive curvature raises :class:`NotSpdError`.
    """
    if a.nrows != a.ncols:
        raise ValueError(f"square system required, matrix is {a.nrows}x{a.ncols}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if isinstance(m, Preconditioner) and not m.is_symmetric:
        raise ValueError(f"CG needs a symmetric preconditioner kind, got {m.kind!r} with direction {m.cfg.direction!r}")
    n = a.nrows
    apply_m = _as_operator(m)
    b = np.asarray(b, dtype=np.float64)
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=np.float64, copy=True)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), ConvergenceHistory(np.zeros(1), True)
    r = b - spmv(a, x)
    hist = [np.linalg.norm(r) / bnorm]
    if hist[0] <= tol:
        return x, ConvergenceHistory(np.array(hist), True)
    z = apply_m(r)
    p = z.copy()
    rz = r @ z
    converged = False
    for _ in range(maxit):
        ap = spmv(a, p)
        pap = p @ ap
        if not np.isfinite(pap):
            raise DivergenceError("non-finite curvature in CG")
        if pap <= 0.0:
            raise NotSpdError(f"non-positive curvature p^T A p = {pap}; matrix is not SPD")
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        true_rel = np.linalg.norm(b - spmv(a, x)) / bnorm
        if not np.isfinite(true_rel):
            raise DivergenceError("non-finite residual in CG")
        hist.append(true_rel)
        if true_rel <= tol:
            converged = True
            break
        z = apply_m(r)
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, ConvergenceHistory(np.array(hist), converged)
