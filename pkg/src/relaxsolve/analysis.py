"""Desk-scale spectral diagnostics and dense reference solves.

A stationary scheme x <- x + P(b - A x), with P the relaxation applied
from a zero initial guess, propagates errors through T = I - P A.  The
scheme converges iff rho(T) < 1, so materializing T densely and reading
off its spectral radius is the ground truth every iteration-count claim
is checked against.  For two-stage schemes with n_j inner sweeps the
comparison of interest is against the plain JR operator T_1:

    rho(T_{n_j+1}) >= rho(T_1)^(n_j+1)

whenever the splitting is regular, which structurally holds for the
Laplace-type problems used here (positive diagonal, nonpositive
off-diagonal entries).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .krylov import Preconditioner
from .problems import random_rhs
from .relax import RelaxConfig, gs2_apply
from .sparse import CsrMatrix, DenseVector, Splitting, spmv

_DENSE_SOLVE_MAX_N = 2000
_DENSE_SPECTRUM_MAX_N = 500
_LINEARITY_RTOL = 1e-11


def dense_solve(a: CsrMatrix, b: DenseVector) -> DenseVector:
    """LU solve with partial pivoting (reference oracle, n <= 2000)."""
    if a.nrows != a.ncols:
        raise ValueError(f"square system required, matrix is {a.nrows}x{a.ncols}")
    if a.nrows > _DENSE_SOLVE_MAX_N:
        raise ValueError(f"dense_solve is a desk-scale oracle (n <= {_DENSE_SOLVE_MAX_N}), got n = {a.nrows}")
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != a.nrows:
        raise ValueError(f"b has length {b.shape[0]}, matrix has {a.nrows} rows")
    ad = a.to_dense().astype(np.float64)
    try:
        x = np.linalg.solve(ad, b)
    except np.linalg.LinAlgError:
        raise np.linalg.LinAlgError("matrix is singular to working precision") from None
    if not np.all(np.isfinite(x)):
        raise np.linalg.LinAlgError("matrix is singular to working precision")
    return x


@dataclass(frozen=True)
class IterationOperator:
    """T = I - P A for a configured relaxation P applied from zero."""

    preconditioner: Preconditioner

    @classmethod
    def from_config(cls, a: CsrMatrix, kind: str, cfg: RelaxConfig) -> "IterationOperator":
        return cls(Preconditioner(a, kind, cfg))

    @property
    def n(self) -> int:
        return self.preconditioner.n

    def apply(self, v: DenseVector) -> DenseVector:
        a = self.preconditioner.a
        return v - self.preconditioner.apply(spmv(a, v))

    def verify_linear(self, seed: int = 20) -> None:
        """Superposition check on three random vector pairs."""
        n = self.n
        for k in range(3):
            u = random_rhs(n, seed + 2 * k)
            w = random_rhs(n, seed + 2 * k + 1)
            lhs = self.apply(u + w)
            rhs = self.apply(u) + self.apply(w)
            scale = np.linalg.norm(lhs) + np.linalg.norm(rhs) + 1.0
            if np.linalg.norm(lhs - rhs) > _LINEARITY_RTOL * scale:
                raise ValueError("iteration operator failed the linearity check")

    def materialize(self) -> np.ndarray:
        """Dense T, column by column (n <= 500)."""
        n = self.n
        if n > _DENSE_SPECTRUM_MAX_N:
            raise ValueError(f"dense materialization capped at n <= {_DENSE_SPECTRUM_MAX_N}, got n = {n}")
        t = np.empty((n, n))
        e = np.zeros(n)
        for j in range(n):
            e[j] = 1.0
            t[:, j] = self.apply(e)
            e[j] = 0.0
        return t


@dataclass(frozen=True)
class SpectralEstimate:
    value: float
    converged: bool
    iterations: int


def spectral_radius(op: IterationOperator, method: str = "dense", iters: int = 2000) -> SpectralEstimate:
    """Spectral radius of the iteration operator.

    "dense" materializes T and takes max |eigenvalue|; "power" runs the
    power method from a fixed seeded start and flags the estimate
    unconverged if the magnitude has not settled to relative 1e-6.
    """
    op.verify_linear()
    if method == "dense":
        t = op.materialize()
        value = float(np.max(np.abs(np.linalg.eigvals(t))))
        return SpectralEstimate(value, True, 0)
    if method != "power":
        raise ValueError(f"method must be 'dense' or 'power', got {method!r}")
    v = random_rhs(op.n, seed=7)
    v /= np.linalg.norm(v)
    est = 0.0
    prev_norm = None
    settled = 0
    for k in range(1, iters + 1):
        w = op.apply(v)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return SpectralEstimate(0.0, True, k)
        # Geometric mean of consecutive step norms: stable also for the
        # +/- eigenvalue pairs of Jacobi-type operators on bipartite grids.
        if prev_norm is not None:
            new_est = float(np.sqrt(norm * prev_norm))
            if abs(new_est - est) <= 1e-6 * max(new_est, 1e-300):
                settled += 1
                if settled >= 3:
                    return SpectralEstimate(new_est, True, k)
            else:
                settled = 0
            est = new_est
        prev_norm = norm
        v = w / norm
    return SpectralEstimate(float(est), False, iters)


@dataclass(frozen=True)
class SzyldRow:
    n_j: int
    rho_two_stage: float
    rho_jr_power: float
    holds: bool


@dataclass(frozen=True)
class SzyldReport:
    rows: tuple
    rho_jr: float
    regular_splitting: bool

    @property
    def all_hold(self) -> bool:
        return all(r.holds for r in self.rows)


def _splitting_is_regular(a: CsrMatrix) -> bool:
    rows = a.row_indices()
    diag = a.col_idx == rows
    return bool(np.all(a.values[diag] > 0) and np.all(a.values[~diag] <= 0))


def szyld_check(a: CsrMatrix, n_j_values, omega: float = 1.0, gamma: float = 1.0, slack: float = 1e-8) -> SzyldReport:
    """Compare rho(T_{n_j+1}) against rho(T_1)^(n_j+1) over a range of n_j.

    T_1 is the JR operator (zero inner sweeps).  The structural
    precondition (positive diagonal, nonpositive off-diagonals) is checked;
    when it fails the report is advisory (``regular_splitting`` False) but
    the comparison is still computed.
    """
    regular = _splitting_is_regular(a)

    def rho(n_j):
        cfg = RelaxConfig(n_t=1, n_k=1, n_j=n_j, direction="forward", omega=omega, gamma=gamma)
        op = IterationOperator.from_config(a, "gs2", cfg)
        return spectral_radius(op, "dense").value

    rho_jr = rho(0)
    rows = []
    for n_j in n_j_values:
        r = rho(int(n_j))
        bound = rho_jr ** (int(n_j) + 1)
        rows.append(SzyldRow(int(n_j), r, bound, r >= bound - slack))
    return SzyldReport(tuple(rows), rho_jr, regular)


@dataclass(frozen=True)
class ResidualGap:
    gap: float
    bound: float


def residual_gap(a: CsrMatrix, s: Splitting, b: DenseVector, x_k: DenseVector, n_j: int, form: str) -> ResidualGap:
    """One two-stage step vs one exact step from the same iterate.

    Returns the residual difference ||r_twostage - r_exact|| after a single
    forward sweep together with its dense upper bound
    ||A (I - S M)|| ||M^-1 r_k||  (plus ||A (I - S M)|| ||x_k|| for the
    compact form), where M = (D + w L) / w and S is the truncated Neumann
    approximation of M^-1 generated by n_j inner sweeps.
    """
    n = a.nrows
    if n > _DENSE_SPECTRUM_MAX_N:
        raise ValueError(f"residual_gap is desk-scale (n <= {_DENSE_SPECTRUM_MAX_N}), got n = {n}")
    if form not in ("non_compact", "compact"):
        raise ValueError(f"form must be 'non_compact' or 'compact', got {form!r}")
    b = np.asarray(b, dtype=np.float64)
    x_k = np.asarray(x_k, dtype=np.float64)
    w = s.omega
    ad = a.to_dense().astype(np.float64)
    low = np.tril(ad, -1)
    d = np.diag(ad).copy()
    m = (np.diag(d) + w * low) / w
    minv = np.linalg.inv(m)
    dinv_l = low / d[:, None]
    gamma = s.gamma
    g0 = np.diag(1.0 / d)
    gmap = g0.copy()
    for _ in range(n_j):
        gmap = (1.0 - gamma) * gmap + gamma * (g0 - w * (dinv_l @ gmap))
    smat = w * gmap  # S approximates M^-1 = w (D + w L)^-1; Neumann sum at gamma = 1

    r_k = b - ad @ x_k
    x_exact = x_k + minv @ r_k
    x_two = x_k.copy()
    cfg = RelaxConfig(n_t=1, n_k=1, n_j=n_j, direction="forward", form=form, omega=w, gamma=s.gamma)
    gs2_apply(a, s, b, x_two, cfg)
    gap = float(np.linalg.norm(ad @ (x_exact - x_two)))
    a_defect = np.linalg.norm(ad @ (np.eye(n) - smat @ m), 2)
    bound = a_defect * np.linalg.norm(minv @ r_k)
    if form == "compact":
        bound += a_defect * np.linalg.norm(x_k)
    return ResidualGap(gap, float(bound))
