"""Deterministic model problems: Laplace and linear elasticity on regular grids.

Laplace uses the standard 5-point (2D) / 7-point (3D) stencil with Dirichlet
truncation, so the matrices are symmetric, weakly diagonally dominant, and
SPD.  Elasticity assembles bilinear (2D) / trilinear (3D) elements for the
isotropic material with unit Young's modulus on the unit square/cube, all
boundary nodes clamped and eliminated; dofs are interleaved per node.

Right-hand sides come from a self-contained 64-bit linear congruential
generator so the same seed produces bitwise identical vectors anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sparse import CsrMatrix, DenseVector, from_coo

PROBLEM_KINDS = ("laplace2d", "laplace3d", "elasticity2d", "elasticity3d")


@dataclass(frozen=True)
class ProblemSpec:
    """Which model problem to build, with grid counts and material."""

    kind: str
    nx: int
    ny: int = 0
    nz: int = 0
    nu: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if self.kind not in PROBLEM_KINDS:
            raise ValueError(f"unknown problem kind {self.kind!r}; expected one of {PROBLEM_KINDS}")
        object.__setattr__(self, "ny", self.ny or self.nx)
        object.__setattr__(self, "nz", self.nz or self.nx)


def build_problem(spec: ProblemSpec) -> CsrMatrix:
    if spec.kind == "laplace2d":
        return laplace2d(spec.nx, spec.ny)
    if spec.kind == "laplace3d":
        return laplace3d(spec.nx, spec.ny, spec.nz)
    if spec.kind == "elasticity2d":
        return elasticity2d(spec.nx, spec.ny, spec.nu)
    return elasticity3d(spec.nx, spec.ny, spec.nz, spec.nu)


def _check_grid(*dims):
    for d in dims:
        if d < 1:
            raise ValueError(f"grid counts must be >= 1, got {dims}")


def laplace2d(nx: int, ny: int | None = None) -> CsrMatrix:
    """5-point Laplacian on an nx-by-ny interior grid (diagonal 4)."""
    ny = nx if ny is None else ny
    _check_grid(nx, ny)
    ix, iy = np.meshgrid(np.arange(nx), np.arange(ny), indexing="xy")
    ix, iy = ix.ravel(), iy.ravel()
    i = iy * nx + ix
    rows = [i]
    cols = [i]
    vals = [np.full(i.size, 4.0)]
    for dx, dy in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        ok = (ix + dx >= 0) & (ix + dx < nx) & (iy + dy >= 0) & (iy + dy < ny)
        rows.append(i[ok])
        cols.append((iy[ok] + dy) * nx + (ix[ok] + dx))
        vals.append(np.full(ok.sum(), -1.0))
    return from_coo(nx * ny, nx * ny, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals))


def laplace3d(nx: int, ny: int | None = None, nz: int | None = None) -> CsrMatrix:
    """7-point Laplacian on an nx-by-ny-by-nz interior grid (diagonal 6)."""
    ny = nx if ny is None else ny
    nz = nx if nz is None else nz
    _check_grid(nx, ny, nz)
    ix, iy, iz = np.meshgrid(np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij")
    ix, iy, iz = ix.ravel(), iy.ravel(), iz.ravel()
    i = (iz * ny + iy) * nx + ix
    rows = [i]
    cols = [i]
    vals = [np.full(i.size, 6.0)]
    for dx, dy, dz in ((-1, 0, 0), (1, 0, 0), (0, -1, 0), (0, 1, 0), (0, 0, -1), (0, 0, 1)):
        ok = (
            (ix + dx >= 0) & (ix + dx < nx)
            & (iy + dy >= 0) & (iy + dy < ny)
            & (iz + dz >= 0) & (iz + dz < nz)
        )
        rows.append(i[ok])
        cols.append(((iz[ok] + dz) * ny + (iy[ok] + dy)) * nx + (ix[ok] + dx))
        vals.append(np.full(ok.sum(), -1.0))
    n = nx * ny * nz
    return from_coo(n, n, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals))


_GAUSS = (-1.0 / np.sqrt(3.0), 1.0 / np.sqrt(3.0))


def _q1_stiffness_2d(hx: float, hy: float, nu: float) -> np.ndarray:
    # Plane-strain isotropic material, E = 1; 2x2 Gauss quadrature.
    c = 1.0 / ((1.0 + nu) * (1.0 - 2.0 * nu))
    dmat = c * np.array(
        [[1.0 - nu, nu, 0.0],
         [nu, 1.0 - nu, 0.0],
         [0.0, 0.0, (1.0 - 2.0 * nu) / 2.0]]
    )
    # Reference element [-1,1]^2, node order (-,-), (+,-), (+,+), (-,+).
    xi_sign = np.array([-1.0, 1.0, 1.0, -1.0])
    eta_sign = np.array([-1.0, -1.0, 1.0, 1.0])
    ke = np.zeros((8, 8))
    detj = hx * hy / 4.0
    for xi in _GAUSS:
        for eta in _GAUSS:
            dn_dxi = xi_sign * (1.0 + eta_sign * eta) / 4.0
            dn_deta = eta_sign * (1.0 + xi_sign * xi) / 4.0
            dn_dx = dn_dxi * 2.0 / hx
            dn_dy = dn_deta * 2.0 / hy
            bmat = np.zeros((3, 8))
            bmat[0, 0::2] = dn_dx
            bmat[1, 1::2] = dn_dy
            bmat[2, 0::2] = dn_dy
            bmat[2, 1::2] = dn_dx
            ke += (bmat.T @ dmat @ bmat) * detj
    return (ke + ke.T) / 2.0


def _q1_stiffness_3d(hx: float, hy: float, hz: float, nu: float) -> np.ndarray:
    lam = nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    mu = 1.0 / (2.0 * (1.0 + nu))
    dmat = np.zeros((6, 6))
    dmat[:3, :3] = lam
    dmat[np.arange(3), np.arange(3)] += 2.0 * mu
    dmat[3:, 3:] = mu * np.eye(3)
    xi_sign = np.array([-1.0, 1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0])
    eta_sign = np.array([-1.0, -1.0, 1.0, 1.0, -1.0, -1.0, 1.0, 1.0])
    zeta_sign = np.array([-1.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 1.0])
    ke = np.zeros((24, 24))
    detj = hx * hy * hz / 8.0
    for xi in _GAUSS:
        for eta in _GAUSS:
            for zeta in _GAUSS:
                dn_dxi = xi_sign * (1.0 + eta_sign * eta) * (1.0 + zeta_sign * zeta) / 8.0
                dn_deta = eta_sign * (1.0 + xi_sign * xi) * (1.0 + zeta_sign * zeta) / 8.0
                dn_dzeta = zeta_sign * (1.0 + xi_sign * xi) * (1.0 + eta_sign * eta) / 8.0
                dn = np.vstack([dn_dxi * 2.0 / hx, dn_deta * 2.0 / hy, dn_dzeta * 2.0 / hz])
                bmat = np.zeros((6, 24))
                bmat[0, 0::3] = dn[0]
                bmat[1, 1::3] = dn[1]
                bmat[2, 2::3] = dn[2]
                bmat[3, 0::3] = dn[1]
                bmat[3, 1::3] = dn[0]
                bmat[4, 1::3] = dn[2]
                bmat[4, 2::3] = dn[1]
                bmat[5, 0::3] = dn[2]
                bmat[5, 2::3] = dn[0]
                ke += (bmat.T @ dmat @ bmat) * detj
    return (ke + ke.T) / 2.0


def _check_nu(nu: float):
    if not 0.0 <= nu < 0.5:
        raise ValueError(f"Poisson ratio must satisfy 0 <= nu < 0.5, got {nu}")


def _assemble(element_dofs: np.ndarray, ke: np.ndarray, ndof: int) -> CsrMatrix:
    # element_dofs: (num_elements, dofs_per_element), -1 for clamped dofs.
    nde = ke.shape[0]
    rows = np.repeat(element_dofs, nde, axis=1).ravel()
    cols = np.tile(element_dofs, (1, nde)).ravel()
    vals = np.tile(ke.ravel(), element_dofs.shape[0])
    keep = (rows >= 0) & (cols >= 0)
    return from_coo(ndof, ndof, rows[keep], cols[keep], vals[keep])


def elasticity2d(nx: int, ny: int | None = None, nu: float = 0.25) -> CsrMatrix:
    """Clamped Q1 elasticity on the unit square; 2*nx*ny free dofs."""
    ny = nx if ny is None else ny
    _check_grid(nx, ny)
    _check_nu(nu)
    hx, hy = 1.0 / (nx + 1), 1.0 / (ny + 1)
    ke = _q1_stiffness_2d(hx, hy, nu)
    # Nodes (ix, iy) with ix in 0..nx+1; only interior nodes carry dofs.
    node_dof = np.full((nx + 2, ny + 2), -1, dtype=np.int64)
    inner = np.arange(nx * ny, dtype=np.int64).reshape(ny, nx)
    node_dof[1 : nx + 1, 1 : ny + 1] = inner.T
    ex, ey = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1), indexing="xy")
    ex, ey = ex.ravel(), ey.ravel()
    corners = [(0, 0), (1, 0), (1, 1), (0, 1)]
    dofs = np.empty((ex.size, 8), dtype=np.int64)
    for k, (cx, cy) in enumerate(corners):
        node = node_dof[ex + cx, ey + cy]
        dofs[:, 2 * k] = np.where(node >= 0, 2 * node, -1)
        dofs[:, 2 * k + 1] = np.where(node >= 0, 2 * node + 1, -1)
    return _assemble(dofs, ke, 2 * nx * ny)


def elasticity3d(nx: int, ny: int | None = None, nz: int | None = None, nu: float = 0.25) -> CsrMatrix:
    """Clamped trilinear elasticity on the unit cube; 3*nx*ny*nz free dofs."""
    ny = nx if ny is None else ny
    nz = nx if nz is None else nz
    _check_grid(nx, ny, nz)
    _check_nu(nu)
    hx, hy, hz = 1.0 / (nx + 1), 1.0 / (ny + 1), 1.0 / (nz + 1)
    ke = _q1_stiffness_3d(hx, hy, hz, nu)
    node_dof = np.full((nx + 2, ny + 2, nz + 2), -1, dtype=np.int64)
    ixs, iys, izs = np.meshgrid(np.arange(1, nx + 1), np.arange(1, ny + 1), np.arange(1, nz + 1), indexing="ij")
    node_dof[ixs, iys, izs] = ((izs - 1) * ny + (iys - 1)) * nx + (ixs - 1)
    ex, ey, ez = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1), np.arange(nz + 1), indexing="ij")
    ex, ey, ez = ex.ravel(), ey.ravel(), ez.ravel()
    corners = [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0), (0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)]
    dofs = np.empty((ex.size, 24), dtype=np.int64)
    for k, (cx, cy, cz) in enumerate(corners):
        node = node_dof[ex + cx, ey + cy, ez + cz]
        for comp in range(3):
            dofs[:, 3 * k + comp] = np.where(node >= 0, 3 * node + comp, -1)
    return _assemble(dofs, ke, 3 * nx * ny * nz)


_LCG_MULT = 6364136223846793005
_LCG_INC = 1442695040888963407
_LCG_MASK = (1 << 64) - 1


def random_rhs(n: int, seed: int = 0) -> DenseVector:
    """Reproducible uniform(-1, 1) vector from a fixed 64-bit LCG.

    state <- (6364136223846793005 * state + 1442695040888963407) mod 2^64,
    starting from the seed; each draw maps the top 53 bits to [0, 1) and
    then to [-1, 1).  Same seed, same vector, bitwise, on any platform.
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    state = seed & _LCG_MASK
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        state = (_LCG_MULT * state + _LCG_INC) & _LCG_MASK
        out[i] = (state >> 11) * 2.0**-53 * 2.0 - 1.0
    return out
