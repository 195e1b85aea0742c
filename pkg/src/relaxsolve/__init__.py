"""Sparse relaxation solvers and Krylov preconditioning.

Classical, multicolor, and two-stage Gauss-Seidel sweeps (with inner
Jacobi-Richardson iterations, damping, compact and non-compact forms, and
a hybrid block variant) usable stand-alone or as preconditioners for
restarted GMRES and CG, plus model-problem generators, a MatrixMarket
reader, and spectral diagnostics.
"""

from .analysis import IterationOperator, dense_solve, residual_gap, spectral_radius, szyld_check
from .coloring import Coloring, greedy_color, mt_gs_sweep
from .krylov import (
    ConvergenceHistory,
    DivergenceError,
    NotSpdError,
    Preconditioner,
    apply_preconditioner,
    cg,
    gmres,
)
from .mmio import MatrixMarketError, read_matrix_market, write_history_csv
from .problems import (
    ProblemSpec,
    build_problem,
    elasticity2d,
    elasticity3d,
    laplace2d,
    laplace3d,
    random_rhs,
)
from .relax import (
    BlockPartition,
    RelaxConfig,
    gs2_apply,
    gs_sequential_sweep,
    hybrid_relax,
    inner_jr_solve,
    jr_sweeps,
)
from .sparse import (
    CsrMatrix,
    DenseVector,
    Splitting,
    cast_matrix,
    cast_vector,
    extract_splitting,
    from_coo,
    from_dense,
    residual,
    spmv,
)

__version__ = "0.1.0"

__all__ = [
    "BlockPartition",
    "Coloring",
    "ConvergenceHistory",
    "CsrMatrix",
    "DenseVector",
    "DivergenceError",
    "IterationOperator",
    "MatrixMarketError",
    "NotSpdError",
    "Preconditioner",
    "ProblemSpec",
    "RelaxConfig",
    "Splitting",
    "apply_preconditioner",
    "build_problem",
    "cast_matrix",
    "cast_vector",
    "cg",
    "dense_solve",
    "elasticity2d",
    "elasticity3d",
    "extract_splitting",
    "from_coo",
    "from_dense",
    "gmres",
    "greedy_color",
    "gs2_apply",
    "gs_sequential_sweep",
    "hybrid_relax",
    "inner_jr_solve",
    "jr_sweeps",
    "laplace2d",
    "laplace3d",
    "mt_gs_sweep",
    "random_rhs",
    "read_matrix_market",
    "residual",
    "residual_gap",
    "spectral_radius",
    "spmv",
    "szyld_check",
    "write_history_csv",
]
