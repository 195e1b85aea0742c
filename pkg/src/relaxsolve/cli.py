"""Benchmark command line: solve, sweep-study, and spectrum commands.

Preconditioner specs follow ``kind:n_t,n_k,n_j`` (trailing counts
optional), problems are ``kind:nx[,ny[,nz]]`` or a MatrixMarket file via
--matrix.  Exit codes are a stable contract:

    0 converged    2 maxit    3 diverged    4 config/parse error    5 I/O error

Wall times cover only the solve loop, never setup, and never appear in CSV
output, so identical configs and seeds give byte-identical CSVs.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import analysis, mmio
from .coloring import greedy_color, mt_gs_sweep
from .krylov import (
    PRECOND_KINDS,
    ConvergenceHistory,
    DivergenceError,
    NotSpdError,
    Preconditioner,
    cg,
    gmres,
)
from .problems import PROBLEM_KINDS, ProblemSpec, build_problem, random_rhs
from .relax import RelaxConfig, gs2_apply, gs_sequential_sweep, jr_sweeps
from .sparse import CsrMatrix, extract_splitting, residual

EXIT_CONVERGED = 0
EXIT_MAXIT = 2
EXIT_DIVERGED = 3
EXIT_CONFIG = 4
EXIT_IO = 5

_DIVERGENCE_LIMIT = 1e12


@dataclass
class RunConfig:
    """One fully resolved solver run."""

    problem: ProblemSpec | None
    matrix_path: str | None
    solver: str
    kind: str
    cfg: RelaxConfig
    precision: str = "same"
    restart: int = 60
    tol: float = 1e-9
    maxit: int = 10000
    seed: int = 0
    csv_path: str | None = None

    def precond_label(self) -> str:
        tag = f"{self.kind}({self.cfg.n_t},{self.cfg.n_k},{self.cfg.n_j})"
        if self.precision != "same":
            tag += "/single"
        return tag


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # config/parse errors are exit code 4
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _parse_problem(text: str) -> ProblemSpec:
    kind, _, dims = text.partition(":")
    if kind not in PROBLEM_KINDS:
        raise ValueError(f"unknown problem kind {kind!r}; expected one of {PROBLEM_KINDS}")
    if not dims:
        raise ValueError(f"problem spec {text!r} needs dimensions, e.g. laplace2d:50")
    try:
        counts = [int(tok) for tok in dims.split(",")]
    except ValueError:
        raise ValueError(f"bad problem dimensions in {text!r}") from None
    if not 1 <= len(counts) <= 3:
        raise ValueError(f"problem spec {text!r} takes 1 to 3 dimensions")
    counts += [0] * (3 - len(counts))
    return ProblemSpec(kind=kind, nx=counts[0], ny=counts[1], nz=counts[2])


def _parse_precond(text: str) -> tuple[str, tuple[int, int, int]]:
    kind, _, counts = text.partition(":")
    if kind not in PRECOND_KINDS:
        raise ValueError(f"unknown preconditioner kind {kind!r}; expected one of {PRECOND_KINDS}")
    n_t, n_k, n_j = 1, 1, 1
    if counts:
        try:
            parts = [int(tok) for tok in counts.split(",")]
        except ValueError:
            raise ValueError(f"bad sweep counts in {text!r}") from None
        if not 1 <= len(parts) <= 3:
            raise ValueError(f"preconditioner spec {text!r} takes 1 to 3 counts (n_t,n_k,n_j)")
        n_t = parts[0]
        if len(parts) > 1:
            n_k = parts[1]
        if len(parts) > 2:
            n_j = parts[2]
    return kind, (n_t, n_k, n_j)


def _build_matrix(run: RunConfig) -> CsrMatrix:
    if run.matrix_path is not None:
        return mmio.read_matrix_market(run.matrix_path)
    return build_problem(run.problem)


def _stationary_apply(a, s, coloring, b, x, kind, cfg) -> None:
    if kind == "jr":
        jr_sweeps(a, s, b, x, cfg.n_t * cfg.n_k)
    elif kind in ("gs_seq", "sgs_seq"):
        direction = "symmetric" if kind == "sgs_seq" else cfg.direction
        for _ in range(cfg.n_t * cfg.n_k):
            gs_sequential_sweep(a, s, b, x, direction)
    elif kind in ("mt_gs", "mt_sgs"):
        direction = "symmetric" if kind == "mt_sgs" else cfg.direction
        for _ in range(cfg.n_t * cfg.n_k):
            mt_gs_sweep(a, s, coloring, b, x, direction)
    elif kind in ("gs2", "sgs2"):
        use = replace(cfg, direction="symmetric") if kind == "sgs2" else cfg
        gs2_apply(a, s, b, x, use)
    else:
        raise ValueError(f"kind {kind!r} cannot run as a stationary solver")


def _run_stationary(a, b, run: RunConfig) -> ConvergenceHistory:
    s = extract_splitting(a, run.cfg.omega, run.cfg.gamma)
    coloring = greedy_color(a) if run.kind in ("mt_gs", "mt_sgs") else None
    x = np.zeros(a.nrows)
    bnorm = np.linalg.norm(b)
    hist = [np.linalg.norm(residual(a, b, x)) / bnorm]
    converged = hist[0] <= run.tol
    for _ in range(run.maxit):
        if converged:
            break
        _stationary_apply(a, s, coloring, b, x, run.kind, run.cfg)
        rel = np.linalg.norm(residual(a, b, x)) / bnorm
        hist.append(rel if np.isfinite(rel) else np.inf)
        if not np.isfinite(rel) or rel > _DIVERGENCE_LIMIT:
            break
        converged = rel <= run.tol
    return ConvergenceHistory(np.array(hist), converged)


def _execute(run: RunConfig):
    """Build and solve one configuration; returns (history, n, wall_ms)."""
    a = _build_matrix(run)
    b = random_rhs(a.nrows, run.seed)
    if run.solver == "stationary":
        if run.kind == "none":
            raise ValueError("stationary mode needs a relaxation kind, not 'none'")
        t0 = time.perf_counter()
        hist = _run_stationary(a, b, run)
        wall_ms = (time.perf_counter() - t0) * 1e3
        return hist, a.nrows, wall_ms
    m = None
    if run.kind != "none":
        m = Preconditioner(a, run.kind, run.cfg, precision=run.precision)
    t0 = time.perf_counter()
    if run.solver == "gmres":
        _, hist = gmres(a, b, m, restart=run.restart, tol=run.tol, maxit=run.maxit)
    elif run.solver == "cg":
        _, hist = cg(a, b, m, tol=run.tol, maxit=run.maxit)
    else:
        raise ValueError(f"unknown solver {run.solver!r}")
    wall_ms = (time.perf_counter() - t0) * 1e3
    return hist, a.nrows, wall_ms


def _history_metadata(run: RunConfig, n: int) -> dict:
    return {
        "solver": run.solver,
        "precond": run.precond_label(),
        "n": n,
        "tol": run.tol,
        "seed": run.seed,
    }


def cmd_solve(run: RunConfig, out=sys.stdout) -> int:
    try:
        hist, n, wall_ms = _execute(run)
    except DivergenceError as exc:
        print(f"diverged: {exc}", file=out)
        return EXIT_DIVERGED
    if run.csv_path is not None:
        mmio.write_history_csv(hist, _history_metadata(run, n), run.csv_path)
    print(
        f"{run.solver} {run.precond_label()} {n} {hist.iterations} "
        f"{hist.final_rel_res:.3e} {wall_ms:.1f}",
        file=out,
    )
    if hist.converged:
        return EXIT_CONVERGED
    if not np.isfinite(hist.final_rel_res) or hist.final_rel_res > _DIVERGENCE_LIMIT:
        return EXIT_DIVERGED
    return EXIT_MAXIT


def _sweep_cell(run: RunConfig):
    try:
        hist, _, _ = _execute(run)
    except (DivergenceError, NotSpdError, ValueError, OverflowError) as exc:
        return None, str(exc)
    if hist.converged:
        return hist, None
    return hist, "no convergence"


def cmd_sweep_study(base: RunConfig, omegas, n_js, out=sys.stdout) -> int:
    """Iteration-count grid over omega x n_j; one cell's failure never aborts."""
    runs = []
    for n_j in n_js:
        for omega in omegas:
            try:
                cfg = replace(base.cfg, n_j=n_j, omega=omega)
                runs.append(replace(base, cfg=cfg, csv_path=None))
            except ValueError as exc:
                runs.append(exc)
    workers = max(1, int(os.environ.get("RELAXSOLVE_THREADS", "1")))

    def cell(item):
        if isinstance(item, Exception):
            return None, str(item)
        return _sweep_cell(item)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(cell, runs))
    else:
        results = [cell(item) for item in runs]

    width = max(9, *(len(f"{w:g}") for w in omegas))
    header = "n_j \\ omega" + "".join(f" {f'{w:g}':>{width}}" for w in omegas)
    print(header, file=out)
    csv_lines = ["omega,n_j,iters,converged,rel_res"]
    for i, n_j in enumerate(n_js):
        cells = []
        for j, omega in enumerate(omegas):
            hist, err = results[i * len(omegas) + j]
            if hist is not None and err is None:
                cells.append(f"{hist.iterations:>{width}}")
                csv_lines.append(f"{omega:g},{n_j},{hist.iterations},1,{hist.final_rel_res:.17g}")
            else:
                cells.append(f"{'—':>{width}}")
                iters = hist.iterations if hist is not None else ""
                rel = f"{hist.final_rel_res:.17g}" if hist is not None and np.isfinite(hist.final_rel_res) else "inf"
                csv_lines.append(f"{omega:g},{n_j},{iters},0,{rel}")
        print(f"{f'n_j={n_j}':>11}" + " " + " ".join(cells), file=out)
    if base.csv_path is not None:
        with open(base.csv_path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(csv_lines) + "\n")
    return EXIT_CONVERGED


def cmd_spectrum(base: RunConfig, n_js, out=sys.stdout) -> int:
    """Spectral radii of the configured operator plus the two-stage bound."""
    a = _build_matrix(base)
    report = analysis.szyld_check(a, n_js, omega=base.cfg.omega, gamma=base.cfg.gamma)
    note = "" if report.regular_splitting else " (advisory: splitting regularity not verified structurally)"
    print(f"rho(T_1) = {report.rho_jr:.6f}{note}", file=out)
    print("n_j  rho(T_nj+1)  rho(T_1)^(nj+1)  holds", file=out)
    for row in report.rows:
        print(f"{row.n_j:>3}  {row.rho_two_stage:.9f}  {row.rho_jr_power:.9f}  {'yes' if row.holds else 'NO'}", file=out)
    return EXIT_CONVERGED if report.all_hold else EXIT_MAXIT


def _add_common(p: argparse.ArgumentParser):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--problem", help="generator spec kind:nx[,ny[,nz]], e.g. laplace2d:50")
    src.add_argument("--matrix", help="MatrixMarket coordinate file")
    p.add_argument("--precond", default="none", help="kind[:n_t[,n_k[,n_j]]], e.g. sgs2:1,1,1")
    p.add_argument("--omega", type=float, default=1.0, help="outer damping factor")
    p.add_argument("--gamma", type=float, default=1.0, help="inner damping factor")
    p.add_argument("--direction", choices=("forward", "backward", "symmetric"), default="forward")
    p.add_argument("--form", choices=("non_compact", "compact"), default="non_compact")
    p.add_argument("--precision", choices=("same", "single"), default="same",
                   help="'single' applies the preconditioner in float32 inside the double solve")
    p.add_argument("--restart", type=int, default=60)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--maxit", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nu", type=float, default=0.25, help="Poisson ratio for elasticity problems")
    p.add_argument("--csv", help="write history / grid CSV to this path")


def _run_config(args) -> RunConfig:
    kind, (n_t, n_k, n_j) = _parse_precond(args.precond)
    cfg = RelaxConfig(
        n_t=n_t, n_k=n_k, n_j=n_j,
        direction=args.direction, form=args.form,
        omega=args.omega, gamma=args.gamma,
    )
    problem = None
    if args.problem is not None:
        problem = _parse_problem(args.problem)
        problem = replace(problem, nu=args.nu, seed=args.seed)
    return RunConfig(
        problem=problem,
        matrix_path=args.matrix,
        solver=getattr(args, "solver", "gmres"),
        kind=kind,
        cfg=cfg,
        precision="single_inside_double" if args.precision == "single" else "same",
        restart=args.restart,
        tol=args.tol,
        maxit=args.maxit,
        seed=args.seed,
        csv_path=args.csv,
    )


def _parse_grid(text: str, convert):
    return [convert(tok) for tok in text.split(",") if tok]


def main(argv=None) -> int:
    parser = _Parser(prog="relaxsolve", description="Sparse relaxation and Krylov solver benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run one configured solve")
    _add_common(p_solve)
    p_solve.add_argument("--solver", choices=("gmres", "cg", "stationary"), default="gmres")

    p_sweep = sub.add_parser("sweep-study", help="iteration-count grid over omega x n_j")
    _add_common(p_sweep)
    p_sweep.add_argument("--solver", choices=("gmres", "cg", "stationary"), default="gmres")
    p_sweep.add_argument("--omegas", default="1.0", help="comma list of damping factors")
    p_sweep.add_argument("--njs", default="1", help="comma list of inner sweep counts")

    p_spec = sub.add_parser("spectrum", help="spectral radii and the two-stage lower bound")
    _add_common(p_spec)
    p_spec.add_argument("--njs", default="0,1,2,3", help="comma list of inner sweep counts")

    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            return cmd_solve(_run_config(args))
        if args.command == "sweep-study":
            omegas = _parse_grid(args.omegas, float)
            n_js = _parse_grid(args.njs, int)
            if not omegas or not n_js:
                raise ValueError("empty --omegas or --njs grid")
            return cmd_sweep_study(_run_config(args), omegas, n_js)
        return cmd_spectrum(_run_config(args), _parse_grid(args.njs, int))
    except (ValueError, OverflowError, mmio.MatrixMarketError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NotSpdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
