import numpy as np
import pytest

from relaxsolve import (
    NotSpdError,
    Preconditioner,
    RelaxConfig,
    apply_preconditioner,
    cg,
    from_dense,
    gmres,
    laplace2d,
    random_rhs,
    spmv,
)

from oracles import random_sparse_spd


class ExactInverse:
    """Test-only preconditioner: a dense solve, i.e. P = A^-1."""

    def __init__(self, a):
        self.inv = np.linalg.inv(a.to_dense())

    def apply(self, r):
        return self.inv @ r


class TestGmres:
    def test_identity_converges_in_one(self):
        a = from_dense(np.eye(4))
        b = np.array([4.0, -1.0, 2.0, 0.5])
        x, h = gmres(a, b)
        assert h.converged and h.iterations == 1
        assert np.allclose(x, b, rtol=1e-12, atol=1e-14)

    def test_a2_krylov_exactness(self, a2, b2):
        x, h = gmres(a2, b2, tol=1e-12)
        assert h.converged and h.iterations <= 2
        assert np.allclose(x, [1.0, 1.0], rtol=1e-10, atol=1e-12)

    def test_sgs2_parity_with_sequential_sgs(self):
        a = laplace2d(50)
        b = np.ones(a.nrows)
        m1 = Preconditioner(a, "sgs2", RelaxConfig(1, 1, 1))
        _, h1 = gmres(a, b, m1, restart=60, tol=1e-9)
        m2 = Preconditioner(a, "sgs_seq", RelaxConfig(1, 1, 0))
        _, h2 = gmres(a, b, m2, restart=60, tol=1e-9)
        assert h1.converged and h2.converged
        assert h1.iterations <= 1.05 * h2.iterations

    def test_estimates_non_increasing_within_cycle(self):
        a = laplace2d(10)
        b = random_rhs(a.nrows, 1)
        _, h = gmres(a, b, restart=200, tol=1e-10)
        assert h.converged
        # single cycle: every estimate after the initial entry shrinks
        assert np.all(np.diff(h.rel_res[1:]) <= 1e-12)

    def test_exact_preconditioner_one_iteration(self):
        a = laplace2d(5)
        b = random_rhs(25, 2)
        x, h = gmres(a, b, ExactInverse(a), tol=1e-10)
        assert h.converged and h.iterations == 1

    def test_history_invariants(self):
        a = laplace2d(8)
        b = random_rhs(64, 0)
        x, h = gmres(a, b, tol=1e-9)
        assert h.rel_res.shape[0] == h.iterations + 1
        assert h.rel_res[0] == 1.0  # x0 = 0 and rel res of b is 1
        assert h.final_rel_res == h.rel_res[-1]

    def test_true_residual_at_return(self):
        a = laplace2d(12)
        b = random_rhs(a.nrows, 3)
        x, h = gmres(a, b, tol=1e-9)
        true = np.linalg.norm(b - spmv(a, x)) / np.linalg.norm(b)
        assert h.final_rel_res == pytest.approx(true, rel=1e-12, abs=1e-16)

    def test_maxit_exhausted(self):
        a = laplace2d(20)
        b = random_rhs(400, 1)
        _, h = gmres(a, b, tol=1e-14, maxit=5)
        assert not h.converged
        assert h.iterations == 5

    def test_restart_cycles(self):
        a = laplace2d(15)
        b = random_rhs(225, 5)
        _, h_small = gmres(a, b, restart=5, tol=1e-9)
        assert h_small.converged

    def test_x0_passed_through(self, a2, b2):
        x, h = gmres(a2, b2, x0=np.array([1.0, 1.0]), tol=1e-12)
        assert h.converged and h.iterations == 0
        assert np.array_equal(x, [1.0, 1.0])

    def test_invalid_args(self, a2, b2):
        with pytest.raises(ValueError):
            gmres(a2, b2, tol=0.0)
        with pytest.raises(ValueError):
            gmres(a2, b2, restart=0)


class TestCg:
    def test_jacobi_preconditioner_exact_for_diagonal(self):
        a = from_dense(np.diag([1.0, 2.0, 3.0, 4.0]))
        m = Preconditioner(a, "jr", RelaxConfig(1, 1, 0))
        x, h = cg(a, np.ones(4), m)
        assert h.converged and h.iterations == 1
        assert np.allclose(x, [1.0, 0.5, 1.0 / 3.0, 0.25], rtol=1e-12, atol=1e-14)

    def test_a2_exactness(self, a2, b2):
        x, h = cg(a2, b2, tol=1e-12)
        assert h.converged and h.iterations <= 2
        assert np.allclose(x, [1.0, 1.0], rtol=1e-10, atol=1e-12)

    def test_exact_preconditioner_one_iteration(self):
        a = laplace2d(5)
        b = random_rhs(25, 4)
        _, h = cg(a, b, ExactInverse(a), tol=1e-10)
        assert h.converged and h.iterations == 1

    def test_nonsymmetric_kind_rejected(self, a2, b2):
        m = Preconditioner(a2, "gs_seq", RelaxConfig(1, 1, 0))
        with pytest.raises(ValueError, match="symmetric"):
            cg(a2, b2, m)

    def test_negative_curvature_flags_non_spd(self):
        a = from_dense(np.diag([1.0, -1.0]))
        with pytest.raises(NotSpdError):
            cg(a, np.array([1.0, 1.0]))

    def test_history_true_residuals(self):
        a = laplace2d(10)
        b = random_rhs(100, 1)
        x, h = cg(a, b, tol=1e-10)
        assert h.converged
        assert h.rel_res.shape[0] == h.iterations + 1
        true = np.linalg.norm(b - spmv(a, x)) / np.linalg.norm(b)
        assert h.final_rel_res == pytest.approx(true, rel=1e-12, abs=1e-16)


class TestPreconditioner:
    KINDS = ("none", "jr", "gs_seq", "sgs_seq", "mt_gs", "mt_sgs", "gs2", "sgs2")
    SYMMETRIC = ("none", "jr", "sgs_seq", "mt_sgs", "sgs2")

    def test_none_is_identity(self, a2):
        m = Preconditioner(a2, "none")
        r = np.array([3.0, -2.0])
        z = m.apply(r)
        assert np.array_equal(z, r)
        assert z is not r

    def test_jr_single_sweep_is_diagonal_scaling(self, a2):
        m = Preconditioner(a2, "jr", RelaxConfig(1, 1, 0))
        assert np.array_equal(m.apply(np.array([1.0, 1.0])), [0.5, 0.5])

    def test_gs2_matches_relaxation_from_zero(self, a2):
        m = Preconditioner(a2, "gs2", RelaxConfig(1, 1, 1))
        assert np.array_equal(m.apply(np.array([1.0, 1.0])), [0.5, 0.75])

    def test_apply_preconditioner_helper(self, a2):
        r = np.array([2.0, 4.0])
        assert np.array_equal(apply_preconditioner(None, r), r)
        m = Preconditioner(a2, "jr", RelaxConfig(1, 1, 0))
        assert np.array_equal(apply_preconditioner(m, r), m.apply(r))

    @pytest.mark.parametrize("kind", KINDS)
    def test_linearity(self, kind):
        rng = np.random.default_rng(31)
        a = from_dense(random_sparse_spd(40, rng))
        m = Preconditioner(a, kind, RelaxConfig(2, 1, 1))
        r1 = rng.standard_normal(40)
        r2 = rng.standard_normal(40)
        gap = np.linalg.norm(m.apply(r1 + r2) - m.apply(r1) - m.apply(r2))
        assert gap <= 1e-12 * (np.linalg.norm(r1) + np.linalg.norm(r2))

    @pytest.mark.parametrize("kind", SYMMETRIC)
    def test_symmetry_on_spd(self, kind):
        rng = np.random.default_rng(13)
        a = from_dense(random_sparse_spd(30, rng))
        m = Preconditioner(a, kind, RelaxConfig(1, 1, 1))
        assert m.is_symmetric
        r1 = rng.standard_normal(30)
        r2 = rng.standard_normal(30)
        asym = abs(r1 @ m.apply(r2) - r2 @ m.apply(r1))
        assert asym <= 1e-10 * np.linalg.norm(r1) * np.linalg.norm(r2)

    def test_forward_kinds_not_symmetric(self, a2):
        for kind in ("gs_seq", "mt_gs", "gs2"):
            assert not Preconditioner(a2, kind).is_symmetric

    def test_symmetric_kinds_force_direction(self, a2):
        m = Preconditioner(a2, "sgs2", RelaxConfig(1, 1, 1, direction="forward"))
        assert m.cfg.direction == "symmetric"

    def test_single_inside_double_tracks_double(self):
        a = laplace2d(12)
        r = random_rhs(a.nrows, 9)
        m_d = Preconditioner(a, "sgs2", RelaxConfig(1, 1, 1))
        m_s = Preconditioner(a, "sgs2", RelaxConfig(1, 1, 1), precision="single_inside_double")
        z_d = m_d.apply(r)
        z_s = m_s.apply(r)
        assert z_s.dtype == np.float64
        rel = np.linalg.norm(z_s - z_d) / np.linalg.norm(z_d)
        assert 0 < rel < 1e-5  # float32 noise, nothing worse

    def test_single_mode_does_not_change_convergence(self):
        a = laplace2d(30)
        b = random_rhs(a.nrows, 0)
        m_d = Preconditioner(a, "sgs2", RelaxConfig(1, 1, 1))
        m_s = Preconditioner(a, "sgs2", RelaxConfig(1, 1, 1), precision="single_inside_double")
        _, h_d = cg(a, b, m_d, tol=1e-9)
        _, h_s = cg(a, b, m_s, tol=1e-9)
        assert h_d.converged == h_s.converged == True  # noqa: E712
        assert abs(h_s.iterations - h_d.iterations) <= max(2, 0.02 * h_d.iterations)

    def test_downcast_overflow_raises(self):
        a = from_dense(np.diag([2.0, 2.0]))
        m = Preconditioner(a, "jr", RelaxConfig(1, 1, 0), precision="single_inside_double")
        with pytest.raises(OverflowError):
            m.apply(np.array([1e39, 0.0]))

    def test_unknown_kind_and_precision(self, a2):
        with pytest.raises(ValueError, match="kind"):
            Preconditioner(a2, "ilu")
        with pytest.raises(ValueError, match="precision"):
            Preconditioner(a2, "jr", precision="half")

    def test_length_mismatch(self, a2):
        m = Preconditioner(a2, "jr")
        with pytest.raises(ValueError):
            m.apply(np.ones(5))
