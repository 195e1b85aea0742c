import numpy as np
import pytest

from relaxsolve import (
    Coloring,
    extract_splitting,
    from_dense,
    greedy_color,
    gs_sequential_sweep,
    jr_sweeps,
    laplace2d,
    mt_gs_sweep,
    random_rhs,
)

from oracles import random_sparse, red_black_sweep, tridiag_csr


def assert_valid_coloring(a, coloring):
    """Brute force: stored off-diagonal entries must straddle colors."""
    rows = a.row_indices()
    for i, j in zip(rows, a.col_idx):
        if i != j:
            assert coloring.color[i] != coloring.color[j]
    # rows_by_color partitions 0..n-1
    joined = np.sort(np.concatenate(coloring.rows_by_color))
    assert np.array_equal(joined, np.arange(a.nrows))


class TestGreedyColor:
    def test_diagonal_matrix_single_color(self):
        c = greedy_color(from_dense(np.diag([1.0, 2.0, 3.0])))
        assert c.num_colors == 1
        assert np.array_equal(c.color, [0, 0, 0])

    def test_a2(self, a2):
        c = greedy_color(a2)
        assert np.array_equal(c.color, [0, 1])
        assert c.num_colors == 2

    def test_tridiagonal_alternates(self):
        c = greedy_color(tridiag_csr(5))
        assert np.array_equal(c.color, [0, 1, 0, 1, 0])
        assert c.num_colors == 2
        assert_valid_coloring(tridiag_csr(5), c)

    @pytest.mark.parametrize("seed", range(5))
    def test_random_valid_and_bounded(self, seed):
        rng = np.random.default_rng(seed)
        a = from_dense(random_sparse(40, rng, density=0.1))
        c = greedy_color(a)
        assert_valid_coloring(a, c)
        # symmetrized degree bound
        dense = a.to_dense()
        pattern = (dense != 0) | (dense.T != 0)
        np.fill_diagonal(pattern, False)
        assert c.num_colors <= 1 + pattern.sum(axis=1).max()

    def test_unsymmetric_pattern_symmetrized(self):
        # only a[0,1] stored; rows 0 and 1 must still differ in color
        a = from_dense([[1.0, 5.0], [0.0, 1.0]])
        c = greedy_color(a)
        assert c.color[0] != c.color[1]

    def test_deterministic(self):
        a = laplace2d(7, 5)
        c1 = greedy_color(a)
        c2 = greedy_color(a)
        assert np.array_equal(c1.color, c2.color)


class TestMtSweep:
    def test_diagonal_matrix_equals_jacobi(self):
        a = from_dense(np.diag([2.0, 4.0, 8.0]))
        s = extract_splitting(a)
        b = np.array([2.0, 4.0, 16.0])
        c = greedy_color(a)
        x1 = np.zeros(3)
        x2 = np.zeros(3)
        mt_gs_sweep(a, s, c, b, x1)
        jr_sweeps(a, s, b, x2, 1)
        assert np.array_equal(x1, x2)

    def test_a2_two_colors_match_sequential(self, a2, a2_split, b2):
        c = greedy_color(a2)
        x = np.zeros(2)
        mt_gs_sweep(a2, a2_split, c, b2, x)
        assert np.array_equal(x, [0.5, 0.75])

    def test_red_black_oracle_1d(self):
        a = tridiag_csr(5)
        s = extract_splitting(a)
        b = np.ones(5)
        c = greedy_color(a)
        x = np.zeros(5)
        mt_gs_sweep(a, s, c, b, x)
        want = red_black_sweep(a.to_dense(), b, np.zeros(5))
        assert np.allclose(x, want, rtol=1e-14, atol=1e-15)

    def test_invariant_under_intra_color_shuffle(self):
        a = laplace2d(6, 6)
        s = extract_splitting(a)
        b = random_rhs(36, 1)
        c = greedy_color(a)
        rng = np.random.default_rng(2)
        shuffled = Coloring(
            color=c.color,
            num_colors=c.num_colors,
            rows_by_color=[rng.permutation(rows) for rows in c.rows_by_color],
        )
        x1 = random_rhs(36, 5)
        x2 = x1.copy()
        mt_gs_sweep(a, s, c, b, x1)
        mt_gs_sweep(a, s, shuffled, b, x2)
        assert np.array_equal(x1, x2)

    def test_n_colors_natural_order_is_sequential_bitwise(self):
        rng = np.random.default_rng(8)
        a = from_dense(random_sparse(30, rng))
        s = extract_splitting(a, omega=1.0)
        b = rng.standard_normal(30)
        trivial = Coloring(
            color=np.arange(30),
            num_colors=30,
            rows_by_color=[np.array([i]) for i in range(30)],
        )
        for direction in ("forward", "backward"):
            x1 = rng.standard_normal(30)
            x2 = x1.copy()
            mt_gs_sweep(a, s, trivial, b, x1, direction)
            gs_sequential_sweep(a, s, b, x2, direction)
            assert np.array_equal(x1, x2)

    def test_backward_reverses_colors(self):
        a = tridiag_csr(5)
        s = extract_splitting(a)
        b = np.ones(5)
        c = greedy_color(a)
        x = np.zeros(5)
        mt_gs_sweep(a, s, c, b, x, "backward")
        # odd rows first from x=0, then even rows see updated odds
        want = np.zeros(5)
        dense = a.to_dense()
        for i in (1, 3):
            want[i] = b[i] / dense[i, i]
        for i in (0, 2, 4):
            want[i] = (b[i] - dense[i] @ want + dense[i, i] * want[i]) / dense[i, i]
        assert np.allclose(x, want, rtol=1e-14, atol=1e-15)

    def test_coloring_size_mismatch(self, a2, a2_split, b2):
        c = greedy_color(laplace2d(2, 2))
        with pytest.raises(ValueError, match="coloring"):
            mt_gs_sweep(a2, a2_split, c, b2, np.zeros(2))
