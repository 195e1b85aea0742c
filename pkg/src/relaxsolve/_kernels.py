"""Numba-compiled CSR kernels.

These are the only row-by-row loops in the package; everything else is
vectorized numpy on top of them.  No ``fastmath``: operation order and
rounding are part of the contract (the multicolor sweep must reproduce the
sequential sweep bitwise when the visit order coincides, and the float32
path must stay in float32).  Each kernel is compiled once per value dtype.
"""

import numba as nb

_jit = nb.njit(nogil=True, cache=True)


@_jit
def csr_matvec(row_ptr, col_idx, values, x, out):
    # out accumulates in its own dtype, so float32 inputs stay float32.
    for i in range(out.shape[0]):
        out[i] = 0
        for k in range(row_ptr[i], row_ptr[i + 1]):
            out[i] += values[k] * x[col_idx[k]]


@_jit
def gs_ordered_sweep(row_ptr, col_idx, values, diag, b, x, order, omega, one_minus_omega):
    # In-place Gauss-Seidel row updates in the given visit order:
    #   x[i] <- (1 - w) x[i] + w (b[i] - sum_{j != i} a[i,j] x[j]) / a[i,i]
    # `omega` and `one_minus_omega` must already carry the working dtype.
    for t in range(order.shape[0]):
        i = order[t]
        s = b[i]
        for k in range(row_ptr[i], row_ptr[i + 1]):
            j = col_idx[k]
            if j != i:
                s -= values[k] * x[j]
        if omega == 1.0:
            x[i] = s / diag[i]
        else:
            x[i] = one_minus_omega * x[i] + omega * (s / diag[i])


@_jit
def greedy_color(adj_ptr, adj_idx, color, mark):
    # Sequential greedy coloring, ascending rows, smallest available color.
    # `color` must come in filled with -1, `mark` with -1.
    num_colors = 0
    for i in range(color.shape[0]):
        for k in range(adj_ptr[i], adj_ptr[i + 1]):
            c = color[adj_idx[k]]
            if c >= 0:
                mark[c] = i
        c = 0
        while mark[c] == i:
            c += 1
        color[i] = c
        if c + 1 > num_colors:
            num_colors = c + 1
    return num_colors
