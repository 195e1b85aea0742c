"""MatrixMarket coordinate reader and convergence-history CSV writer.

The reader covers what SuiteSparse downloads actually contain: real,
integer, or pattern fields in general or symmetric coordinate format.
Pattern entries get value 1.0 and integer values are parsed as reals, so
one code path serves all three.  Indices are 1-based in the file and
0-based in memory; symmetric files are expanded to full storage; duplicate
coordinates are summed.  Parse errors carry the offending line number.
"""

from __future__ import annotations

import numpy as np

from .krylov import ConvergenceHistory
from .sparse import CsrMatrix, from_coo


class MatrixMarketError(ValueError):
    """Malformed MatrixMarket input; message includes the line number."""


_SUPPORTED_FIELDS = ("real", "integer", "pattern")
_SUPPORTED_SYMMETRIES = ("general", "symmetric")


def read_matrix_market(path) -> CsrMatrix:
    """Parse a MatrixMarket coordinate file into a CsrMatrix."""
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        lines = fh.readlines()
    if not lines:
        raise MatrixMarketError("line 1: empty file")
    banner = lines[0].rstrip("\n")
    parts = banner.split()
    if not banner.startswith("%%MatrixMarket") or len(parts) != 5:
        raise MatrixMarketError(f"line 1: bad banner {banner!r}; expected "
                                "'%%MatrixMarket matrix coordinate <field> <symmetry>'")
    _, obj, fmt, field, symmetry = (p.lower() for p in parts)
    if obj != "matrix":
        raise MatrixMarketError(f"line 1: unsupported object {obj!r}; only 'matrix' is supported")
    if fmt != "coordinate":
        raise MatrixMarketError(f"line 1: unsupported format {fmt!r}; only 'coordinate' is supported")
    if field not in _SUPPORTED_FIELDS:
        raise MatrixMarketError(f"line 1: unsupported field {field!r}; supported: {_SUPPORTED_FIELDS}")
    if symmetry not in _SUPPORTED_SYMMETRIES:
        raise MatrixMarketError(f"line 1: unsupported symmetry {symmetry!r}; supported: {_SUPPORTED_SYMMETRIES}")

    lineno = 1
    size = None
    for lineno, raw in enumerate(lines[1:], start=2):
        stripped = raw.strip()
        if not stripped or stripped.startswith("%"):
            continue
        size = stripped.split()
        break
    if size is None:
        raise MatrixMarketError(f"line {lineno}: missing size line")
    if len(size) != 3:
        raise MatrixMarketError(f"line {lineno}: size line must be 'nrows ncols nnz', got {' '.join(size)!r}")
    try:
        nrows, ncols, declared = (int(tok) for tok in size)
    except ValueError:
        raise MatrixMarketError(f"line {lineno}: non-integer size line {' '.join(size)!r}") from None
    if nrows < 0 or ncols < 0 or declared < 0:
        raise MatrixMarketError(f"line {lineno}: negative sizes in {' '.join(size)!r}")

    want_values = field != "pattern"
    rows = np.empty(declared, dtype=np.int64)
    cols = np.empty(declared, dtype=np.int64)
    vals = np.ones(declared, dtype=np.float64)
    count = 0
    for lineno, raw in enumerate(lines[lineno:], start=lineno + 1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("%"):
            continue
        if count >= declared:
            raise MatrixMarketError(f"line {lineno}: more than the declared {declared} entries")
        tok = stripped.split()
        expected = 3 if want_values else 2
        if len(tok) != expected:
            raise MatrixMarketError(f"line {lineno}: expected {expected} fields, got {len(tok)}")
        try:
            i, j = int(tok[0]), int(tok[1])
            if want_values:
                vals[count] = float(tok[2])
        except ValueError:
            raise MatrixMarketError(f"line {lineno}: cannot parse entry {stripped!r}") from None
        if not (1 <= i <= nrows and 1 <= j <= ncols):
            raise MatrixMarketError(
                f"line {lineno}: index ({i}, {j}) outside declared bounds {nrows}x{ncols}"
            )
        rows[count] = i - 1
        cols[count] = j - 1
        count += 1
    if count != declared:
        raise MatrixMarketError(
            f"line {len(lines)}: end of file after {count} entries, header declared {declared}"
        )

    if symmetry == "symmetric":
        off = rows != cols
        mirror_r, mirror_c, mirror_v = cols[off], rows[off], vals[off]
        rows = np.concatenate([rows, mirror_r])
        cols = np.concatenate([cols, mirror_c])
        vals = np.concatenate([vals, mirror_v])
    return from_coo(nrows, ncols, rows, cols, vals)


def write_history_csv(history: ConvergenceHistory, metadata: dict, path) -> None:
    """Write a convergence history as CSV with a metadata comment line.

    Residuals are printed with 17 significant digits so a reparse
    reproduces them bitwise.
    """
    meta = ",".join(f"{k}={v}" for k, v in metadata.items())
    lines = [f"# {meta}", "iter,rel_res"]
    for k, value in enumerate(history.rel_res):
        lines.append(f"{k},{value:.17g}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")
