import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from relaxsolve import extract_splitting, from_dense, greedy_color, gs_sequential_sweep, spmv

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    """Load/compile the numba kernels once so timed tests measure the
    algorithms, not LLVM startup."""
    for dtype in (np.float64, np.float32):
        a = from_dense(np.array([[2.0, -1.0], [-1.0, 2.0]], dtype=dtype), dtype=dtype)
        s = extract_splitting(a)
        spmv(a, np.ones(2, dtype=dtype))
        gs_sequential_sweep(a, s, np.ones(2, dtype=dtype), np.zeros(2, dtype=dtype))
    greedy_color(a)


@pytest.fixture
def a2():
    """The 2x2 model system [[2, -1], [-1, 2]]."""
    return from_dense([[2.0, -1.0], [-1.0, 2.0]])


@pytest.fixture
def a2_split(a2):
    return extract_splitting(a2)


@pytest.fixture
def b2():
    return np.array([1.0, 1.0])
