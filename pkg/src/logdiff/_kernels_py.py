"""NumPy/SciPy reference implementations of the hot kernels.

These are the fallback backend; logdiff._core provides compiled
equivalents with identical signatures.
"""

import numpy as np
from scipy.linalg import solve_banded


def tridiag_solve(sub, diag, sup, rhs):
    """Solve a tridiagonal system A x = rhs.

    sub and sup have length n-1 (first sub-diagonal and first
    super-diagonal). Systems are assumed diagonally dominant, as produced
    by the implicit steppers.
    """
    n = diag.shape[0]
    ab = np.zeros((3, n))
    ab[0, 1:] = sup
    ab[1, :] = diag
    ab[2, :-1] = sub
    return solve_banded((1, 1), ab, rhs)


def planar_log_step(v, out, coef):
    """out = v + coef * five_point_laplacian(ln v) on interior nodes.

    Boundary nodes are copied from v; the caller applies the boundary
    condition afterwards. coef = dt / h^2.
    """
    w = np.log(v)
    out[:, :] = v
    out[1:-1, 1:-1] = v[1:-1, 1:-1] + coef * (
        w[2:, 1:-1]
        + w[:-2, 1:-1]
        + w[1:-1, 2:]
        + w[1:-1, :-2]
        - 4.0 * w[1:-1, 1:-1]
    )
    return out
