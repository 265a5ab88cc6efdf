import numpy as np
from scipy.linalg import solve_banded


def solve_tridiagonal(lower, diag, upper, rhs):
    """Solve a tridiagonal system; lower[i] couples row i to i-1, upper[i] to i+1."""
    n = len(diag)
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    return solve_banded((1, 1), ab, rhs, check_finite=False)


def solve_cyclic_tridiagonal(lower, diag, upper, rhs):
    """Periodic tridiagonal solve via Sherman-Morrison.

    Row i reads lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i] with
    indices taken modulo n.  ``rhs`` may have several columns.
    """
    n = len(diag)
    a0 = lower[0]  # row 0, column n-1
    cn = upper[-1]  # row n-1, column 0
    gamma = -diag[0]
    d = np.array(diag, dtype=float)
    d[0] -= gamma
    d[-1] -= a0 * cn / gamma
    rhs = np.asarray(rhs, float)
    u = np.zeros(n)
    u[0] = gamma
    u[-1] = cn
    cols = rhs if rhs.ndim == 2 else rhs[:, None]
    both = np.column_stack((cols, u))
    sol = solve_tridiagonal(lower, d, upper, both)
    y, z = sol[:, :-1], sol[:, -1]
    # v = (1, 0, ..., 0, a0 / gamma)
    vy = y[0] + a0 / gamma * y[-1]
    vz = z[0] + a0 / gamma * z[-1]
    x = y - np.outer(z, vy / (1.0 + vz))
    return x if rhs.ndim == 2 else x[:, 0]
