"""Pure-numpy implementations of the hot inner loops.

Used when the compiled extension is unavailable.  Semantics match
``dbmlab._kernels._core``; summation order may differ at the level of
floating-point rounding.
"""

import numpy as np


def dbm_drift(x):
    """Coulomb + restoring drift of the eigenvalue flow.

    d_l = (1/N) sum_{k != l} 1/(x_l - x_k) - x_l/2
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    d = x[:, None] - x[None, :]
    np.fill_diagonal(d, np.inf)
    return np.reciprocal(d).sum(axis=1) / n - 0.5 * x


def dbm_drift_regularized(x_ref, xhat, eps):
    """Drift of the regularized flow driven by the unregularized positions.

    d_j = (1/N) sum_{k != j} 1/(x_ref_j - x_ref_k + eps*sign(j-k)) - xhat_j/2
    """
    x_ref = np.asarray(x_ref, dtype=np.float64)
    xhat = np.asarray(xhat, dtype=np.float64)
    n = x_ref.shape[0]
    d = x_ref[:, None] - x_ref[None, :]
    idx = np.arange(n)
    d += eps * np.sign(idx[:, None] - idx[None, :])
    np.fill_diagonal(d, np.inf)
    return np.reciprocal(d).sum(axis=1) / n - 0.5 * xhat


def coupled_coefficient_matrix(x, y, eps):
    """Dense coupling coefficients B_ij = 1/(N (x_i-x_j+e_ij)(y_i-y_j+e_ij)).

    e_ij = eps*sign(i-j); the diagonal is zero.  eps=0 gives the raw
    (unregularized) coefficients.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = x.shape[0]
    dx = x[:, None] - x[None, :]
    dy = y[:, None] - y[None, :]
    if eps != 0.0:
        sgn = np.sign(np.arange(n)[:, None] - np.arange(n)[None, :])
        dx = dx + eps * sgn
        dy = dy + eps * sgn
    prod = dx * dy
    np.fill_diagonal(prod, np.inf)
    return np.reciprocal(prod) / n
