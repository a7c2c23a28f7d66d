"""Independent dense reference computations used only by the tests."""

import numpy as np
from scipy.optimize import minimize_scalar

from ibclab.linear.bruteforce import explicit_krylov_basis


def dense_gmr_min(a, b, k, grid=4001, polish=5):
    """min over unit x in K_k(A, b) and real lam of ||Ax - lam x||.

    For each lam the inner minimum is the smallest singular value of
    (A - lam I) Q with Q an explicit orthonormal Krylov basis. A uniform lam grid
    over the Ritz interval locates the basins; bounded scalar searches polish
    the best grid points.
    """
    q = explicit_krylov_basis(a, b, k)
    aq = a @ q
    ritz = np.linalg.eigvalsh(q.T @ aq)

    def sigma(lam):
        return np.linalg.svd(aq - lam * q, compute_uv=False)[-1]

    if ritz[0] == ritz[-1]:
        return sigma(ritz[0])
    lams = np.linspace(ritz[0], ritz[-1], grid)
    vals = np.array([sigma(l) for l in lams])
    h = lams[1] - lams[0]
    best = vals.min()
    for idx in np.argsort(vals)[:polish]:
        lo, hi = max(ritz[0], lams[idx] - h), min(ritz[-1], lams[idx] + h)
        res = minimize_scalar(sigma, bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
        best = min(best, res.fun)
    return float(best)


def min_ritz_residual(a, b, k):
    q = explicit_krylov_basis(a, b, k)
    theta, s = np.linalg.eigh(q.T @ a @ q)
    x = q @ s
    return float(min(np.linalg.norm(a @ x[:, i] - theta[i] * x[:, i]) for i in range(len(theta))))


def chebyshev_by_trig(k, t):
    """T_k(t) for |t| >= 1 through cosh, independent of the recurrence."""
    return float(np.cosh(k * np.arccosh(t)))
