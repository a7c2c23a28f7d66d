"""Dense reference minimum of the residual over a Krylov subspace (test path)."""

from __future__ import annotations

import warnings

import numpy as np

from ibclab.errors import DegenerateKrylov


def explicit_krylov_basis(a: np.ndarray, b: np.ndarray, k: int, tol: float = 1e-12) -> np.ndarray:
    """Orthonormal basis (columns) of span{b, Ab, ..., A^{k-1} b}.

    Each new direction is A times the newest basis vector, orthogonalized
    against the full basis by two Householder QR passes. Stops early when the
    subspace becomes invariant.
    """
    q = (b / np.linalg.norm(b))[:, None]
    scale = max(np.linalg.norm(a, 2), np.finfo(float).tiny)
    while q.shape[1] < k:
        w = a @ q[:, -1]
        for _ in range(2):
            w = w - q @ (q.T @ w)
        nw = np.linalg.norm(w)
        if nw <= tol * scale:
            break
        q = np.linalg.qr(np.column_stack([q, w / nw]))[0]
    return q


def brute_force_min_residual(a, b, k: int) -> float:
    """min ||A x - b|| over x in span{b, ..., A^{k-1} b}, by dense least squares."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if k < 1:
        return float(np.linalg.norm(b))
    q = explicit_krylov_basis(a, b, k)
    if q.shape[1] < k:
        warnings.warn(f"Krylov subspace has dimension {q.shape[1]} < {k}", DegenerateKrylov, stacklevel=2)
    aq = a @ q
    y = np.linalg.lstsq(aq, b, rcond=None)[0]
    return float(np.linalg.norm(aq @ y - b))
