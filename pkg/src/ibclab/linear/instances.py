"""Instance generators for the F1, F2 and Rho classes.

The eps-aware worst cases attain the cardinality formulas exactly: for the
target k = m(eps) - 1 the spectrum sits on the k+1 extremal points of T_k
mapped to the class interval, and the squared components of b follow the
Lagrange weights |l_j(z0)| at the image z0 of the origin. On such a pair the
minimal residual after k steps equals 1/T_k(z0) > eps, so mr needs exactly
m(eps) steps.
"""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

from ibclab.errors import UnsupportedClass
from ibclab.linear.cardinality import cardinality_F1, cardinality_F2
from ibclab.operators import ClassKind, LinearOracle, MatrixClassSpec


def random_orthogonal(n: int, seed: int) -> np.ndarray:
    """Haar-distributed orthogonal matrix (QR of a Gaussian, sign-corrected)."""
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def random_unit_vector(n: int, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def random_symmetric(n: int, seed: int, scale: float = 1.0) -> np.ndarray:
    """Symmetric Gaussian matrix rescaled to spectral norm ``scale``."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, n))
    a = (g + g.T) / 2.0
    return a * (scale / np.max(np.abs(np.linalg.eigvalsh(a))))


def chebyshev_extrema(k: int) -> np.ndarray:
    """cos(j pi / k), j = 0..k, ascending; a single node at 0 for k = 0."""
    if k == 0:
        return np.zeros(1)
    return np.cos(np.pi * np.arange(k, -1, -1) / k)


def _lagrange_weights(nodes: np.ndarray, z0: float) -> np.ndarray:
    """|l_j(z0)| for the Chebyshev extremal points (barycentric form), normalized."""
    delta = np.ones_like(nodes)
    delta[0] = delta[-1] = 0.5
    w = delta / np.abs(z0 - nodes)
    return w / w.sum()


def _spread(values: np.ndarray, weights: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Repeat each value to fill n slots; split its weight evenly over copies."""
    m = len(values)
    counts = np.full(m, n // m)
    counts[: n % m] += 1
    lam = np.repeat(values, counts)
    b = np.repeat(np.sqrt(weights / counts), counts)
    return lam, b / np.linalg.norm(b)


def _map(x: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return (hi + lo) / 2.0 + (hi - lo) / 2.0 * x


def _tailored_positive(n: int, cond: float, degree: int):
    nodes = chebyshev_extrema(degree)
    lam = _map(nodes, 1.0, cond)
    if cond == 1.0 or degree == 0:
        w = np.full(len(nodes), 1.0 / len(nodes))
    else:
        z0 = -(cond + 1.0) / (cond - 1.0)
        w = _lagrange_weights(nodes, z0)
    return lam, w


def gen_worst_case_spectrum(cls: MatrixClassSpec, n: int, seed: int = 0, eps: Optional[float] = None,
                            rotate: bool = False) -> Tuple[LinearOracle, np.ndarray]:
    """Hard (A, b) pair for F1(M) or F2(M).

    With ``eps`` the pair is worst case for that accuracy (see module
    docstring). Without it, the spectrum is the n Chebyshev extremal points
    mapped to [1, M] (F1) or mirrored onto [-M, -1] u [1, M] (F2) with equal
    weights on every eigenvector; that pair is hard for every eps at once but
    sharp for none of them.

    ``rotate`` conjugates by a Haar orthogonal matrix drawn from ``seed``.
    """
    if cls.kind is ClassKind.RHO:
        raise UnsupportedClass("use gen_rho_instance for the Rho class")
    if n < 1:
        raise ValueError("n must be positive")
    M = float(cls.M)
    if cls.kind is ClassKind.F1:
        m = cardinality_F1(eps, M, n) if eps is not None else 0
        if m >= 1:
            values, weights = _tailored_positive(n, M, m - 1)
            lam, b = _spread(values, weights, n)
        else:
            lam = _map(chebyshev_extrema(n - 1), 1.0, M) if n > 1 else np.ones(1)
            b = np.full(n, 1.0 / np.sqrt(n))
    else:
        m = cardinality_F2(eps, M, n) if eps is not None else 0
        if m >= 2 and n >= 2:
            sq, weights = _tailored_positive(n, M * M, m // 2 - 1)
            root = np.sqrt(sq)
            values = np.concatenate([-root[::-1], root])
            lam, b = _spread(values, np.concatenate([weights[::-1], weights]) / 2.0, n)
        else:
            half = n // 2
            pos = _map(chebyshev_extrema(half - 1), 1.0, M) if half > 1 else np.ones(half)
            lam = np.concatenate([-pos[::-1], pos, [M] if n % 2 else []])
            b = np.full(n, 1.0 / np.sqrt(n))
    q = random_orthogonal(n, seed) if rotate else None
    oracle = LinearOracle.from_diagonal(lam, q)
    return oracle, (q @ b if q is not None else b)


def gen_rho_instance(rho: float, n: int, seed: int = 0, pattern: str = "uniform",
                     rotate: bool = False) -> Tuple[LinearOracle, np.ndarray]:
    """A = I - B with ||B|| <= rho and a random unit b.

    ``pattern="uniform"`` draws the spectrum of B uniformly in [-rho, rho] and
    pins both endpoints; ``pattern="sign"`` uses B = rho * diag(+1, -1, ...).
    """
    if not 0 <= rho < 1:
        raise ValueError(f"rho must lie in [0, 1), got {rho}")
    rng = np.random.default_rng([seed, 1])
    if pattern == "uniform":
        mu = rng.uniform(-rho, rho, n)
        if n >= 2:
            mu[0], mu[1] = -rho, rho
    elif pattern == "sign":
        mu = rho * np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    else:
        raise ValueError(f"unknown pattern {pattern!r}")
    b = random_unit_vector(n, [seed, 2])
    q = random_orthogonal(n, seed) if rotate else None
    oracle = LinearOracle.from_diagonal(1.0 - mu, q)
    return oracle, b
