"""Multivariate integration: Hammersley points, the sample-mean rule, and
Brownian-sheet paths for average-case error experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from ibclab.core import CostLedger
from ibclab.errors import UnsolvableClass

PRIMES = (2, 3, 5, 7, 11, 13, 17, 19)
MAX_DIM = 8


@dataclass
class PointSet:
    d: int
    points: np.ndarray  # (n, d)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, self.d)

    def __len__(self) -> int:
        return len(self.points)


def radical_inverse(i: int, base: int) -> float:
    """Van der Corput map: mirror the base-``base`` digits of i about the point.

    Numerator and denominator are exact integers, so the result is the
    correctly rounded double of the rational.
    """
    num, den = 0, 1
    while i > 0:
        i, digit = divmod(i, base)
        num = num * base + digit
        den *= base
    return num / den


def hammersley_points(n: int, d: int) -> PointSet:
    """Point i = (i/n, phi_2(i), phi_3(i), ...) for i = 0..n-1."""
    if n < 1:
        raise ValueError("n must be positive")
    if not 1 <= d <= MAX_DIM:
        raise ValueError(f"d must lie in [1, {MAX_DIM}], got {d}")
    pts = np.empty((n, d))
    pts[:, 0] = np.arange(n) / n
    for j in range(1, d):
        base = PRIMES[j - 1]
        pts[:, j] = [radical_inverse(i, base) for i in range(n)]
    return PointSet(d, pts)


def van_der_corput(n: int, base: int) -> np.ndarray:
    return np.array([radical_inverse(i, base) for i in range(n)])


def star_discrepancy_1d(x) -> float:
    """Exact star discrepancy of points in [0, 1):
    1/(2n) + max_i |x_(i) - (2i - 1)/(2n)|."""
    x = np.sort(np.asarray(x, dtype=float))
    n = len(x)
    centers = (2.0 * np.arange(1, n + 1) - 1.0) / (2.0 * n)
    return float(1.0 / (2.0 * n) + np.max(np.abs(x - centers)))


@dataclass
class IntegrandSample:
    evaluator: Callable[[np.ndarray], np.ndarray]
    description: str
    integral: Optional[float] = None
    d: Optional[int] = None

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluator(np.atleast_2d(pts)), dtype=float)


def sample_mean_integrate(f: IntegrandSample, pts: PointSet, ledger: Optional[CostLedger] = None):
    """Arithmetic mean of f over the point set.

    Charges n information operations (one per function value), n - 1 additions
    and one division.
    """
    n = len(pts)
    if n == 0:
        raise ValueError("empty point set")
    ledger = CostLedger() if ledger is None else ledger
    values = f(pts.points)
    ledger.charge_info(n)
    ledger.charge_combinatory(n)
    return float(np.sum(values) / n), ledger


def wc_cardinality_exponent(r: int, d: int, p: float = math.inf) -> float:
    """Exponent d/r in comp(eps) = Theta(c eps^(-d/r)) for the Sobolev unit ball.

    Raises UnsolvableClass when p*r <= d.
    """
    if r < 1 or d < 1:
        raise ValueError("r and d must be positive integers")
    if not p > 1:
        raise ValueError("p must exceed 1")
    if not p * r > d:
        raise UnsolvableClass(f"p*r = {p * r} <= d = {d}: worst-case complexity is infinite")
    return d / r


def avg_cardinality(eps: float, d: int) -> int:
    """ceil(eps^-1 (ln eps^-1)^((d-1)/2)); an order-only sample size (constant 1)."""
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if d < 1:
        raise ValueError("d must be positive")
    inv = 1.0 / eps
    return math.ceil(inv * math.log(inv) ** ((d - 1) / 2.0))


# ---------------------------------------------------------------------------
# Brownian sheet


def _shell_coefficients(seed: int, d: int, level: int) -> np.ndarray:
    """Hierarchical coefficients for grid 2**level, built shell by shell so a
    finer grid reuses every coarser coefficient."""
    m = 2 ** level
    z = np.zeros((m,) * d)
    for s in range(level + 1):
        hi = 1 if s == 0 else 2 ** s
        lo = 0 if s == 0 else 2 ** (s - 1)
        box = (slice(0, hi),) * d
        idx = np.indices((hi,) * d)
        mask = idx.max(axis=0) >= lo
        rng = np.random.default_rng([seed, d, s])
        block = z[box]
        block[mask] = rng.standard_normal(int(mask.sum()))
    return z


def _hier_to_nodal(z: np.ndarray, axis: int) -> np.ndarray:
    """Hierarchical hat coefficients -> node values along one axis."""
    z = np.moveaxis(z, axis, 0)
    m = z.shape[0]
    level = int(round(math.log2(m)))
    cur = np.stack([np.zeros_like(z[0]), z[0]])
    for l in range(level):
        coef = z[2 ** l: 2 ** (l + 1)]
        mid = 0.5 * (cur[:-1] + cur[1:]) + coef * 2.0 ** (-l / 2.0 - 1.0)
        nxt = np.empty((2 * cur.shape[0] - 1,) + cur.shape[1:])
        nxt[0::2] = cur
        nxt[1::2] = mid
        cur = nxt
    return np.moveaxis(cur, 0, axis)


def brownian_sheet_nodes(d: int, grid_m: int, seed: int) -> np.ndarray:
    """Node values of a Brownian-sheet path on the uniform grid with grid_m
    cells per axis (covariance prod_j min(s_j, t_j) at the nodes)."""
    if not 1 <= d <= 3:
        raise ValueError("d must lie in [1, 3]")
    level = int(round(math.log2(grid_m))) if grid_m >= 1 else -1
    if grid_m < 1 or 2 ** level != grid_m:
        raise ValueError(f"grid_m must be a power of two, got {grid_m}")
    w = _shell_coefficients(seed, d, level)
    for ax in range(d):
        w = _hier_to_nodal(w, ax)
    return w


def _trapezoid_integral(nodes: np.ndarray) -> float:
    """Exact integral of the multilinear interpolant of the node values."""
    out = nodes
    for _ in range(nodes.ndim):
        m = out.shape[0] - 1
        wts = np.full(m + 1, 1.0 / m)
        wts[0] = wts[-1] = 0.5 / m
        out = np.tensordot(wts, out, axes=(0, 0))
    return float(out)


def brownian_sheet_sample(d: int, grid_m: int, seed: int, radius: Optional[float] = 1.0) -> IntegrandSample:
    """One Brownian-sheet path, multilinearly interpolated off the grid.

    The path is rescaled to sup-norm ``radius`` when it exceeds it (the
    truncated measure lives on the unit ball); ``radius=None`` keeps the raw
    Gaussian path.
    """
    nodes = brownian_sheet_nodes(d, grid_m, seed)
    peak = float(np.max(np.abs(nodes)))
    if radius is not None and peak > radius:
        nodes = nodes * (radius / peak)
    axis = np.linspace(0.0, 1.0, grid_m + 1)
    interp = RegularGridInterpolator((axis,) * d, nodes, method="linear")
    return IntegrandSample(
        evaluator=lambda x: interp(np.clip(x, 0.0, 1.0)),
        description=f"brownian-sheet d={d} m={grid_m} seed={seed} radius={radius}",
        integral=_trapezoid_integral(nodes),
        d=d,
    )


def analytic_sample(name: str, d: int) -> IntegrandSample:
    """Smooth test integrands with known integrals over [0, 1]^d."""
    if name == "constant":
        return IntegrandSample(lambda x: np.ones(len(x)), "analytic:constant", 1.0, d)
    if name == "coordinate_sum":
        return IntegrandSample(lambda x: x.sum(axis=1), "analytic:coordinate_sum", d / 2.0, d)
    if name == "cosine_product":
        val = (math.sin(1.0)) ** d
        return IntegrandSample(lambda x: np.prod(np.cos(x), axis=1), "analytic:cosine_product", val, d)
    raise ValueError(f"unknown analytic integrand {name!r}")


def random_points(n: int, d: int, seed: int) -> PointSet:
    return PointSet(d, np.random.default_rng([seed, n, d]).random((n, d)))


@dataclass
class ErrorRow:
    d: int
    eps: float
    n: int
    mean_error: float
    stderr: float
    method: str
    seed_base: int


def integration_error_curve(d: int, eps_list: Sequence[float], paths: int, grid_m: int = 512,
                            seed_base: int = 0, methods: Iterable[str] = ("hammersley", "monte_carlo"),
                            radius: Optional[float] = 1.0) -> List[ErrorRow]:
    """Mean absolute sample-mean error over an ensemble of Brownian-sheet paths,
    at n = avg_cardinality(eps, d) for each eps. All methods see the same paths."""
    methods = tuple(methods)
    ns = [avg_cardinality(e, d) for e in eps_list]
    pointsets = {}
    for n in ns:
        for meth in methods:
            if meth == "hammersley":
                pointsets[(meth, n)] = hammersley_points(n, d)
            elif meth == "monte_carlo":
                pointsets[(meth, n)] = random_points(n, d, seed_base)
            else:
                raise ValueError(f"unknown method {meth!r}")
    errs = {key: np.zeros(paths) for key in pointsets}
    for p in range(paths):
        f = brownian_sheet_sample(d, grid_m, seed_base + p, radius=radius)
        for key, pts in pointsets.items():
            est, _ = sample_mean_integrate(f, pts)
            errs[key][p] = abs(est - f.integral)
    rows = []
    for e, n in zip(eps_list, ns):
        for meth in methods:
            v = errs[(meth, n)]
            rows.append(ErrorRow(d, float(e), n, float(v.mean()), float(v.std(ddof=1) / math.sqrt(paths)),
                                 meth, seed_base))
    return rows


def scaling_slope(rows: Sequence[ErrorRow], method: str = "hammersley") -> float:
    """Least-squares slope of log(mean_error / sqrt(log n)) against log n."""
    sel = [r for r in rows if r.method == method]
    n = np.array([r.n for r in sel], dtype=float)
    err = np.array([r.mean_error for r in sel])
    y = np.log(err / np.sqrt(np.log(n)))
    return float(np.polyfit(np.log(n), y, 1)[0])
