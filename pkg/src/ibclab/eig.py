"""Unspecified eigenpair problem under Krylov information.

gmr minimizes ||Ax - lam x|| over unit x in the Krylov subspace and real lam.
With x = V_k y and A V_k = V_{k+1} Tbar_k this is

    min over lam of  sigma_min(Tbar_k - lam * [I; 0])

a one-dimensional problem. Writing the (k+1) x k matrix in the Ritz basis of
T_k, sigma_min^2 is the smallest root of the secular equation

    1 + beta^2 * sum_j u_j^2 / ((theta_j - lam)^2 - mu) = 0

(u = last row of the Ritz vectors). Since sigma_min^2 >= min_j (theta_j -
lam)^2, the minimizer lies within the best Ritz residual of some Ritz value;
those windows are scanned on a grid and the best points polished with a
bounded scalar search on the exact singular value.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np
import scipy.linalg
from scipy.optimize import minimize_scalar

from ibclab.core import ComplexityBand, CostLedger, CostModel
from ibclab.errors import FullKrylov, NotConverged, RegimeViolation
from ibclab.lanczos import Lanczos
from ibclab.linear.bruteforce import explicit_krylov_basis
from ibclab.linear.minres import _prepare_rhs
from ibclab.operators import LinearOracle

GRID_POINTS = 17
POLISH_CANDIDATES = 3
SECULAR_ITERS = 100


@dataclass
class EigPair:
    x: np.ndarray
    lam: float
    scaled_residual: float

    def recompute(self, a: np.ndarray, norm: Optional[float] = None) -> float:
        norm = float(np.linalg.norm(a, 2)) if norm is None else norm
        return float(np.linalg.norm(a @ self.x - self.lam * self.x) / norm)


@dataclass
class EigReport:
    pair: EigPair
    steps: int
    ledger: CostLedger
    converged: bool
    residual_history: List[float] = field(default_factory=list)
    ritz_history: List[float] = field(default_factory=list)
    norm_estimate: float = 1.0


@dataclass(frozen=True)
class RandomStartSpec:
    """Trial t starts from a standard normal vector drawn with
    ``numpy.random.default_rng([seed, t])``, normalized to the unit sphere."""

    seed: int = 0
    num_trials: int = 1

    def __post_init__(self):
        if self.num_trials < 1:
            raise ValueError("num_trials must be positive")

    def vector(self, n: int, trial: int) -> np.ndarray:
        return trial_start_vector(n, self.seed, trial)


def trial_start_vector(n: int, seed: int, trial: int) -> np.ndarray:
    v = np.random.default_rng([seed, trial]).standard_normal(n)
    return v / np.linalg.norm(v)


# ---------------------------------------------------------------------------
# inner gmr problem on the projected matrix


def _secular_min(theta: np.ndarray, z: np.ndarray, lams: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue of diag((theta - lam)^2) + z z^T for each lam."""
    d = (theta[None, :] - lams[:, None]) ** 2
    w = z * z
    coupled = w > 0
    out = np.full(len(lams), np.inf)
    if (~coupled).any():
        out = d[:, ~coupled].min(axis=1)
    if not coupled.any():
        return out
    dc = d[:, coupled]
    wc = w[coupled]
    part = np.partition(dc, 1, axis=1) if dc.shape[1] > 1 else None
    lo = dc.min(axis=1)
    hi = lo + wc.sum()
    if part is not None:
        hi = np.minimum(hi, part[:, 1])
    for _ in range(SECULAR_ITERS):
        mid = 0.5 * (lo + hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            f = 1.0 + np.sum(wc / (dc - mid[:, None]), axis=1)
        pos = f > 0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
    return np.minimum(out, 0.5 * (lo + hi))


def _sigma_exact(tbar: np.ndarray, lam: float):
    k = tbar.shape[1]
    m = tbar.copy()
    m[np.arange(k), np.arange(k)] -= lam
    _, s, vt = np.linalg.svd(m)
    return s[-1], vt[-1]


def gmr_projected(t: np.ndarray, beta: float, ledger: Optional[CostLedger] = None):
    """Solve the gmr problem for the (k+1) x k extended tridiagonal.

    Returns (residual, lam, y, best_ritz_residual) where y is a unit
    coefficient vector and lam its Rayleigh quotient.
    """
    k = t.shape[0]
    theta, s = np.linalg.eigh(t)
    u = s[-1, :]
    ritz_res = np.abs(beta * u)
    i0 = int(np.argmin(ritz_res))
    r_best = float(ritz_res[i0])
    tbar = np.zeros((k + 1, k))
    tbar[:k] = t
    tbar[k, k - 1] = beta
    best = (r_best, float(theta[i0]), s[:, i0])
    evals = 0
    svds = 0
    if r_best > 0 and k > 0:
        lo_b, hi_b = theta[0], theta[-1]
        offsets = np.linspace(-r_best, r_best, GRID_POINTS)
        lams = np.clip((theta[:, None] + offsets[None, :]).ravel(), lo_b, hi_b)
        g = _secular_min(theta, beta * u, lams)
        evals = len(lams)
        h = 2.0 * r_best / (GRID_POINTS - 1)
        order = np.argsort(g)
        picked: List[float] = []
        for idx in order:
            lam0 = lams[idx]
            if any(abs(lam0 - p) <= h for p in picked):
                continue
            picked.append(lam0)
            a_, b_ = max(lo_b, lam0 - h), min(hi_b, lam0 + h)
            if b_ > a_:
                opt = minimize_scalar(lambda lm: _sigma_exact(tbar, lm)[0], bounds=(a_, b_),
                                      method="bounded", options={"xatol": 1e-14 * max(1.0, abs(lam0))})
                lam_c = float(opt.x)
                svds += int(opt.nfev) + 1
            else:
                lam_c = float(lam0)
                svds += 1
            _, y = _sigma_exact(tbar, lam_c)
            rq = float(y @ t @ y)
            m = tbar @ y
            m[:k] -= rq * y
            res = float(np.linalg.norm(m))
            if res < best[0]:
                best = (res, rq, y)
            if len(picked) >= POLISH_CANDIDATES:
                break
    if ledger is not None:
        ledger.charge_combinatory(6 * k ** 3 + evals * SECULAR_ITERS * 3 * k + svds * 6 * k ** 3)
    res, lam, y = best
    return res, lam, y, r_best


def _krylov_eig(oracle: LinearOracle, b, eps: float, max_k: Optional[int], norm: Optional[float],
                ledger: Optional[CostLedger], method: str) -> EigReport:
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    n = oracle.dim
    ledger = CostLedger() if ledger is None else ledger
    bu, _ = _prepare_rhs(b, n, ledger)
    max_k = n if max_k is None else min(int(max_k), n)
    norm = oracle.norm_hint if norm is None else norm
    lz = Lanczos(oracle, bu, ledger, max_k=max_k)
    history: List[float] = []
    ritz_history: List[float] = []
    pair = None
    converged = False
    est = 0.0
    while lz.k < max_k:
        lz.step()
        beta = 0.0 if lz.breakdown else lz.beta[-1]
        t = lz.tridiagonal()
        if method == "gmr":
            res, lam, y, ritz = gmr_projected(t, beta, ledger)
        else:
            theta, s = np.linalg.eigh(t)
            rr = np.abs(beta * s[-1, :])
            i0 = int(np.argmin(rr))
            res, lam, y, ritz = float(rr[i0]), float(theta[i0]), s[:, i0], float(rr[i0])
            ledger.charge_combinatory(6 * lz.k ** 3)
        if norm is None:
            est = max(est, float(np.max(np.abs(scipy.linalg.eigvalsh_tridiagonal(
                np.array(lz.alpha), np.array(lz.beta[: lz.k - 1]))))))
        scale = norm if norm is not None else est
        scale = scale if scale > 0 else 1.0
        history.append(res / scale)
        ritz_history.append(ritz / scale)
        pair = (y, lam, res / scale)
        if res / scale <= eps:
            converged = True
            break
        if lz.breakdown:
            break
    y, lam, scaled = pair
    x = y @ lz.basis
    ledger.charge_combinatory(lz.k * n)
    nx = np.linalg.norm(x)
    if not converged:
        warnings.warn(f"{method}: scaled residual {scaled:.3e} > eps={eps:g} after {lz.k} steps",
                      NotConverged, stacklevel=3)
    return EigReport(EigPair(x / nx, lam, scaled), lz.k, ledger, converged, history, ritz_history,
                     norm if norm is not None else est)


def gmr_eig(oracle: LinearOracle, b, eps: float, max_k: Optional[int] = None,
            norm: Optional[float] = None, ledger: Optional[CostLedger] = None) -> EigReport:
    """Generalized minimal residual for the unspecified eigenpair problem.

    Stops at the first k where min ||Ax - lam x|| over the k-th Krylov
    subspace is <= eps * ||A||. ``||A||`` is ``norm``, else the oracle's
    ``norm_hint``, else the largest |Ritz value| seen so far.
    """
    return _krylov_eig(oracle, b, eps, max_k, norm, ledger, "gmr")


def lanczos_ritz_eig(oracle: LinearOracle, b, eps: float, max_k: Optional[int] = None,
                     norm: Optional[float] = None, ledger: Optional[CostLedger] = None) -> EigReport:
    """Lanczos with the Ritz-pair test: stop once some Ritz pair has
    residual beta_{k+1} |s_k| <= eps * ||A||."""
    return _krylov_eig(oracle, b, eps, max_k, norm, ledger, "ritz")


# ---------------------------------------------------------------------------
# largest eigenvalue from a random start


@dataclass
class TrialSummary:
    estimates: np.ndarray          # (trials,) estimate after the last step
    histories: np.ndarray          # (trials, k) estimate after each step
    breakdown_step: np.ndarray     # (trials,) step of invariant-subspace breakdown, 0 if none
    ledgers: List[CostLedger]

    @property
    def converged(self) -> np.ndarray:
        return self.breakdown_step > 0


def _starts(start, n: int) -> List[np.ndarray]:
    if isinstance(start, RandomStartSpec):
        return [start.vector(n, t) for t in range(start.num_trials)]
    arr = np.asarray(start, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    return [v / np.linalg.norm(v) for v in arr]


def lanczos_largest(oracle: LinearOracle, start: Union[RandomStartSpec, Sequence, np.ndarray],
                    k: int) -> TrialSummary:
    """Largest Ritz value after k Lanczos steps, per starting vector.

    ``start`` is a RandomStartSpec or explicit start vector(s). After a
    breakdown the estimate is exact for the invariant subspace and is held
    for the remaining steps.
    """
    if k < 1:
        raise ValueError("k must be positive")
    n = oracle.dim
    vecs = _starts(start, n)
    hist = np.zeros((len(vecs), k))
    brk = np.zeros(len(vecs), dtype=int)
    ledgers = []
    for t, b in enumerate(vecs):
        led = CostLedger()
        lz = Lanczos(oracle, b, led, max_k=min(k, n))
        for j in range(min(k, n)):
            lz.step()
            top = scipy.linalg.eigvalsh_tridiagonal(np.array(lz.alpha), np.array(lz.beta[: lz.k - 1]),
                                                    select="i", select_range=(lz.k - 1, lz.k - 1))[0]
            led.charge_combinatory(9 * lz.k)
            hist[t, j] = top if j == 0 else max(top, hist[t, j - 1])
            if lz.breakdown:
                brk[t] = lz.k
                hist[t, j + 1:] = hist[t, j]
                break
        else:
            if k > n:
                hist[t, n:] = hist[t, n - 1]
        ledgers.append(led)
    return TrialSummary(hist[:, -1].copy(), hist, brk, ledgers)


def power_largest(oracle: LinearOracle, start: Union[RandomStartSpec, Sequence, np.ndarray],
                  k: int) -> np.ndarray:
    """Rayleigh quotient of the k-th normalized power iterate A^k b, per start.

    Uses k + 1 matvecs: k to form the iterate and one for the quotient.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    out = []
    for b in _starts(start, oracle.dim):
        led = CostLedger()
        x = b
        for _ in range(k):
            y = oracle.apply(x, led)
            x = y / np.linalg.norm(y)
        out.append(float(x @ oracle.apply(x, led)))
    return np.array(out)


# ---------------------------------------------------------------------------
# impossibility of a preassigned eigenvalue


@dataclass
class AdversaryPair:
    """A2 = A1 + mu w w^T with w orthogonal to span{b, ..., A1^{k-1} b}.

    Both matrices give the same Krylov information [A b, ..., A^k b].
    """

    a1: np.ndarray
    a2: np.ndarray
    w: np.ndarray
    b: np.ndarray
    k: int
    mu: float

    def __iter__(self):
        yield self.a1
        yield self.a2

    def krylov_information(self, which: int) -> np.ndarray:
        a = self.a1 if which == 1 else self.a2
        out, v = [], self.b
        for _ in range(self.k):
            v = a @ v
            out.append(v)
        return np.array(out)

    @property
    def gap(self) -> float:
        return float(np.linalg.eigvalsh(self.a2)[-1] - np.linalg.eigvalsh(self.a1)[-1])


def _householder_to(b: np.ndarray) -> Optional[np.ndarray]:
    """Reflector P with P e1 = b, or None when b is already e1."""
    e1 = np.zeros_like(b)
    e1[0] = 1.0
    v = e1 - b
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return None
    v /= nv
    return np.eye(len(b)) - 2.0 * np.outer(v, v)


def adversary_pair(n: int, k: int, b, mu: float, seed: int = 0,
                   a1: Optional[np.ndarray] = None) -> AdversaryPair:
    """Two symmetric matrices indistinguishable from k Krylov matvecs whose
    largest eigenvalues differ by at least mu - 2||A1||.

    Without ``a1``, A1 = P J P^T with J a seeded random Jacobi matrix scaled to
    ||J|| = 1 and P a reflector sending e1 to b. In that basis the Krylov
    space is span{e1, ..., ek} and w lives on the trailing coordinates, so
    for b = e1 the two information vectors agree bit for bit. With a dense
    ``a1`` the shared information agrees only up to rounding, which the
    mu-sized direction amplifies roughly like mu^k.
    """
    if not 1 <= k:
        raise ValueError("k must be positive")
    if k >= n:
        raise FullKrylov(f"k={k} matvecs can span all of R^{n}; no hidden direction exists")
    b = np.asarray(b, dtype=float)
    b = b / np.linalg.norm(b)
    rng = np.random.default_rng([seed, 7])
    if a1 is None:
        diag = rng.uniform(-1.0, 1.0, n)
        off = rng.uniform(0.2, 1.0, n - 1)
        jac = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
        jac /= np.linalg.norm(jac, 2)
        tail = rng.standard_normal(n - k)
        w = np.concatenate([np.zeros(k), tail / np.linalg.norm(tail)])
        p = _householder_to(b)
        if p is not None:
            jac, w = p @ jac @ p, p @ w
        a1 = (jac + jac.T) / 2.0
    else:
        a1 = np.asarray(a1, dtype=float)
        q = explicit_krylov_basis(a1, b, k)
        w = rng.standard_normal(n)
        for _ in range(3):
            w = w - q @ (q.T @ w)
            w = w / np.linalg.norm(w)
    a2 = a1 + mu * np.outer(w, w)
    a2 = (a2 + a2.T) / 2.0
    return AdversaryPair(a1, a2, w, b, k, float(mu))


def uniform_spectrum_instance(n: int, edge_power: float = 4.0, seed: Optional[int] = None):
    """Eigenvalues evenly spaced on [-1, 1] with start weights (1 - t^2)^edge_power.

    Weight at the spectrum edges lets the extreme Ritz pairs converge at the
    fast O(k^-2) edge rate; suppressing it leaves only interior resolution,
    which is what the worst case looks like. ``seed`` applies a random
    orthogonal similarity.
    """
    from ibclab.linear.instances import random_orthogonal

    lam = np.linspace(-1.0, 1.0, n)
    b = np.sqrt((1.0 - lam * lam) ** edge_power)
    if not np.any(b):
        b = np.ones(n)
    b = b / np.linalg.norm(b)
    q = random_orthogonal(n, seed) if seed is not None else None
    oracle = LinearOracle.from_diagonal(lam, q)
    return oracle, (q @ b if q is not None else b)


def lanczos_error_curve(n: int, ks: Sequence[int], trials: int, seed: int = 0) -> np.ndarray:
    """Mean relative error (lam_1 - estimate)/lam_1 of randomized Lanczos on
    diag(1..n)/n, one entry per k."""
    oracle = LinearOracle.from_diagonal(np.arange(1, n + 1) / n)
    summary = lanczos_largest(oracle, RandomStartSpec(seed, trials), max(ks))
    errs = 1.0 - summary.histories  # lam_1 = 1
    return np.array([errs[:, k - 1].mean() for k in ks])


def loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


def eig_complexity_band(eps: float, model: CostModel, n: int) -> ComplexityBand:
    """comp(eps) = a c / eps with a in [1/4, 1], valid for n > 1/eps."""
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    ok = n > 1.0 / eps
    if not ok:
        warnings.warn(f"n={n} <= 1/eps={1 / eps:g}: outside the regime of the band", RegimeViolation,
                      stacklevel=2)
    return ComplexityBand(0.25 * model.c / eps, model.c / eps, regime_ok=ok)
