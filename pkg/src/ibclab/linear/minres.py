"""Minimal residual (mr) iteration: Lanczos plus Givens least squares.

Per-step combinatory count (multiply-add convention, see ``ibclab.core``):

    normalize next Lanczos vector      n + 1   (skipped on the last step)
    subtract beta * previous vector    n       (skipped on the first step)
    alpha = <v, Av>; w -= alpha v      2n
    beta = ||w||                       n + 1
    Givens update of the tridiagonal   13, plus 1 comparison

and at termination 3k for the banded back-substitution and kn for
x = V y. Total 6kn - 2n - 1 + 19k, below 10kn whenever n >= 5.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ibclab.core import CostLedger
from ibclab.errors import NotConverged, ZeroRhs
from ibclab.lanczos import KrylovTrace, Lanczos
from ibclab.operators import LinearOracle

REFRESH_EVERY = 10
GIVENS_OPS = 14
BACKSUB_OPS = 3


@dataclass
class SolveReport:
    x: np.ndarray
    steps: int
    final_residual: Optional[float]
    ledger: CostLedger
    converged: bool = True
    trace: Optional[KrylovTrace] = None
    residual_bound: Optional[float] = None
    b_norm: float = 1.0
    flags: Tuple[str, ...] = ()

    @property
    def residual_history(self) -> List[float]:
        return [] if self.trace is None else self.trace.residual_history


def _prepare_rhs(b, n: int, ledger: CostLedger):
    b = np.asarray(b, dtype=float)
    if b.shape != (n,):
        raise ValueError(f"rhs has shape {b.shape}, operator dimension is {n}")
    nb = float(np.linalg.norm(b))
    if nb == 0.0:
        raise ZeroRhs("right-hand side is zero")
    if abs(nb - 1.0) > 1e-14:
        ledger.charge_combinatory(2 * n + 2)
        return b / nb, nb
    return b, nb


class _GivensLS:
    """Incremental QR of the (k+1) x k Lanczos tridiagonal by plane rotations."""

    def __init__(self, beta0: float = 1.0):
        self.cs: List[Tuple[float, float]] = []
        self.gamma: List[float] = []
        self.delta: List[float] = []
        self.epsln: List[float] = []
        self.rhs: List[float] = []
        self.phi = beta0

    def push(self, beta_k: float, alpha_k: float, beta_next: float) -> float:
        c2, s2 = self.cs[-2] if len(self.cs) >= 2 else (1.0, 0.0)
        c1, s1 = self.cs[-1] if self.cs else (1.0, 0.0)
        eps_k = s2 * beta_k
        dtil = c2 * beta_k
        delta_k = c1 * dtil + s1 * alpha_k
        gtil = -s1 * dtil + c1 * alpha_k
        gamma = math.hypot(gtil, beta_next)
        if gamma == 0.0:
            c, s = 1.0, 0.0
        else:
            c, s = gtil / gamma, beta_next / gamma
        self.cs.append((c, s))
        self.gamma.append(gamma)
        self.delta.append(delta_k)
        self.epsln.append(eps_k)
        self.rhs.append(c * self.phi)
        self.phi = -s * self.phi
        return abs(self.phi)

    def solve(self, tbar: np.ndarray) -> np.ndarray:
        k = len(self.gamma)
        y = np.zeros(k)
        if min(self.gamma, default=1.0) == 0.0:
            # singular projected matrix: fall back to dense least squares
            rhs = np.zeros(k + 1)
            rhs[0] = 1.0
            return np.linalg.lstsq(tbar, rhs, rcond=None)[0]
        for i in range(k - 1, -1, -1):
            acc = self.rhs[i]
            if i + 1 < k:
                acc -= self.delta[i + 1] * y[i + 1]
            if i + 2 < k:
                acc -= self.epsln[i + 2] * y[i + 2]
            y[i] = acc / self.gamma[i]
        return y


def minres_solve(oracle: LinearOracle, b, eps: float, max_k: Optional[int] = None,
                 ledger: Optional[CostLedger] = None, reorthogonalize: bool = True) -> SolveReport:
    """Solve Ax = b to residual <= eps by residual minimization over Krylov subspaces.

    ``b`` is normalized when needed and ``eps`` applies to the normalized
    system; the returned ``x`` solves the caller's system and
    ``final_residual`` is ||Ax - b|| for the caller's ``b``.

    Stops at the first k whose residual is <= eps. The recurrence estimate is
    checked against a directly formed residual every ``REFRESH_EVERY`` steps and
    whenever it claims convergence.
    """
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    n = oracle.dim
    ledger = CostLedger() if ledger is None else ledger
    bu, nb = _prepare_rhs(b, n, ledger)
    max_k = n if max_k is None else min(int(max_k), n)
    if max_k < 1:
        raise ValueError("max_k must be positive")

    lz = Lanczos(oracle, bu, ledger, max_k=max_k, reorthogonalize=reorthogonalize)
    ls = _GivensLS()
    history = [1.0]
    scale = 1.0
    converged = False
    last_refresh = 0
    while lz.k < max_k:
        beta_k = lz.beta[-1] if lz.k else 0.0
        a, beta_next = lz.step()
        est = ls.push(beta_k, a, 0.0 if lz.breakdown else beta_next)
        ledger.charge_combinatory(GIVENS_OPS)
        res = min(history[-1], est * scale)
        k = lz.k
        if (res <= eps or k - last_refresh >= REFRESH_EVERY) and est > 0:
            direct = _direct_residual(lz, ls, bu, ledger)
            scale = direct / est
            res = min(history[-1], direct)
            last_refresh = k
        history.append(res)
        if res <= eps:
            converged = True
            break
        if lz.breakdown:
            break

    k = lz.k
    trace = lz.trace(bu, history)
    tbar = trace.extended_tridiagonal()
    y = ls.solve(tbar)
    ledger.charge_combinatory(BACKSUB_OPS * k + k * n)
    x = (y @ lz.basis) * nb
    flags: Tuple[str, ...] = ()
    if not converged:
        flags = ("not-converged",)
        warnings.warn(f"mr residual {history[-1]:.3e} > eps={eps:g} after {k} steps", NotConverged,
                      stacklevel=2)
    return SolveReport(x=x, steps=k, final_residual=history[-1] * nb, ledger=ledger,
                       converged=converged, trace=trace, b_norm=nb, flags=flags)


def _direct_residual(lz: Lanczos, ls: _GivensLS, b: np.ndarray, ledger: CostLedger) -> float:
    """||b - A x_k|| formed from A V_k = V_{k+1} Tbar_k (no extra matvec)."""
    k, n = lz.k, lz.n
    tbar = np.zeros((k + 1, k))
    tbar[:k, :] = lz.tridiagonal()
    tbar[k, k - 1] = 0.0 if lz.breakdown else lz.beta[-1]
    y = ls.solve(tbar)
    ty = tbar @ y
    r = b - ty[:k] @ lz.basis
    nxt = lz.next_vector()
    if nxt is not None:
        r = r - ty[k] * nxt
    ledger.charge_stabilization(3 * k + (k + 1) * n + 2 * n)
    return float(np.linalg.norm(r))
