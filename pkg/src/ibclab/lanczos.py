"""Lanczos tridiagonalization under matrix-vector information.

Shared by the linear solver and the eigenpair routines. Full
reorthogonalization keeps the basis orthonormal to working precision; its
arithmetic goes to the ledger's stabilization tally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ibclab.core import CostLedger
from ibclab.errors import SymmetryViolation
from ibclab.operators import LinearOracle

BREAKDOWN_TOL = 1e-11
COUPLING_TOL = 1e-8


@dataclass
class KrylovTrace:
    """Stabilized record of [b, Ab, ..., A^k b].

    ``basis`` rows are the Lanczos vectors, ``alpha``/``beta`` the diagonal and
    off-diagonal of the projected tridiagonal (``beta[j]`` couples basis j and
    j+1, so ``beta`` may be one longer than the basis when the next vector was
    never formed). ``residual_history[k]`` is the minimal residual over the
    k-th Krylov subspace; entry 0 is ||b|| = 1.
    """

    b: np.ndarray
    basis: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    residual_history: List[float] = field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.alpha)

    def tridiagonal(self, k: Optional[int] = None) -> np.ndarray:
        k = self.steps if k is None else k
        t = np.diag(self.alpha[:k])
        off = self.beta[: k - 1]
        return t + np.diag(off, 1) + np.diag(off, -1)

    def extended_tridiagonal(self, k: Optional[int] = None) -> np.ndarray:
        """The (k+1) x k matrix with A V_k = V_{k+1} T."""
        k = self.steps if k is None else k
        t = np.zeros((k + 1, k))
        t[:k, :] = self.tridiagonal(k)
        t[k, k - 1] = self.beta[k - 1]
        return t

    def orthogonality_loss(self) -> float:
        v = self.basis
        return float(np.max(np.abs(v @ v.T - np.eye(len(v))))) if len(v) else 0.0


class Lanczos:
    """Incremental Lanczos process on a symmetric oracle.

    Each ``step`` spends one matvec and returns (alpha_k, beta_{k+1}). The
    normalization of the next vector is deferred until the following step, so
    a process that stops never pays for a vector it does not use.
    """

    def __init__(self, oracle: LinearOracle, b: np.ndarray, ledger: CostLedger,
                 max_k: Optional[int] = None, reorthogonalize: bool = True,
                 check_coupling: bool = True):
        self.oracle = oracle
        self.n = oracle.dim
        self.ledger = ledger
        self.reorthogonalize = reorthogonalize
        self.check_coupling = check_coupling
        cap = self.n if max_k is None else min(max_k, self.n)
        self._V = np.zeros((cap + 1, self.n))
        self._V[0] = b
        self.k = 0
        self.alpha: List[float] = []
        self.beta: List[float] = []
        self.breakdown = False
        self._w: Optional[np.ndarray] = None
        self._scale = 0.0

    @property
    def basis(self) -> np.ndarray:
        return self._V[: self.k]

    def step(self):
        n, k = self.n, self.k
        led = self.ledger
        if self.breakdown:
            raise RuntimeError("Lanczos step after breakdown")
        if self._w is not None:
            beta = self.beta[-1]
            self._V[k] = self._w * (1.0 / beta)
            led.charge_combinatory(n + 1)
        v = self._V[k]
        w = self.oracle.apply(v, led)
        if k > 0:
            w = w - self.beta[-1] * self._V[k - 1]
            led.charge_combinatory(n)
        a = float(v @ w)
        w = w - a * v
        led.charge_combinatory(2 * n)
        if self.reorthogonalize:
            vk = self._V[: k + 1]
            coef = vk @ w
            if self.check_coupling and k > 0:
                ref = np.linalg.norm(w) + abs(a) + (self.beta[-1] if k else 0.0)
                if np.max(np.abs(coef)) > COUPLING_TOL * max(ref, np.finfo(float).tiny):
                    raise SymmetryViolation(
                        f"Lanczos coupling {np.max(np.abs(coef)):.3e} at step {k + 1}: operator is not symmetric")
            w = w - coef @ vk
            w = w - (vk @ w) @ vk
            led.charge_stabilization(4 * (k + 1) * n + 2 * n)
        beta = float(np.linalg.norm(w))
        led.charge_combinatory(n + 1)
        self.alpha.append(a)
        self.beta.append(beta)
        self._scale = max(self._scale, abs(a), beta)
        self.k = k + 1
        self._w = w
        if beta <= BREAKDOWN_TOL * max(self._scale, np.finfo(float).tiny) or self.k >= self.n:
            self.breakdown = True
        return a, beta

    def next_vector(self) -> Optional[np.ndarray]:
        """The normalized (k+1)-th vector, or None after breakdown (uncharged)."""
        if self._w is None or self.breakdown:
            return None
        return self._w / self.beta[-1]

    def tridiagonal(self) -> np.ndarray:
        k = self.k
        return np.diag(self.alpha) + np.diag(self.beta[: k - 1], 1) + np.diag(self.beta[: k - 1], -1)

    def trace(self, b: np.ndarray, residual_history=None) -> KrylovTrace:
        return KrylovTrace(
            b=b,
            basis=self.basis.copy(),
            alpha=np.array(self.alpha),
            beta=np.array(self.beta),
            residual_history=list(residual_history or []),
        )
