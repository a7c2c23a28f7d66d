"""Black-box symmetric operators and the a-priori matrix classes."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import scipy.io
import scipy.sparse

from ibclab.core import CostLedger
from ibclab.errors import IoFailure, SymmetryViolation

SYMMETRY_TOL = 1e-10


@dataclass
class LinearOracle:
    """Operator of dimension ``dim`` reachable only through ``apply``.

    Every ``apply`` is one information operation, charged to the ledger passed
    in or, failing that, to the oracle's own ledger.
    """

    dim: int
    matvec: Callable[[np.ndarray], np.ndarray]
    norm_hint: Optional[float] = None
    ledger: CostLedger = field(default_factory=CostLedger)
    # known eigenvalues of generated instances; never read by solvers
    spectrum: Optional[np.ndarray] = field(default=None, repr=False)

    def apply(self, z: np.ndarray, ledger: Optional[CostLedger] = None) -> np.ndarray:
        (ledger if ledger is not None else self.ledger).charge_info(1)
        return np.asarray(self.matvec(z), dtype=float)

    def check_symmetry(self, seed: int = 0, probes: int = 3, tol: float = SYMMETRY_TOL) -> None:
        """Probe |<Az, w> - <z, Aw>| on random pairs.

        Instance validation, not part of any modeled computation, so the
        probes are not charged.
        """
        rng = np.random.default_rng(seed)
        for _ in range(probes):
            z = rng.standard_normal(self.dim)
            w = rng.standard_normal(self.dim)
            az = self.matvec(z)
            aw = self.matvec(w)
            gap = abs(az @ w - z @ aw)
            scale = np.linalg.norm(az) * np.linalg.norm(w) + np.linalg.norm(aw) * np.linalg.norm(z)
            if gap > tol * max(scale, np.finfo(float).tiny):
                raise SymmetryViolation(f"<Az,w> - <z,Aw> = {gap:.3e} (scale {scale:.3e})")

    def to_dense(self) -> np.ndarray:
        """Materialize the matrix column by column (test path, uncharged)."""
        eye = np.eye(self.dim)
        return np.column_stack([self.matvec(eye[:, j]) for j in range(self.dim)])

    @classmethod
    def from_matrix(cls, a, norm_hint: Optional[float] = None) -> "LinearOracle":
        if scipy.sparse.issparse(a):
            a = scipy.sparse.csr_matrix(a)
        else:
            a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        return cls(a.shape[0], lambda z: a @ z, norm_hint)

    @classmethod
    def from_diagonal(cls, d, q: Optional[np.ndarray] = None) -> "LinearOracle":
        """diag(d), or Q diag(d) Q^T when an orthogonal ``q`` is given."""
        d = np.asarray(d, dtype=float)
        hint = float(np.max(np.abs(d))) if d.size else 0.0
        if q is None:
            return cls(d.size, lambda z: d * z, hint, spectrum=d.copy())
        return cls(d.size, lambda z: q @ (d * (q.T @ z)), hint, spectrum=d.copy())


class ClassKind(str, enum.Enum):
    F1 = "F1"
    F2 = "F2"
    RHO = "Rho"


@dataclass(frozen=True)
class MatrixClassSpec:
    """F1(M): SPD with condition <= M.  F2(M): symmetric invertible with
    condition <= M.  Rho(rho): I - B with B symmetric, ||B|| <= rho < 1."""

    kind: ClassKind
    M: float = 1.0
    rho: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ClassKind(self.kind))
        if self.kind is ClassKind.RHO:
            if not 0 <= self.rho < 1:
                raise ValueError(f"rho must lie in [0, 1), got {self.rho}")
        elif not self.M >= 1:
            raise ValueError(f"M must be >= 1, got {self.M}")

    @classmethod
    def f1(cls, M: float) -> "MatrixClassSpec":
        return cls(ClassKind.F1, M=M)

    @classmethod
    def f2(cls, M: float) -> "MatrixClassSpec":
        return cls(ClassKind.F2, M=M)

    @classmethod
    def rho_class(cls, rho: float) -> "MatrixClassSpec":
        return cls(ClassKind.RHO, rho=rho)

    def contains(self, a: np.ndarray, tol: float = 1e-9) -> bool:
        """Membership test for an explicit matrix (dense path only)."""
        a = np.asarray(a, dtype=float)
        if not np.allclose(a, a.T, atol=tol * max(1.0, np.abs(a).max())):
            return False
        lam = np.linalg.eigvalsh(a)
        if self.kind is ClassKind.RHO:
            return float(np.max(np.abs(1.0 - lam))) <= self.rho + tol
        if self.kind is ClassKind.F1 and lam[0] <= 0:
            return False
        mags = np.abs(lam)
        if mags.min() == 0:
            return False
        return mags.max() / mags.min() <= self.M * (1 + tol)


def read_matrix_market(path, check: bool = True) -> LinearOracle:
    """Load an explicit symmetric matrix (coordinate or array format)."""
    try:
        a = scipy.io.mmread(str(path))
    except (OSError, ValueError) as exc:
        raise IoFailure(f"cannot read Matrix Market file {path}: {exc}") from exc
    if scipy.sparse.issparse(a):
        a = scipy.sparse.csr_matrix(a, dtype=float)
    oracle = LinearOracle.from_matrix(a)
    if check:
        oracle.check_symmetry()
    return oracle


def write_matrix_market(path, a, comment: str = "") -> Path:
    """Write a symmetric matrix to exactly ``path`` (no extension is added)."""
    path = Path(path)
    a = a if scipy.sparse.issparse(a) else scipy.sparse.coo_matrix(np.asarray(a, dtype=float))
    try:
        with open(path, "wb") as fh:
            scipy.io.mmwrite(fh, a, comment=comment, symmetry="symmetric")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return path


def spectral_norm(a: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvalsh(np.asarray(a, dtype=float))))) if len(a) else 0.0


def condition_number(a: np.ndarray) -> float:
    mags = np.abs(np.linalg.eigvalsh(np.asarray(a, dtype=float)))
    return math.inf if mags.min() == 0 else float(mags.max() / mags.min())
