"""Closed-form cardinality numbers and complexity bands for F1 and F2."""

from __future__ import annotations

import math
import warnings

from ibclab.core import ComplexityBand, CostModel
from ibclab.errors import RegimeViolation, UnsupportedClass
from ibclab.operators import ClassKind, MatrixClassSpec


def _accuracy_log(eps: float) -> float:
    # arccosh(1/eps), written as in the closed form
    return math.log((1.0 + math.sqrt(1.0 - eps * eps)) / eps)


def _check(eps: float, M: float, n: int) -> None:
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    if not M >= 1:
        raise ValueError(f"M must be >= 1, got {M}")
    if n < 1:
        raise ValueError("n must be positive")


def _steps(eps: float, ratio: float) -> int:
    # ceil(arccosh(1/eps) / ln ratio); ratio -> inf as M -> 1 and the count
    # bottoms out at one step, never zero, since eps < 1 here
    if not math.isfinite(ratio) or ratio <= 1.0:
        return 1
    return max(1, math.ceil(_accuracy_log(eps) / math.log(ratio)))


def _ratio(x: float) -> float:
    return (x + 1.0) / (x - 1.0) if x > 1.0 else math.inf


def cardinality_F1(eps: float, M: float, n: int) -> int:
    """Krylov steps the mr algorithm needs on SPD matrices with condition <= M."""
    _check(eps, M, n)
    if eps >= 1:
        return 0
    return min(n, _steps(eps, _ratio(math.sqrt(M))))


def cardinality_F2(eps: float, M: float, n: int) -> int:
    """Same for symmetric indefinite matrices; always an even count below n."""
    _check(eps, M, n)
    if eps >= 1:
        return 0
    return min(n, 2 * _steps(eps, _ratio(M)))


def cardinality_F1_asymptotic(eps: float, M: float) -> float:
    return math.sqrt(M) / 2.0 * math.log(2.0 / eps)


def cardinality_F2_asymptotic(eps: float, M: float) -> float:
    return M * math.log(2.0 / eps)


def cardinality(cls: MatrixClassSpec, eps: float, n: int) -> int:
    if cls.kind is ClassKind.F1:
        return cardinality_F1(eps, cls.M, n)
    if cls.kind is ClassKind.F2:
        return cardinality_F2(eps, cls.M, n)
    raise UnsupportedClass("no closed-form cardinality for the Rho class")


def positive_definiteness_gain(eps: float, M: float, n: int) -> float:
    """Ratio cardinality_F1 / cardinality_F2, predicted ~ 1 / (2 sqrt(M)).

    Warns with RegimeViolation when n <= 2 M ln(2/eps) + 3, where the
    asymptotic prediction is not expected to hold.
    """
    f1 = cardinality_F1(eps, M, n)
    f2 = cardinality_F2(eps, M, n)
    if n <= 2.0 * M * math.log(2.0 / eps) + 3.0:
        warnings.warn(f"n={n} is outside the regime n > 2M ln(2/eps) + 3", RegimeViolation,
                      stacklevel=2)
    if f2 == 0:
        return 1.0
    return f1 / f2


def predicted_gain(M: float) -> float:
    return 1.0 / (2.0 * math.sqrt(M))


def complexity_band_linear(eps: float, cls: MatrixClassSpec, model: CostModel, n: int) -> ComplexityBand:
    """comp(eps) = c * a * m with a in [0.5 - 1/m, 1 + 10n/c].

    When m <= (n - 3)/2 the lower factor tightens to 1 - 1/m. The lower end is
    clamped at zero (for m = 1 the factor 0.5 - 1/m is negative).
    """
    m = cardinality(cls, eps, n)
    if m == 0:
        return ComplexityBand(0.0, 0.0)
    tight = m <= (n - 3) / 2.0
    lo_factor = (1.0 - 1.0 / m) if tight else (0.5 - 1.0 / m)
    hi_factor = 1.0 + 10.0 * n / model.c
    return ComplexityBand(max(0.0, model.c * lo_factor * m), model.c * hi_factor * m)
