"""Model of computation: cost ledger, tolerance settings, generic complexity bounds.

Information operations (one matrix-vector product, one function value) cost
``c`` each; combinatory operations cost one unit. A combinatory unit is one
multiply-add pair on reals, or one scalar division / square root / comparison.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass


@dataclass(frozen=True)
class CostModel:
    c: float
    combinatory_unit: float = 1.0

    def __post_init__(self):
        if not (self.c > 0) or math.isnan(self.c):
            raise ValueError(f"information cost must be positive, got {self.c}")
        if self.combinatory_unit != 1.0:
            raise ValueError("combinatory operations have unit cost")

    @classmethod
    def for_dimension(cls, n: int) -> "CostModel":
        # one sparse matvec ~ n work; override for dense or expensive operators
        return cls(c=float(n))


@dataclass
class CostLedger:
    """Running tally for a single computation.

    ``stabilization_count`` records floating-point safeguards (Lanczos
    reorthogonalization, periodic residual refresh). They are no-ops in exact
    arithmetic, so they sit outside the cost model and are never added to
    ``total``.
    """

    info_count: int = 0
    combinatory_count: int = 0
    stabilization_count: int = 0

    def charge_info(self, k: int = 1) -> "CostLedger":
        if k < 0:
            raise ValueError("counts are monotone")
        self.info_count += int(k)
        return self

    def charge_combinatory(self, k: int) -> "CostLedger":
        if k < 0:
            raise ValueError("counts are monotone")
        self.combinatory_count += int(k)
        return self

    def charge_stabilization(self, k: int) -> "CostLedger":
        if k < 0:
            raise ValueError("counts are monotone")
        self.stabilization_count += int(k)
        return self

    def total(self, model: CostModel) -> float:
        return model.c * self.info_count + self.combinatory_count

    def __add__(self, other: "CostLedger") -> "CostLedger":
        return CostLedger(
            self.info_count + other.info_count,
            self.combinatory_count + other.combinatory_count,
            self.stabilization_count + other.stabilization_count,
        )

    def as_dict(self) -> dict:
        return {
            "info_count": self.info_count,
            "combinatory_count": self.combinatory_count,
            "stabilization_count": self.stabilization_count,
        }


def ledger_charge_info(ledger: CostLedger, k: int) -> CostLedger:
    if k <= 0:
        raise ValueError("k must be positive")
    return ledger.charge_info(k)


class Setting(str, enum.Enum):
    WORST_CASE = "worst_case"
    RANDOMIZED_AVERAGE = "randomized_average"


@dataclass(frozen=True)
class ToleranceSpec:
    epsilon: float
    setting: Setting = Setting.WORST_CASE

    def __post_init__(self):
        if not (0 < self.epsilon <= 1):
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        object.__setattr__(self, "setting", Setting(self.setting))


@dataclass(frozen=True)
class ComplexityBand:
    """Interval [lower, upper] of cost units; ``regime_ok`` is False when the
    asymptotic assumptions behind the band were not met."""

    lower: float
    upper: float
    regime_ok: bool = True

    def __post_init__(self):
        if self.lower < 0 or not self.lower <= self.upper:
            raise ValueError(f"invalid band [{self.lower}, {self.upper}]")

    def __contains__(self, cost: float) -> bool:
        return self.lower <= cost <= self.upper

    @property
    def ratio(self) -> float:
        return self.upper / self.lower if self.lower > 0 else math.inf


def complexity_band_generic(m_eps: int, model: CostModel) -> ComplexityBand:
    """Bounds from the cardinality number: c*m <= comp <= (c+2)*m."""
    if m_eps < 0:
        raise ValueError("cardinality must be nonnegative")
    return ComplexityBand(model.c * m_eps, (model.c + 2) * m_eps)
