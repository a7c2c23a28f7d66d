"""Matrix-free laboratory for information-based complexity of Krylov methods."""

from ibclab.core import (
    ComplexityBand,
    CostLedger,
    CostModel,
    Setting,
    ToleranceSpec,
    complexity_band_generic,
    ledger_charge_info,
)
from ibclab.errors import (
    ClassPromiseUnchecked,
    DegenerateKrylov,
    InvalidSpec,
    IoFailure,
    NotConverged,
    RegimeViolation,
    SymmetryViolation,
    UnsolvableClass,
    UnsupportedClass,
    ZeroRhs,
)

__version__ = "0.1.0"

__all__ = [
    "ClassPromiseUnchecked",
    "ComplexityBand",
    "CostLedger",
    "CostModel",
    "DegenerateKrylov",
    "InvalidSpec",
    "IoFailure",
    "NotConverged",
    "RegimeViolation",
    "Setting",
    "SymmetryViolation",
    "ToleranceSpec",
    "UnsolvableClass",
    "UnsupportedClass",
    "ZeroRhs",
    "complexity_band_generic",
    "ledger_charge_info",
]
