"""Large symmetric linear systems under matrix-vector information."""

from ibclab.linear.bruteforce import brute_force_min_residual, explicit_krylov_basis
from ibclab.linear.cardinality import (
    cardinality,
    cardinality_F1,
    cardinality_F1_asymptotic,
    cardinality_F2,
    cardinality_F2_asymptotic,
    complexity_band_linear,
    positive_definiteness_gain,
    predicted_gain,
)
from ibclab.linear.chebyshev import (
    chebyshev_residual_bound,
    chebyshev_solve,
    chebyshev_value,
    guaranteed_chebyshev_steps,
)
from ibclab.linear.instances import (
    chebyshev_extrema,
    gen_rho_instance,
    gen_worst_case_spectrum,
    random_orthogonal,
    random_symmetric,
    random_unit_vector,
)
from ibclab.linear.minres import SolveReport, minres_solve

__all__ = [
    "SolveReport",
    "brute_force_min_residual",
    "cardinality",
    "cardinality_F1",
    "cardinality_F1_asymptotic",
    "cardinality_F2",
    "cardinality_F2_asymptotic",
    "chebyshev_extrema",
    "chebyshev_residual_bound",
    "chebyshev_solve",
    "chebyshev_value",
    "complexity_band_linear",
    "explicit_krylov_basis",
    "gen_rho_instance",
    "gen_worst_case_spectrum",
    "guaranteed_chebyshev_steps",
    "minres_solve",
    "positive_definiteness_gain",
    "predicted_gain",
    "random_orthogonal",
    "random_symmetric",
    "random_unit_vector",
]
