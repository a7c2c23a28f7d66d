import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ibclab.errors import DegenerateKrylov, SymmetryViolation, UnsupportedClass, ZeroRhs
from ibclab.linear import (
    brute_force_min_residual,
    cardinality_F1,
    gen_worst_case_spectrum,
    minres_solve,
    random_symmetric,
    random_unit_vector,
)
from ibclab.linear.instances import chebyshev_extrema, random_orthogonal
from ibclab.operators import LinearOracle, MatrixClassSpec


def test_identity_one_step():
    n = 7
    b = np.zeros(n)
    b[0] = 1.0
    rep = minres_solve(LinearOracle.from_matrix(np.eye(n)), b, 1e-12)
    assert rep.steps == 1 and rep.converged
    assert np.allclose(rep.x, b)
    assert rep.final_residual == pytest.approx(0.0, abs=1e-15)


def test_three_distinct_eigenvalues():
    b = np.ones(3) / math.sqrt(3)
    rep = minres_solve(LinearOracle.from_diagonal([1.0, 2.0, 3.0]), b, 1e-12)
    assert rep.steps <= 3
    assert np.linalg.norm(np.diag([1.0, 2.0, 3.0]) @ rep.x - b) < 1e-12


def test_worst_case_f1_steps():
    oracle, b = gen_worst_case_spectrum(MatrixClassSpec.f1(100.0), 200, eps=0.01)
    rep = minres_solve(oracle, b, 0.01)
    assert abs(rep.steps - cardinality_F1(0.01, 100.0, 200)) <= 1


def test_history_matches_bruteforce():
    a = random_symmetric(30, seed=4)
    b = random_unit_vector(30, 11)
    with pytest.warns(Warning):
        rep = minres_solve(LinearOracle.from_matrix(a), b, 1e-14, max_k=12)
    for k in range(1, 13):
        assert rep.residual_history[k] == pytest.approx(brute_force_min_residual(a, b, k), abs=1e-10)


def test_history_starts_at_one():
    a = random_symmetric(10, seed=1)
    rep = minres_solve(LinearOracle.from_matrix(a), random_unit_vector(10, 2), 1e-3)
    assert rep.residual_history[0] == 1.0
    assert np.all(np.diff(rep.residual_history) <= 1e-14)


def test_ledger_matches_steps():
    a = random_symmetric(60, seed=3)
    rep = minres_solve(LinearOracle.from_matrix(a), random_unit_vector(60, 3), 1e-6)
    assert rep.ledger.info_count == rep.steps
    assert rep.ledger.combinatory_count <= 10 * rep.steps * 60


def test_rotation_invariance():
    cls = MatrixClassSpec.f1(100.0)
    o1, b1 = gen_worst_case_spectrum(cls, 200, seed=5, eps=0.01)
    o2, b2 = gen_worst_case_spectrum(cls, 200, seed=5, eps=0.01, rotate=True)
    h1 = minres_solve(o1, b1, 0.01).residual_history
    h2 = minres_solve(o2, b2, 0.01).residual_history
    assert len(h1) == len(h2)
    assert np.max(np.abs(np.subtract(h1, h2))) <= 1e-8


def test_nonsymmetric_rejected():
    a = np.triu(np.ones((6, 6)))
    with pytest.raises(SymmetryViolation):
        minres_solve(LinearOracle.from_matrix(a), np.ones(6) / math.sqrt(6), 1e-6)


def test_zero_rhs():
    with pytest.raises(ZeroRhs):
        minres_solve(LinearOracle.from_matrix(np.eye(3)), np.zeros(3), 0.1)


def test_unnormalized_rhs_scaled():
    a = random_symmetric(20, seed=8)
    b = random_unit_vector(20, 8)
    r1 = minres_solve(LinearOracle.from_matrix(a), b, 1e-8)
    r2 = minres_solve(LinearOracle.from_matrix(a), 3.0 * b, 1e-8)
    assert r1.steps == r2.steps
    assert np.allclose(3.0 * r1.x, r2.x)


def test_max_k_caps_steps():
    a = random_symmetric(40, seed=2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = minres_solve(LinearOracle.from_matrix(a), random_unit_vector(40, 2), 1e-12, max_k=5)
    assert rep.steps == 5 and not rep.converged


def test_bruteforce_identity():
    assert brute_force_min_residual(np.eye(4), random_unit_vector(4, 0), 1) == pytest.approx(0.0, abs=1e-15)


def test_bruteforce_scalar_scan():
    a = np.diag([1.0, 2.0])
    b = np.ones(2) / math.sqrt(2)
    ts = np.linspace(0.0, 2.0, 200001)
    scan = min(np.linalg.norm(np.outer(a @ b, ts) - b[:, None], axis=0))
    val = brute_force_min_residual(a, b, 1)
    assert val == pytest.approx(scan, abs=1e-9)
    # minimizer t = <Ab, b>/<Ab, Ab> = 5/6 -> residual 1/sqrt(10)
    assert val == pytest.approx(1.0 / math.sqrt(10.0), abs=1e-14)


def test_bruteforce_warns_on_degenerate_basis():
    with pytest.warns(DegenerateKrylov):
        brute_force_min_residual(np.eye(5), random_unit_vector(5, 1), 3)


def test_generator_m1_is_identity():
    oracle, b = gen_worst_case_spectrum(MatrixClassSpec.f1(1.0), 2, seed=0)
    assert np.allclose(oracle.to_dense(), np.eye(2))
    assert minres_solve(oracle, b, 1e-10).steps == 1


def test_generator_in_class():
    for cls in (MatrixClassSpec.f1(10.0), MatrixClassSpec.f2(10.0)):
        oracle, b = gen_worst_case_spectrum(cls, 40, seed=1, eps=0.01, rotate=True)
        assert cls.contains(oracle.to_dense())
        assert np.linalg.norm(b) == pytest.approx(1.0)


def test_generator_rejects_rho():
    with pytest.raises(UnsupportedClass):
        gen_worst_case_spectrum(MatrixClassSpec.rho_class(0.5), 10)


def test_chebyshev_extrema_frozen():
    assert np.allclose(chebyshev_extrema(2), [-1.0, 0.0, 1.0])


def test_random_orthogonal_is_orthogonal():
    q = random_orthogonal(15, 3)
    assert np.allclose(q.T @ q, np.eye(15), atol=1e-13)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 25), st.integers(0, 10 ** 6))
def test_minres_optimal_on_random_instances(n, seed):
    a = random_symmetric(n, seed)
    b = random_unit_vector(n, seed + 1)
    k = min(n, 6)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = minres_solve(LinearOracle.from_matrix(a), b, 1e-300, max_k=k)
        for j in range(1, rep.steps + 1):
            assert rep.residual_history[j] <= brute_force_min_residual(a, b, j) + 1e-8
