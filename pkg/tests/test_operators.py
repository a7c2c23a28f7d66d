import numpy as np
import pytest
import scipy.sparse

from ibclab.core import CostLedger
from ibclab.errors import IoFailure, SymmetryViolation
from ibclab.lanczos import Lanczos
from ibclab.linear import random_symmetric, random_unit_vector
from ibclab.operators import (
    LinearOracle,
    MatrixClassSpec,
    condition_number,
    read_matrix_market,
    write_matrix_market,
)


def test_apply_charges_info():
    led = CostLedger()
    oracle = LinearOracle.from_matrix(np.eye(3))
    oracle.apply(np.ones(3), led)
    oracle.apply(np.ones(3), led)
    assert led.info_count == 2 and oracle.ledger.info_count == 0


def test_symmetry_probe():
    LinearOracle.from_matrix(random_symmetric(10, 1)).check_symmetry()
    with pytest.raises(SymmetryViolation):
        LinearOracle.from_matrix(np.triu(np.ones((10, 10)))).check_symmetry()


def test_from_diagonal_rotated():
    q = np.linalg.qr(np.random.default_rng(0).standard_normal((5, 5)))[0]
    oracle = LinearOracle.from_diagonal([1.0, 2.0, 3.0, 4.0, 5.0], q)
    assert np.allclose(np.linalg.eigvalsh(oracle.to_dense()), [1, 2, 3, 4, 5])


def test_class_membership():
    assert MatrixClassSpec.f1(4.0).contains(np.diag([1.0, 4.0]))
    assert not MatrixClassSpec.f1(4.0).contains(np.diag([-1.0, 4.0]))
    assert MatrixClassSpec.f2(4.0).contains(np.diag([-1.0, 4.0]))
    assert MatrixClassSpec.rho_class(0.5).contains(np.diag([0.5, 1.5]))
    assert not MatrixClassSpec.rho_class(0.5).contains(np.diag([0.4, 1.0]))


def test_class_validation():
    with pytest.raises(ValueError):
        MatrixClassSpec.f1(0.5)
    with pytest.raises(ValueError):
        MatrixClassSpec.rho_class(1.0)


def test_condition_number():
    assert condition_number(np.diag([-2.0, 1.0, 4.0])) == 4.0


@pytest.mark.parametrize("sparse", [False, True])
def test_matrix_market_round_trip(tmp_path, sparse):
    a = random_symmetric(12, 3)
    if sparse:
        a = scipy.sparse.csr_matrix(np.where(np.abs(a) > 0.05, a, 0.0))
    path = write_matrix_market(tmp_path / "a.mtx", a, comment="test")
    assert path == tmp_path / "a.mtx"
    back = read_matrix_market(path).to_dense()
    dense = a.toarray() if sparse else a
    assert np.allclose(back, dense, atol=1e-15)


def test_matrix_market_missing(tmp_path):
    with pytest.raises(IoFailure):
        read_matrix_market(tmp_path / "none.mtx")


def test_lanczos_orthonormal_basis():
    a = random_symmetric(40, 2)
    lz = Lanczos(LinearOracle.from_matrix(a), random_unit_vector(40, 2), CostLedger(), max_k=25)
    for _ in range(25):
        lz.step()
    trace = lz.trace(random_unit_vector(40, 2))
    assert trace.orthogonality_loss() < 1e-13
    v = trace.basis[:25].T
    assert np.allclose(v.T @ a @ v, trace.tridiagonal(25), atol=1e-13)


def test_lanczos_breakdown_on_invariant_start():
    lz = Lanczos(LinearOracle.from_diagonal([1.0, 2.0, 3.0]), np.array([1.0, 0.0, 0.0]), CostLedger())
    lz.step()
    assert lz.breakdown
