import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ibclab.core import CostModel
from ibclab.eig import (
    RandomStartSpec,
    adversary_pair,
    eig_complexity_band,
    gmr_eig,
    gmr_projected,
    lanczos_largest,
    lanczos_ritz_eig,
    loglog_slope,
    power_largest,
    trial_start_vector,
    uniform_spectrum_instance,
)
from ibclab.errors import FullKrylov, RegimeViolation
from ibclab.linear import random_symmetric, random_unit_vector
from ibclab.operators import LinearOracle
from oracles import dense_gmr_min, min_ritz_residual


def _e1(n):
    v = np.zeros(n)
    v[0] = 1.0
    return v


def test_gmr_scaled_identity():
    rep = gmr_eig(LinearOracle.from_matrix(3.0 * np.eye(6)), random_unit_vector(6, 0), 1e-10)
    assert rep.steps == 1
    assert rep.pair.lam == pytest.approx(3.0)
    assert rep.pair.scaled_residual == pytest.approx(0.0, abs=1e-14)


def test_gmr_invariant_subspace():
    rep = gmr_eig(LinearOracle.from_diagonal([1.0, -1.0]), _e1(2), 1e-10)
    assert rep.steps == 1
    assert rep.pair.lam == pytest.approx(1.0)
    assert np.allclose(np.abs(rep.pair.x), [1.0, 0.0])


def test_gmr_against_dense_oracle():
    a = random_symmetric(30, seed=7)
    b = random_unit_vector(30, 7)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = gmr_eig(LinearOracle.from_matrix(a), b, 1e-12, max_k=5, norm=1.0)
    assert rep.residual_history[4] <= min_ritz_residual(a, b, 5) + 1e-12
    assert rep.residual_history[4] == pytest.approx(dense_gmr_min(a, b, 5), abs=1e-6)


def test_pair_recompute_consistent():
    a = random_symmetric(25, seed=2)
    rep = gmr_eig(LinearOracle.from_matrix(a), random_unit_vector(25, 2), 0.05, norm=1.0)
    assert rep.converged
    assert rep.pair.recompute(a, 1.0) == pytest.approx(rep.pair.scaled_residual, abs=1e-10)
    assert rep.pair.recompute(a, 1.0) <= 0.05 + 1e-12


def test_gmr_projected_with_zero_beta():
    t = np.diag([2.0, -1.0])
    res, lam, y, ritz = gmr_projected(t, 0.0)
    assert res == pytest.approx(0.0, abs=1e-15)
    assert lam in (2.0, -1.0)


def test_gmr_stops_no_later_than_ritz():
    for seed in range(5):
        a = random_symmetric(30, seed=seed)
        b = random_unit_vector(30, seed)
        g = gmr_eig(LinearOracle.from_matrix(a), b, 0.05, norm=1.0)
        r = lanczos_ritz_eig(LinearOracle.from_matrix(a), b, 0.05, norm=1.0)
        assert g.steps <= r.steps


def test_uniform_instance_steps_frozen():
    oracle, b = uniform_spectrum_instance(2000)
    assert gmr_eig(oracle, b, 0.1, norm=1.0).steps == 7


def test_lanczos_identity():
    summary = lanczos_largest(LinearOracle.from_matrix(np.eye(5)), RandomStartSpec(0, 4), 1)
    assert summary.estimates == pytest.approx(np.ones(4), abs=4e-16)


def test_lanczos_full_space():
    est = lanczos_largest(LinearOracle.from_diagonal([2.0, 1.0]), np.ones(2) / math.sqrt(2), 2).estimates
    assert est[0] == pytest.approx(2.0, abs=1e-15)


def test_power_closed_form():
    est = power_largest(LinearOracle.from_diagonal([2.0, 1.0]), np.ones(2) / math.sqrt(2), 3)
    assert est[0] == pytest.approx(129 / 65, rel=1e-15)


def test_power_scaled_identity():
    assert power_largest(LinearOracle.from_matrix(4.0 * np.eye(3)), RandomStartSpec(1, 3), 1) == \
        pytest.approx([4.0] * 3)


def test_lanczos_beats_power_at_equal_information():
    # power with k iterations reads k + 1 matvecs, Lanczos with k + 1 steps reads k + 1
    a = random_symmetric(40, seed=3)
    oracle = LinearOracle.from_matrix(a)
    spec = RandomStartSpec(5, 20)
    for k in (1, 3, 8):
        lz = lanczos_largest(oracle, spec, k + 1).estimates
        pw = power_largest(oracle, spec, k)
        assert np.all(lz >= pw - 1e-12)


def test_lanczos_below_power_possible_at_equal_k():
    lz = lanczos_largest(LinearOracle.from_diagonal([2.0, 1.0]), np.array([1.0, 2.0]) / math.sqrt(5), 1)
    pw = power_largest(LinearOracle.from_diagonal([2.0, 1.0]), np.array([1.0, 2.0]) / math.sqrt(5), 1)
    assert lz.estimates[0] < pw[0]


def test_start_vectors_reproducible():
    assert np.array_equal(trial_start_vector(10, 3, 2), RandomStartSpec(3, 5).vector(10, 2))
    assert not np.array_equal(trial_start_vector(10, 3, 2), trial_start_vector(10, 3, 1))


def test_adversary_two_by_two():
    a1, a2 = adversary_pair(2, 1, _e1(2), 5.0, a1=np.eye(2))
    assert np.allclose(a2, np.diag([1.0, 6.0]))
    assert np.linalg.eigvalsh(a2)[-1] == pytest.approx(6.0)


@pytest.mark.parametrize("n", [2, 6, 20])
def test_adversary_same_information(n):
    k = n - 1
    pair = adversary_pair(n, k, _e1(n), 10.0, seed=4)
    assert np.max(np.abs(pair.krylov_information(1) - pair.krylov_information(2))) <= 1e-12
    assert pair.gap >= 10.0 - 2.0
    e1 = lanczos_largest(LinearOracle.from_matrix(pair.a1), pair.b, k).estimates
    e2 = lanczos_largest(LinearOracle.from_matrix(pair.a2), pair.b, k).estimates
    assert e1[0] == e2[0]


def test_adversary_general_start():
    pair = adversary_pair(6, 3, random_unit_vector(6, 1), 10.0, seed=4)
    assert np.max(np.abs(pair.krylov_information(1) - pair.krylov_information(2))) <= 1e-12
    assert pair.gap >= 8.0
    assert abs(pair.w @ pair.b) < 1e-15


def test_adversary_reproducible():
    p1 = adversary_pair(8, 4, _e1(8), 3.0, seed=9)
    p2 = adversary_pair(8, 4, _e1(8), 3.0, seed=9)
    assert np.array_equal(p1.a2, p2.a2)


def test_adversary_full_krylov():
    with pytest.raises(FullKrylov):
        adversary_pair(4, 4, _e1(4), 1.0)


def test_eig_band_frozen():
    band = eig_complexity_band(0.01, CostModel(1e6), 1000)
    assert (band.lower, band.upper) == (2.5e7, 1e8)
    band1 = eig_complexity_band(1.0, CostModel(8.0), 10)
    assert (band1.lower, band1.upper) == (2.0, 8.0)


def test_eig_band_regime_warning():
    with pytest.warns(RegimeViolation):
        band = eig_complexity_band(0.01, CostModel(1.0), 50)
    assert not band.regime_ok


def test_loglog_slope_exact():
    k = np.array([10.0, 20.0, 40.0])
    assert loglog_slope(k, 3.0 * k ** -2) == pytest.approx(-2.0)


@settings(max_examples=15, deadline=None)
@given(st.integers(4, 25), st.integers(0, 10 ** 6), st.integers(1, 4))
def test_gmr_never_above_best_ritz(n, seed, k):
    a = random_symmetric(n, seed)
    b = random_unit_vector(n, seed + 1)
    k = min(k, n - 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = gmr_eig(LinearOracle.from_matrix(a), b, 1e-300, max_k=k, norm=1.0)
    for j, r in enumerate(rep.residual_history, start=1):
        assert r <= min_ritz_residual(a, b, j) + 1e-10
