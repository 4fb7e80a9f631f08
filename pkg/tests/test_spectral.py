import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from outlierlab import spectral
from outlierlab.sampler import SeedSpec, make_distribution, sample_deformed_wigner, sample_erdos_renyi
from outlierlab.spectral import (
    THRESHOLD_C,
    NonConvergenceError,
    bbp_prediction,
    dense_extreme,
    extreme_eigenvalues,
    lambert_w0,
    predict_max_degree,
    predictor_ratio,
    rho,
    rho_g_predictor,
    row_norms_sq,
    seginer_ratio,
)

EXAMPLE_4x4 = np.array([
    [0.0, 1.0, -0.8, 0.0],
    [1.0, 0.0, 0.6, 0.5],
    [-0.8, 0.6, 0.0, 0.3],
    [0.0, 0.5, 0.3, 0.0],
])


def star(m):
    a = np.zeros((m + 1, m + 1))
    a[0, 1:] = a[1:, 0] = 1.0
    return a


def test_row_norms():
    assert np.allclose(row_norms_sq(np.array([[0, 1], [1, 0]])), [1, 1])
    assert np.all(row_norms_sq(np.zeros((3, 3))) == 0)
    assert np.allclose(row_norms_sq(EXAMPLE_4x4), [1.64, 1.61, 1.09, 0.34])
    assert np.allclose(row_norms_sq(sp.csr_matrix(EXAMPLE_4x4)), [1.64, 1.61, 1.09, 0.34])


@pytest.mark.parametrize("row_sq,np_,theta,value", [(500, 100, 20, 25), (150, 100, 10, 20), (200, 100, 10, 20)])
def test_rho_values(row_sq, np_, theta, value):
    r = rho(row_sq, np_)
    assert r.theta == pytest.approx(theta)
    assert r.rho == pytest.approx(value)


def test_rho_rejects_bad_input():
    with pytest.raises(ValueError):
        rho(1.0, 0.0)
    with pytest.raises(ValueError):
        rho(-1.0, 1.0)


def test_lambert_fixed_points():
    assert lambert_w0(0.0) == 0.0
    assert lambert_w0(math.e) == pytest.approx(1.0, abs=1e-15)
    z = 2 * (math.log(2) - 1) / math.e
    assert lambert_w0(z) == pytest.approx(math.log(2) - 1, abs=1e-13)
    assert lambert_w0(-1 / math.e) == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        lambert_w0(-0.4)


@given(st.floats(-1 / math.e + 1e-12, 1e8))
def test_lambert_roundtrip(z):
    w = lambert_w0(z)
    assert w >= -1
    assert abs(w * math.exp(w) - z) <= 1e-12 * max(1.0, abs(z))


def test_predicted_degree_identities():
    n = 10**6
    np_ = math.log(n)
    assert predict_max_degree(n, np_ / n) == pytest.approx(math.e * np_, rel=1e-12)
    np_ = math.log(n) / math.log(4 / math.e)
    assert predict_max_degree(n, np_ / n) == pytest.approx(2 * np_, rel=1e-10)
    assert rho_g_predictor(n, np_ / n) / (2 * math.sqrt(np_)) == pytest.approx(1.0, abs=1e-10)


def test_dense_regime_clamps():
    n = 10**5
    p = 40 * math.log(n) / n
    assert rho_g_predictor(n, p) == pytest.approx(2 * math.sqrt(n * p), rel=1e-12)


def test_predictor_curve():
    assert THRESHOLD_C == pytest.approx(2.5887, abs=1e-4)
    assert predictor_ratio(THRESHOLD_C) == pytest.approx(1.0, abs=1e-10)
    e1 = math.e - 1
    assert predictor_ratio(1.0) == pytest.approx((math.sqrt(e1) + 1 / math.sqrt(e1)) / 2, abs=1e-12)
    assert 2 * predictor_ratio(1.0) == pytest.approx(2.07371, abs=1e-4)
    assert predictor_ratio(10.0) == 1.0
    with pytest.raises(ValueError):
        predictor_ratio(0.0)


def test_empirical_max_degree_near_asymptote():
    n = 10**5
    p = 20 / n
    gamma = predict_max_degree(n, p)
    for t in range(50):
        m = sample_erdos_renyi(n, p, SeedSpec(21, t))
        top = np.diff(m.csr.indptr).max()
        assert abs(top - gamma) <= 0.12 * gamma


def test_bbp_prediction():
    assert bbp_prediction(0.5) == 2.0
    assert bbp_prediction(1.0) == 2.0
    assert bbp_prediction(2.0) == 2.5
    with pytest.raises(ValueError):
        bbp_prediction(-1.0)


def test_two_by_two():
    res = extreme_eigenvalues(np.array([[0.0, 1.0], [1.0, 0.0]]), k=1)
    assert abs(res.values[0]) == pytest.approx(1.0)
    assert res.converged


def test_star_eigenvalues():
    res = extreme_eigenvalues(star(9), k=2, verify_multiplicity=True)
    assert np.allclose(np.abs(res.values), 3.0)
    assert list(res.values) == sorted(res.values, reverse=True)


def test_repeated_eigenvalue_found():
    a = np.diag([5.0, 5.0, 5.0, 1.0, 0.5, 0.2])
    res = extreme_eigenvalues(a, k=3, verify_multiplicity=True)
    assert np.allclose(res.values, 5.0)


def test_deformed_wigner_outlier():
    a = sample_deformed_wigner(2000, [2.0], make_distribution("rademacher"), seed=SeedSpec(0, 1))
    res = extreme_eigenvalues(a, k=1, tol=1e-10)
    assert res.values[0] == pytest.approx(2.5, abs=0.12)


def test_nonconvergence_strict():
    a = np.diag(np.linspace(1, 2, 200))
    res = extreme_eigenvalues(a, k=1, max_iter=3)
    assert not res.converged
    with pytest.raises(NonConvergenceError):
        extreme_eigenvalues(a, k=1, max_iter=3, strict=True)


def test_bad_arguments():
    with pytest.raises(ValueError):
        extreme_eigenvalues(np.eye(3), k=4)
    with pytest.raises(ValueError):
        extreme_eigenvalues(np.eye(3), k=1, tol=0)


def test_seginer_examples():
    assert seginer_ratio(star(9)) == pytest.approx(1.0, abs=1e-8)
    rng = np.random.default_rng(0)
    u = np.triu(rng.choice([-1.0, 1.0], size=(200, 200)), 1)
    full = u + u.T
    r = seginer_ratio(full)
    assert 1.3 <= r <= 2.1
    assert r == pytest.approx(np.abs(np.linalg.eigvalsh(full)).max() / math.sqrt(199), rel=1e-8)
    with pytest.raises(ValueError):
        seginer_ratio(np.zeros((3, 3)))


def test_sparse_input_matches_dense():
    m = sample_erdos_renyi(300, 0.05, seed=3)
    res = extreme_eigenvalues(m, k=4, tol=1e-10)
    assert np.allclose(res.values, dense_extreme(m.toarray(), 4), rtol=1e-8)


@given(st.integers(2, 60), st.integers(1, 5), st.integers(0, 2**31))
def test_matches_dense_oracle(n, k, seed):
    k = min(k, n)
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    a = (a + a.T) / 2
    res = extreme_eigenvalues(a, k=k, tol=1e-10, seed=seed % 1000)
    ref = dense_extreme(a, k)
    assert np.allclose(np.abs(res.values), np.abs(ref), rtol=1e-8, atol=1e-10)


@given(st.integers(2, 40), st.integers(0, 2**31))
def test_norm_dominates_row_norms(n, seed):
    rng = np.random.default_rng(seed)
    a = np.triu(rng.standard_normal((n, n)) * (rng.random((n, n)) < 0.3), 1)
    a = a + a.T
    if not np.any(a):
        return
    assert seginer_ratio(a) >= 1 - 1e-8


def test_row_norm_wrapper_accepts_wrapper_type():
    m = sample_erdos_renyi(100, 0.1, seed=0)
    assert np.array_equal(spectral.row_norms_sq(m), np.diff(m.csr.indptr).astype(float))


@given(st.integers(10**3, 10**9), st.floats(0.2, 30))
def test_predictor_is_rho_at_predicted_degree(n, c):
    p = c * math.log(n) / n
    if p >= 1:
        return
    gamma = predict_max_degree(n, p)
    assert rho_g_predictor(n, p) == pytest.approx(rho(gamma, n * p).rho, rel=1e-10)


def test_predictor_curve_monotone():
    cs = np.linspace(0.1, 12, 100)
    vals = [predictor_ratio(c) for c in cs]
    assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))
    assert all(v == 1.0 for c, v in zip(cs, vals) if c >= THRESHOLD_C)
    assert all(v > 1.0 for c, v in zip(cs, vals) if c < THRESHOLD_C - 1e-6)
