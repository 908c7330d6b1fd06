import numpy as np
import pytest

from ocd import (
    DegenerateEnsemble,
    cross_correlation,
    l2_cost_model,
    marginal_drift,
    moment_summary,
    new_ensemble,
    spd_margin,
    transport_cost,
)


def test_moment_summary_uses_population_normalization():
    ms = moment_summary(np.array([[0.0], [2.0]]))
    assert ms.mean[0] == pytest.approx(1.0)
    assert ms.covariance[0, 0] == pytest.approx(1.0)  # 1/N, not 1/(N-1)


def test_moment_summary_shapes():
    ms = moment_summary(np.random.default_rng(0).standard_normal((50, 3)))
    assert ms.mean.shape == (3,)
    assert ms.covariance.shape == (3, 3)
    np.testing.assert_allclose(ms.covariance, ms.covariance.T)


def test_transport_cost_is_mean_pair_cost():
    ens = new_ensemble(np.array([[0.0], [1.0]]), np.array([[2.0], [3.0]]))
    assert transport_cost(ens, l2_cost_model()) == pytest.approx(4.0)


def test_transport_cost_zero_on_identical_clouds():
    x = np.random.default_rng(1).standard_normal((20, 2))
    assert transport_cost(new_ensemble(x, x), l2_cost_model()) == 0.0


def test_cross_correlation_identity_pairing():
    ens = new_ensemble(np.array([[-1.0], [1.0]]), np.array([[-1.0], [1.0]]))
    np.testing.assert_allclose(cross_correlation(ens), [[1.0]])


def test_cross_correlation_centers_both_clouds():
    # shifting either marginal must not change the result
    rng = np.random.default_rng(3)
    x = rng.standard_normal((30, 2))
    y = rng.standard_normal((30, 2))
    j = cross_correlation(new_ensemble(x, y))
    j_shift = cross_correlation(new_ensemble(x + 5.0, y - 2.0))
    np.testing.assert_allclose(j, j_shift, atol=1e-12)


def test_cross_correlation_rejects_single_particle():
    with pytest.raises(DegenerateEnsemble):
        cross_correlation(new_ensemble(np.array([[1.0]]), np.array([[2.0]])))


def test_spd_margin_symmetric_part_eigenvalue():
    # sym part of [[1,2],[2,1]] has eigenvalues {3, -1}
    assert spd_margin(np.array([[1.0, 2.0], [2.0, 1.0]])) == pytest.approx(-1.0)


def test_spd_margin_antisymmetric_matrix_is_zero():
    assert spd_margin(np.array([[0.0, 1.0], [-1.0, 0.0]])) == pytest.approx(0.0)


def test_spd_margin_scalar():
    assert spd_margin(np.array([[2.0]])) == pytest.approx(2.0)


def test_marginal_drift_zero_for_identical_summaries():
    ms = moment_summary(np.random.default_rng(4).standard_normal((40, 2)))
    assert marginal_drift(ms, ms) == 0.0


def test_marginal_drift_covariance_term():
    # reference cov = I exactly, current cov = 1.1 I:
    # drift = ||0.1 I||_F / (1 + ||I||_F) = 0.1*sqrt(2) / (1 + sqrt(2))
    corners = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])
    ref = moment_summary(corners)
    cur = moment_summary(corners * np.sqrt(1.1))
    expected = 0.1 * np.sqrt(2.0) / (1.0 + np.sqrt(2.0))
    assert marginal_drift(cur, ref) == pytest.approx(expected)


def test_marginal_drift_mean_term():
    corners = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])
    ref = moment_summary(corners)
    cur = moment_summary(corners + np.array([3.0, 0.0]))
    # mean moves by 3 against reference norm 0, covariance unchanged
    assert marginal_drift(cur, ref) == pytest.approx(3.0)
