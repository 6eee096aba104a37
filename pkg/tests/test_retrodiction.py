import numpy as np
import pytest

from retrosmooth.errors import DimensionError, InvariantError, NumericError
from retrosmooth.measurement import MeasurementSet, apply_selective, random_density, random_measurement_set
from retrosmooth.retrodiction import (
    JointDistribution,
    PastQuantumState,
    joint_distribution,
    retrodict,
    smooth,
    smoothed_states,
)

Z = MeasurementSet.projective(np.eye(2), ("0", "1"))
X = MeasurementSet.projective(np.array([[1, 1], [1, -1]]) / np.sqrt(2), ("+", "-"))


def test_joint_same_basis_is_diagonal():
    rho = random_density(2, 3)
    joint = joint_distribution(rho, Z, Z)
    np.testing.assert_allclose(joint.p_ym, np.diag(np.diag(rho).real), atol=1e-15)


def test_joint_unbiased_is_half_of_first():
    rho = random_density(2, 3)
    joint = joint_distribution(rho, Z, X)
    np.testing.assert_allclose(joint.p_ym, 0.5 * np.vstack([np.diag(rho).real] * 2), atol=1e-15)


def test_joint_validation():
    with pytest.raises(InvariantError):
        JointDistribution(np.array([[0.5, 0.6], [0.0, 0.0]]))
    with pytest.raises(InvariantError):
        JointDistribution(np.array([[1.1, -0.1]]))
    with pytest.raises(DimensionError):
        JointDistribution(np.array([0.5, 0.5]))
    # tiny negatives are clamped
    j = JointDistribution(np.array([[1.0 + 1e-13, -1e-13]]))
    assert j.p_ym.min() == 0.0


def test_marginals_and_forward_conditionals():
    for seed in range(20):
        rho = random_density(3, seed)
        first = random_measurement_set(3, 3, seed + 50)
        second = random_measurement_set(3, 2, seed + 90)
        joint = joint_distribution(rho, first, second)
        assert abs(joint.p_ym.sum() - 1) <= 1e-12
        np.testing.assert_allclose(joint.p_m, apply_selective(rho, first).probabilities, atol=1e-12)
        np.testing.assert_allclose(joint.p_y_given_m().sum(axis=0), 1.0, atol=1e-12)


def test_retrodict_independent():
    p_y, p_m = np.array([0.3, 0.7]), np.array([0.2, 0.5, 0.3])
    table, py = retrodict(JointDistribution.product(p_y, p_m))
    np.testing.assert_allclose(py, p_y)
    for y in range(2):
        np.testing.assert_allclose(table[:, y], p_m, atol=1e-15)


def test_retrodict_deterministic():
    table, _ = retrodict(JointDistribution(np.diag([0.4, 0.6])))
    np.testing.assert_array_equal(table, np.eye(2))


def test_retrodict_unreachable_column():
    table, p_y = retrodict(JointDistribution(np.array([[0.4, 0.6], [0.0, 0.0]])))
    assert p_y[1] == 0.0
    np.testing.assert_array_equal(table[:, 1], 0.0)


def test_retrodict_bayes_consistency():
    rng = np.random.default_rng(12)
    for _ in range(50):
        p = rng.random((3, 4))
        joint = JointDistribution(p / p.sum())
        table, p_y = retrodict(joint)
        np.testing.assert_allclose(table.sum(axis=0), 1.0, atol=1e-12)
        # p(m|y) p(y) = p(y|m) p(m)
        np.testing.assert_allclose(table.T * p_y[:, None], joint.p_y_given_m() * joint.p_m, atol=1e-12)


def test_smoothed_states_examples():
    rho = random_density(2, 6)
    ens = apply_selective(rho, Z)
    states = smoothed_states(ens, np.eye(2))
    for s, e in zip(states, ens.states):
        np.testing.assert_allclose(s, e)
    mixed = smoothed_states(ens, np.full((2, 2), 0.5))
    for s in mixed:
        np.testing.assert_allclose(s, np.diag([0.5, 0.5]), atol=1e-15)
    with pytest.raises(DimensionError):
        smoothed_states(ens, np.ones((3, 2)) / 3)


def test_average_smoothed_equals_nonselective():
    worst = 0.0
    for seed in range(200):
        dim = 2 + seed % 3
        rho = random_density(dim, seed)
        res = smooth(rho, random_measurement_set(dim, 2 + seed % 3, seed + 1), random_measurement_set(dim, 2 + (seed // 3) % 3, seed + 2))
        worst = max(worst, np.max(np.abs(res.average_state - res.nonselective_state)))
        # weights w(m, y) reproduce p(y) = sum_m p(m) w(m, y) p(y)... and Bayes
        np.testing.assert_allclose(res.weights_w * res.p_m[:, None], res.p_m_given_y, atol=1e-12)
    assert worst <= 1e-10


def test_smooth_same_basis_recovers_selective():
    rho = random_density(2, 8)
    res = smooth(rho, Z, Z)
    for s, e in zip(res.smoothed_states, res.ensemble.states):
        np.testing.assert_allclose(s, e, atol=1e-14)


def test_smooth_unbiased_gives_nonselective():
    rho = random_density(2, 8)
    res = smooth(rho, Z, X)
    for s in res.smoothed_states:
        np.testing.assert_allclose(s, res.nonselective_state, atol=1e-14)


def test_smooth_dimension_mismatch():
    with pytest.raises(DimensionError):
        smooth(np.eye(2) / 2, Z, random_measurement_set(3, 2, 0))


def test_past_quantum_state():
    rho = random_density(2, 1)
    res = smooth(rho, Z, X)
    for y in range(2):
        pqs = PastQuantumState(rho, X.effects()[y])
        np.testing.assert_allclose(pqs.retrodicted(Z), res.p_m_given_y[:, y], atol=1e-14)
    with pytest.raises(InvariantError):
        PastQuantumState(rho, 2 * np.eye(2))
    with pytest.raises(NumericError):
        PastQuantumState(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])).retrodicted(Z)
