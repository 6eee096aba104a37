import math

import numpy as np
import pytest

from retrosmooth.errors import DimensionError, DomainError, InvariantError
from retrosmooth.experiments import HybridConfig, hybrid_build
from retrosmooth.measurement import (
    GaussianMeasurement,
    MeasurementSet,
    apply_nonselective,
    apply_selective,
    completeness_defect,
    gaussian_nonselective,
    gaussian_normalized_post,
    gaussian_unnormalized_post,
    random_density,
    random_measurement_set,
)
from retrosmooth.qmat import BlochVector, bloch_to_density, hermitian_eigen, kron, trace_distance, validate_density
from retrosmooth.quadrature import quad_integrate

from .oracles import bloch_matrix, kraus_gaussian

Z_BASIS = MeasurementSet.projective(np.eye(2), ("+", "-"))


def test_measurement_set_validation():
    with pytest.raises(InvariantError):
        MeasurementSet((np.diag([1, 0]),))
    with pytest.raises(InvariantError):
        MeasurementSet(())
    with pytest.raises(DimensionError):
        MeasurementSet((np.eye(2), np.zeros((3, 3))))


def test_selective_eigenstate():
    ens = apply_selective(np.diag([1.0, 0.0]), Z_BASIS)
    np.testing.assert_allclose(ens.probabilities, [1, 0])
    np.testing.assert_allclose(ens.states[0], np.diag([1, 0]))
    assert ens.unreachable == (False, True)
    # placeholder is a valid state, not 0/0
    assert not isinstance(validate_density(ens.states[1]), list)


def test_selective_maximally_mixed():
    ens = apply_selective(np.eye(2) / 2, Z_BASIS)
    np.testing.assert_allclose(ens.probabilities, [0.5, 0.5])


def test_selective_hybrid_model():
    q = 0.5
    cfg = HybridConfig.two_state(q, BlochVector(0, 0, 0), BlochVector(1, 0, 0))
    rho_ab, dims, first, _ = hybrid_build(cfg)
    ens = apply_selective(rho_ab, first)
    # brute-force trace oracle: p(mu) = Tr[(I (x) |c><c|) rho]
    for mu in range(2):
        proj = np.zeros((2, 2))
        proj[mu, mu] = 1
        oracle = sum(rho_ab[i, i] for i in range(4) if i % 2 == mu).real
        assert ens.probabilities[mu] == pytest.approx(oracle, abs=1e-15)
        assert ens.probabilities[mu] == pytest.approx(0.5, abs=1e-15)
    np.testing.assert_allclose(ens.states[0], kron(np.eye(2) / 2, np.diag([1, 0])), atol=1e-15)
    np.testing.assert_allclose(ens.states[1], kron(np.diag([1, 0]), np.diag([0, 1])), atol=1e-15)


def test_nonselective_examples():
    rho = bloch_to_density(BlochVector(0.9, math.pi / 2, 0))
    np.testing.assert_allclose(apply_nonselective(rho, Z_BASIS), np.eye(2) / 2, atol=1e-15)
    cfg = HybridConfig.two_state(0.3, BlochVector(0.4, 1.0, 0.2), BlochVector(0.8, 2.0, 1.0))
    rho_ab, _, first, _ = hybrid_build(cfg)
    np.testing.assert_allclose(apply_nonselective(rho_ab, first), rho_ab, atol=1e-15)


def test_nonselective_is_mixture_of_selective():
    for seed in range(100):
        dim = 2 + seed % 3
        rho = random_density(dim, seed)
        mset = random_measurement_set(dim, 2 + seed % 4, seed + 1000)
        ens = apply_selective(rho, mset)
        assert abs(ens.probabilities.sum() - 1) <= 1e-9
        mix = sum(p * s for p, s in zip(ens.probabilities, ens.states))
        out = apply_nonselective(rho, mset)
        assert np.max(np.abs(mix - out)) <= 1e-10
        assert abs(np.trace(out) - 1) <= 1e-12


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        apply_selective(np.eye(3) / 3, Z_BASIS)


def test_gaussian_peak_small_a():
    g = GaussianMeasurement(1e-2)
    post = gaussian_unnormalized_post(np.diag([1.0, 0.0]), g, 1.0)
    assert np.trace(post).real == pytest.approx((2 * math.pi * 1e-4) ** -0.5, rel=1e-12)


def test_gaussian_post_matches_kraus_product():
    rng = np.random.default_rng(8)
    for _ in range(50):
        rho = random_density(2, int(rng.integers(1 << 30)))
        a = float(rng.uniform(0.05, 3))
        v = float(rng.uniform(-3, 3))
        om = kraus_gaussian(a, v)
        expected = om @ rho @ om.conj().T
        got = gaussian_unnormalized_post(rho, GaussianMeasurement(a), v)
        assert np.max(np.abs(got - expected)) <= 1e-12 * max(1.0, np.max(np.abs(expected)))


def test_gaussian_trace_integrates_to_one():
    rho = bloch_matrix(0.9, math.pi / 4, 0)
    g = GaussianMeasurement(0.7)
    val, _ = quad_integrate(
        lambda vs: np.array([np.trace(gaussian_unnormalized_post(rho, g, v)).real for v in vs]),
        -1 - 12 * 0.7, 1 + 12 * 0.7,
    )
    assert val == pytest.approx(1.0, abs=1e-8)


def test_gaussian_two_gaussian_mixture():
    rho = bloch_matrix(0.6, 1.1, 0.4)
    g = GaussianMeasurement(0.8)
    gauss = lambda x: math.exp(-x * x / (2 * 0.64)) / math.sqrt(2 * math.pi * 0.64)
    for v in np.linspace(-3, 3, 13):
        p = np.trace(gaussian_unnormalized_post(rho, g, v)).real
        assert p == pytest.approx(rho[0, 0].real * gauss(v - 1) + rho[1, 1].real * gauss(v + 1), rel=1e-12)


def test_gaussian_limits():
    rho = bloch_to_density(BlochVector(0.9, math.pi / 4, 0.3))
    weak = gaussian_normalized_post(rho, GaussianMeasurement(100), 0.4)
    assert np.max(np.abs(weak - rho)) <= 1e-3
    for v, target in ((1.0, np.diag([1, 0])), (-1.0, np.diag([0, 1]))):
        strong = gaussian_normalized_post(rho, GaussianMeasurement(0.01), v)
        assert trace_distance(strong, target) <= 1e-3


def test_gaussian_nonselective_closed_form():
    rho = bloch_to_density(BlochVector(0.9, math.pi / 2, 0))
    out = gaussian_nonselective(rho, GaussianMeasurement(0.05))
    assert abs(out[0, 1]) < 1e-80
    big = gaussian_nonselective(rho, GaussianMeasurement(100))
    assert np.max(np.abs(big - rho)) <= 1e-4
    rho = random_density(2, 4)
    one = gaussian_nonselective(rho, GaussianMeasurement(1.0))
    assert one[0, 1] / rho[0, 1] == pytest.approx(math.exp(-0.5), rel=1e-14)
    np.testing.assert_allclose(np.diag(one), np.diag(rho))


def test_gaussian_nonselective_matches_quadrature():
    rho = random_density(2, 4)
    g = GaussianMeasurement(1.0)

    def f(vs):
        out = []
        for v in vs:
            m = gaussian_unnormalized_post(rho, g, v)
            out.append([m[0, 0].real, m[1, 1].real, m[0, 1].real, m[0, 1].imag])
        return np.array(out)

    vals, _ = quad_integrate(f, -13, 13, breakpoints=(-1, 0, 1))
    closed = gaussian_nonselective(rho, g)
    np.testing.assert_allclose(vals, [closed[0, 0].real, closed[1, 1].real, closed[0, 1].real, closed[0, 1].imag], atol=1e-9)


def test_gaussian_domain():
    with pytest.raises(DomainError):
        GaussianMeasurement(0.0)
    with pytest.raises(DomainError):
        GaussianMeasurement(-1.0)
    with pytest.raises(DomainError):
        GaussianMeasurement(5e-4)


def test_random_density_contract():
    for seed in range(20):
        rho = random_density(2 + seed % 4, seed)
        assert not isinstance(validate_density(rho), list)
    np.testing.assert_array_equal(random_density(3, 9), random_density(3, 9))
    vals, _ = hermitian_eigen(random_density(2, 1))
    assert vals.min() > 0


def test_random_measurement_set_contract():
    single = random_measurement_set(3, 1, 0)
    op = single.operators[0]
    np.testing.assert_allclose(op.conj().T @ op, np.eye(3), atol=1e-12)
    for seed in range(30):
        mset = random_measurement_set(2 + seed % 3, 1 + seed % 5, seed)
        assert completeness_defect(mset.operators) <= 1e-10
    ens = apply_selective(random_density(3, 5), random_measurement_set(3, 4, 3))
    assert abs(ens.probabilities.sum() - 1) <= 1e-10
    a, b = random_measurement_set(2, 3, 17), random_measurement_set(2, 3, 17)
    for x, y in zip(a.operators, b.operators):
        np.testing.assert_array_equal(x, y)
