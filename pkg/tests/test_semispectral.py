import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convpovm.measures import (
    DivergentMomentError,
    ProbabilityMeasure,
    ScalarMeasure,
    Verdict,
    convolve,
    moment,
)
from convpovm.operators import OperatorError, random_density, random_hermitian
from convpovm.semispectral import (
    DiscretizedPOVM,
    bilinear_measure,
    binned_spectral_measure,
    hs_moment_diagnostic,
    moment_operator_binomial,
    moment_operator_direct,
    smear,
    spectral_measure_of,
    state_distribution,
    trace_moment,
)

from conftest import gaussian

seeds = st.integers(0, 2**32 - 1)
P0 = np.diag([1.0, 0.0])
P1 = np.diag([0.0, 1.0])


def separating_edges(points):
    """Edges halfway between consecutive distinct points, so each point sits alone."""
    pts = np.unique(points)
    if len(pts) == 1:
        return pts + 1.0
    return 0.5 * (pts[:-1] + pts[1:])


def random_instance(rng, d_max=16, n_max=30):
    d = int(rng.integers(1, d_max + 1))
    a = random_hermitian(d, rng, scale=2.0)
    n = int(rng.integers(1, n_max + 1))
    w = rng.uniform(0.05, 1, n)
    mu = ProbabilityMeasure.from_atoms(rng.uniform(-2, 2, n), w / w.sum())
    return a, mu


# ---------------------------------------------------------------- spectral measures


def test_spectral_measure_of_diagonal():
    e = spectral_measure_of(np.diag([0.0, 1.0]))
    assert e.points.tolist() == [0.0, 1.0]
    np.testing.assert_allclose(e.projections, [P0, P1])


def test_spectral_measure_of_identity():
    e = spectral_measure_of(np.eye(4))
    assert e.points.tolist() == [1.0]
    np.testing.assert_allclose(e.projections[0], np.eye(4), atol=1e-14)


def test_spectral_projections_resolve_identity(rng):
    e = spectral_measure_of(random_hermitian(12, rng))
    assert np.abs(e.projections.sum(axis=0) - np.eye(12)).max() < 1e-10


# ---------------------------------------------------------------- bilinear measures


def test_bilinear_eigenstate_is_point_mass():
    mu = bilinear_measure(spectral_measure_of(np.diag([0.0, 1.0])), [1, 0], [1, 0])
    assert [(x, w) for x, w in mu.atoms if abs(w) > 0] == [(0.0, 1.0)]


def test_bilinear_equal_superposition():
    psi = np.array([1, 1]) / np.sqrt(2)
    mu = bilinear_measure(spectral_measure_of(np.diag([0.0, 1.0])), psi, psi)
    np.testing.assert_allclose(mu.weights, [0.5, 0.5])


def test_bilinear_dimension_mismatch():
    with pytest.raises(OperatorError):
        bilinear_measure(spectral_measure_of(np.eye(2)), [1, 0, 0], [1, 0])


def test_bilinear_mass_is_inner_product(rng):
    for _ in range(20):
        a, mu = random_instance(rng)
        d = a.shape[0]
        psi = rng.normal(size=d) + 1j * rng.normal(size=d)
        phi = rng.normal(size=d) + 1j * rng.normal(size=d)
        e = spectral_measure_of(a)
        edges = np.linspace(-5, 5, 11)
        for m in (e, smear(mu, e, edges)):
            assert abs(bilinear_measure(m, psi, phi).mass() - np.vdot(psi, phi)) < 1e-10


def test_bilinear_diagonal_is_positive(rng):
    a, mu = random_instance(rng)
    phi = rng.normal(size=a.shape[0]) + 1j * rng.normal(size=a.shape[0])
    m = bilinear_measure(smear(mu, spectral_measure_of(a), np.linspace(-4, 4, 9)), phi, phi)
    assert np.all(m.weights.real >= -1e-12)
    assert np.all(np.abs(m.weights.imag) <= 1e-12)
    assert m.mass().real == pytest.approx(np.vdot(phi, phi).real)


# ---------------------------------------------------------------- smearing


def test_smear_by_point_mass_bins_projections():
    e = spectral_measure_of(np.diag([0.0, 1.0]))
    povm = smear(ProbabilityMeasure.point(0.0), e, [-0.5, 0.5, 1.5])
    np.testing.assert_allclose(povm.effects, [np.zeros((2, 2)), P0, P1, np.zeros((2, 2))])
    assert povm.reps.tolist() == [-0.5, 0.0, 1.0, 1.5]


def test_smear_by_shifted_point_translates():
    e = spectral_measure_of(np.diag([0.0, 1.0]))
    povm = smear(ProbabilityMeasure.point(2.0), e, [1.5, 2.5, 3.5])
    np.testing.assert_allclose(povm.effects[1:3], [P0, P1])
    assert povm.reps[1:3].tolist() == [2.0, 3.0]


def test_smear_brute_force_table():
    a = np.diag([0.0, 1.0])
    mu = ProbabilityMeasure.from_atoms([-1.0, 1.0], [0.5, 0.5])
    edges = [-0.5, 0.5, 1.5]
    povm = smear(mu, spectral_measure_of(a), edges)
    # product-measure double loop over atoms of mu and eigenvalues of A
    bins = [(-np.inf, -0.5), (-0.5, 0.5), (0.5, 1.5), (1.5, np.inf)]
    expected = np.zeros((4, 2, 2))
    for x, w in mu.atoms:
        for lam, p in ((0.0, P0), (1.0, P1)):
            for b, (lo, hi) in enumerate(bins):
                if lo < x + lam <= hi:
                    expected[b] += w.real * p
    np.testing.assert_allclose(povm.effects, expected)
    # sums: -1+0 -> outer left, 1+0 -> (0.5,1.5], -1+1 -> (-0.5,0.5], 1+1 -> outer right
    np.testing.assert_allclose(povm.effects, 0.5 * np.stack([P0, P1, P0, P1]))
    povm.validate()


def test_smear_with_density_absorbs_tails():
    e = spectral_measure_of(np.diag([-1.0, 0.0, 2.0]))
    povm = smear(gaussian(var=4.0), e, np.linspace(-3, 3, 13)).validate()
    assert povm.normalization_error() < 1e-12
    assert povm.effects[0][0, 0].real > 0.05


def test_smear_requires_probability_measure():
    with pytest.raises(TypeError):
        smear(ScalarMeasure.point(0.0, 1j), spectral_measure_of(np.eye(2)), [0.0])


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_smear_effects_positive_and_normalized(seed):
    rng = np.random.default_rng(seed)
    a, mu = random_instance(rng)
    povm = smear(mu, spectral_measure_of(a), np.sort(rng.uniform(-5, 5, 7)))
    assert povm.min_effect_eigenvalue() >= -1e-9
    assert povm.normalization_error() <= 1e-8


# ---------------------------------------------------------------- moment operators


def test_direct_moment_zero_is_identity(rng):
    a, mu = random_instance(rng)
    povm = smear(mu, spectral_measure_of(a), np.linspace(-4, 4, 17))
    assert np.abs(moment_operator_direct(povm, 0) - np.eye(a.shape[0])).max() < 1e-8


def test_direct_moments_of_binned_spectral_measure(rng):
    a = random_hermitian(6, rng)
    e = spectral_measure_of(a)
    povm = binned_spectral_measure(e, separating_edges(e.points))
    assert np.abs(moment_operator_direct(povm, 1) - a).max() < 1e-10
    assert np.abs(moment_operator_direct(povm, 2) - a @ a).max() < 1e-10
    assert np.abs(moment_operator_direct(e, 3) - a @ a @ a).max() < 1e-10


def test_binomial_trivial_smearing(rng):
    a = random_hermitian(4, rng)
    for k in range(5):
        np.testing.assert_allclose(moment_operator_binomial(ProbabilityMeasure.point(0.0), a, k),
                                   np.linalg.matrix_power(a, k), atol=1e-12)


def test_binomial_first_moment(rng):
    a = random_hermitian(4, rng)
    mu = ProbabilityMeasure.from_atoms([-1.0, 3.0], [0.25, 0.75])
    np.testing.assert_allclose(moment_operator_binomial(mu, a, 1), a + 2.0 * np.eye(4), atol=1e-12)


def test_binomial_gaussian_second_moment():
    mu = gaussian(mean=1.0, var=2.0, lo=-14.0, hi=16.0, step=0.01)
    a = np.diag([0.0, 1.0])
    expected = a @ a + 2 * a + 3 * np.eye(2)
    assert np.abs(moment_operator_binomial(mu, a, 2) - expected).max() < 1e-3


def test_binomial_rejects_negative_order():
    with pytest.raises(ValueError):
        moment_operator_direct(spectral_measure_of(np.eye(2)), -1)


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(0, 5))
def test_smearing_binomial_consistency(seed, k):
    rng = np.random.default_rng(seed)
    a, mu = random_instance(rng)
    e = spectral_measure_of(a)
    points = np.add.outer(mu.locations, e.points).ravel()
    povm = smear(mu, e, separating_edges(points))
    direct = moment_operator_direct(povm, k)
    binom = moment_operator_binomial(mu, a, k)
    assert np.abs(direct - binom).max() <= 1e-8


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_bilinear_of_smeared_is_convolution(seed):
    rng = np.random.default_rng(seed)
    a, mu = random_instance(rng)
    d = a.shape[0]
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    phi = rng.normal(size=d) + 1j * rng.normal(size=d)
    e = spectral_measure_of(a)
    points = np.add.outer(mu.locations, e.points).ravel()
    lhs = bilinear_measure(smear(mu, e, separating_edges(points)), psi, phi)
    rhs = convolve(mu, bilinear_measure(e, psi, phi))
    np.testing.assert_allclose(lhs.locations, rhs.locations, atol=1e-12)
    np.testing.assert_allclose(lhs.weights, rhs.weights, atol=1e-10)


def test_heavy_tail_smearing_first_moment_exists(heavy_tail):
    a = np.diag([0.0, 1.0])
    out = moment_operator_binomial(heavy_tail, a, 1)
    assert np.abs(out - a).max() < 1e-6
    rep = moment(heavy_tail, 2, [1e2, 1e3, 1e4, 1e5, 1e6])
    assert rep.verdict is Verdict.DIVERGING


def test_heavy_tail_smearing_second_moment_refused(heavy_tail):
    with pytest.raises(DivergentMomentError):
        moment_operator_binomial(heavy_tail, np.diag([0.0, 1.0]), 2,
                                 radii=[1e2, 1e3, 1e4, 1e5, 1e6])


# ---------------------------------------------------------------- state distributions


def test_state_distribution_eigenstate():
    p = state_distribution(np.diag([1.0, 0.0]), np.diag([3.0, 5.0]))
    assert [(x, w) for x, w in p.atoms if w != 0] == [(3.0, 1.0)]


def test_state_distribution_maximally_mixed():
    p = state_distribution(np.eye(2) / 2, np.diag([0.0, 1.0]))
    assert p.atoms == [(0.0, 0.5), (1.0, 0.5)]


def test_state_distribution_mean_is_trace(rng):
    for _ in range(20):
        d = int(rng.integers(1, 20))
        t, a = random_density(d, rng), random_hermitian(d, rng)
        p = state_distribution(t, a)
        mean = np.sum(p.locations * p.weights.real)
        assert abs(mean - np.trace(a @ t).real) < 1e-10


def test_trace_moment_examples(rng):
    a = random_hermitian(5, rng)
    assert trace_moment(np.eye(5) / 5, a, 0) == pytest.approx(1.0)
    assert trace_moment(np.eye(5) / 5, a, 1) == pytest.approx(np.trace(a).real / 5)


def test_trace_moment_matches_spectral_oracle(rng):
    for _ in range(20):
        d = int(rng.integers(1, 20))
        t, a = random_density(d, rng), random_hermitian(d, rng)
        m = int(rng.integers(0, 7))
        p = state_distribution(t, a)
        oracle = np.sum(p.locations ** m * p.weights.real)
        assert abs(trace_moment(t, a, m) - oracle) <= 1e-9 * max(1, abs(oracle))


def test_hs_diagnostic_examples():
    assert hs_moment_diagnostic(np.eye(3) / 3, np.diag([1.0, 2.0, 3.0]), 0) == pytest.approx((1, 1))
    hs, mom = hs_moment_diagnostic(np.diag([1.0, 0.0]), np.diag([-2.0, 1.0]), 2)
    assert hs == pytest.approx(4) and mom == pytest.approx(4)


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(1, 32), st.integers(0, 6))
def test_hs_diagnostic_identity(seed, d, k):
    rng = np.random.default_rng(seed)
    t = random_density(d, rng, rank=int(rng.integers(1, d + 1)))
    hs, mom = hs_moment_diagnostic(t, random_hermitian(d, rng, scale=2.0), k)
    assert abs(hs - mom) <= 1e-9 * max(1.0, mom)


# ---------------------------------------------------------------- POVM container


def test_povm_validate_catches_bad_normalization():
    povm = DiscretizedPOVM([0.0], np.stack([np.eye(2), np.eye(2)]), [0.0, 0.0])
    with pytest.raises(OperatorError):
        povm.validate()


def test_povm_shape_checks():
    with pytest.raises(ValueError):
        DiscretizedPOVM([0.0, 1.0], np.stack([np.eye(2)] * 2), [0.0, 0.5, 1.0])
    with pytest.raises(ValueError):
        DiscretizedPOVM([1.0, 0.0], np.stack([np.eye(2)] * 3), [0.0, 0.5, 1.0])


def test_povm_probabilities_and_bins():
    e = spectral_measure_of(np.diag([0.0, 1.0]))
    povm = binned_spectral_measure(e, [0.5])
    np.testing.assert_allclose(povm.probabilities(np.eye(2) / 2), [0.5, 0.5])
    assert povm.bin_of([0.5, 0.6]).tolist() == [0, 1]
    assert math.isclose(povm.reps[1], 1.0)
