import math

import numpy as np
import pytest

from concentra.errors import DomainError, UndefinedRatioError
from concentra.funcs import MultilinearPoly, Tabulated
from concentra.lsi import (
    dirichlet_form,
    gamma_squared_mean,
    glauber_quadratic_form,
    indicator_ratio,
    lsi_constant_search,
    lsi_ratio,
    psi2_blowup_study,
    verify_h_lsi_product,
)
from concentra.space import (
    ExactMeasure,
    ProductSpace,
    bernoulli_product,
    binary,
    entropy_functional,
    rademacher,
    two_point_measure,
    uniform,
)


def two_point_h_ratio_oracle(p, grid=4001):
    """Independent 1-D oracle: scan f = (c, c+1) for the oscillation-operator ratio."""
    best = 0.0
    mu = two_point_measure(p)
    for c in np.linspace(-3.0, 3.0, grid):
        f = np.array([c, c + 1.0])
        ent = entropy_functional(mu, f**2)
        ratio = ent / 2.0  # E|hf|^2 = (f1 - f0)^2 = 1
        best = max(best, ratio)
    return best


class TestDirichletForm:
    def test_constant_vanishes(self):
        assert dirichlet_form(rademacher(2), Tabulated(np.full(4, 3.0))) == 0.0

    def test_single_rademacher_coordinate(self):
        f = MultilinearPoly({1: np.array([1.0])})
        assert dirichlet_form(rademacher(1), f) == pytest.approx(1.0)

    def test_additivity_over_coordinates(self):
        f = MultilinearPoly({1: np.ones(2)})
        assert dirichlet_form(rademacher(2), f) == pytest.approx(2.0)

    def test_nonnegative(self):
        rng = np.random.default_rng(0)
        mu = bernoulli_product(3, 0.3)
        for _ in range(20):
            assert dirichlet_form(mu, Tabulated(rng.standard_normal(8))) >= 0.0

    def test_quadratic_form_matrix_agrees(self):
        rng = np.random.default_rng(1)
        mu = bernoulli_product(3, 0.4)
        L = glauber_quadratic_form(mu)
        for _ in range(10):
            f = rng.standard_normal(8)
            assert f @ L @ f == pytest.approx(dirichlet_form(mu, Tabulated(f)), abs=1e-12)


class TestLsiRatio:
    def test_indicator_ratio_formula(self):
        # for f = 1_A on a two-point space: Ent = mu(A) log(1/mu(A)),
        # denominator 2 mu(A)(1 - mu(A))
        for p in (0.5, 0.2, 0.01):
            mu = two_point_measure(p)
            f = np.array([0.0, 1.0])
            expected = p * math.log(1 / p) / (2 * p * (1 - p))
            assert lsi_ratio(mu, f, "d") == pytest.approx(expected, rel=1e-12)
            assert indicator_ratio(p) == pytest.approx(expected, rel=1e-12)

    def test_affine_invariance(self):
        rng = np.random.default_rng(2)
        mu = bernoulli_product(2, 0.3)
        g = rng.standard_normal(4)
        for operator in ("d", "h", "h_plus"):
            base = lsi_ratio(mu, g, operator)
            for a, b in [(2.0, 0.0), (0.5, 0.0), (3.0, 0.0)]:
                assert lsi_ratio(mu, a * g + b, operator) == pytest.approx(base, rel=1e-9)

    def test_two_point_example_value(self):
        mu = rademacher(1)
        ratio = lsi_ratio(mu, np.array([1.0, 2.0]), "d")
        expected = (2 * math.log(4) - 2.5 * math.log(2.5)) / (2 * 0.25)
        assert ratio == pytest.approx(expected, rel=1e-12)

    def test_constant_rejected(self):
        with pytest.raises(UndefinedRatioError):
            lsi_ratio(rademacher(2), np.full(4, 1.0), "d")

    def test_vanishing_mass_indicators_grow_without_bound(self):
        # the finite-support mechanism: ratio ~ log(1/p)/2 diverges as p -> 0
        previous = 0.0
        for p in (1e-1, 1e-3, 1e-6, 1e-12):
            ratio = lsi_ratio(two_point_measure(p), np.array([0.0, 1.0]), "d")
            assert ratio > previous
            previous = ratio
        assert previous > 13.0


class TestConstantSearch:
    def test_single_point_support_gives_zero(self):
        mu = ExactMeasure(binary(1), np.array([1.0, 0.0]))
        report = lsi_constant_search(mu, "d", starts=4, seed=0)
        assert report.best_ratio == 0.0
        assert report.witness is None

    def test_rademacher_product_stays_at_one(self):
        # independent two-point coordinates: the d-operator constant is 1
        report = lsi_constant_search(rademacher(2), "d", starts=24, seed=1)
        assert report.best_ratio <= 1.0 + 1e-6
        assert report.best_ratio > 0.9
        assert report.witness is not None

    def test_witness_attains_reported_ratio(self):
        mu = bernoulli_product(2, 0.2)
        report = lsi_constant_search(mu, "d", starts=16, seed=2)
        attained = lsi_ratio(mu, report.witness, "d")
        assert attained == pytest.approx(report.best_ratio, rel=1e-9)

    def test_two_point_search_matches_oracle(self):
        for p in (0.1, 0.01):
            report = lsi_constant_search(two_point_measure(p), "h", starts=24, seed=3)
            oracle = two_point_h_ratio_oracle(p)
            assert report.best_ratio == pytest.approx(oracle, rel=1e-3)

    def test_two_point_trend_tracks_asymptotic_rate(self):
        # sigma_p^2 ~ p (1-p) log(1/p): the ratio of the two stays in a narrow band
        for p in (0.1, 0.01, 0.001):
            report = lsi_constant_search(two_point_measure(p), "h", starts=24, seed=4)
            rate = p * (1 - p) * math.log(1 / p)
            assert 0.45 <= report.best_ratio / rate <= 0.65

    def test_one_sided_operator_search_dominates_oscillation(self):
        # |h+ f| <= |h f| pointwise, so the positive-part ratio search finds
        # at least the oscillation constant
        mu = two_point_measure(0.2)
        h_report = lsi_constant_search(mu, "h", starts=16, seed=6)
        h_plus_report = lsi_constant_search(mu, "h_plus", starts=16, seed=6)
        assert h_plus_report.best_ratio >= h_report.best_ratio - 1e-6

    def test_report_serializes(self):
        report = lsi_constant_search(rademacher(1), "d", starts=4, seed=5)
        doc = report.to_json()
        assert doc["operator"] == "d"
        assert doc["starts"] == 4


class TestProductHLsi:
    def test_rademacher_cube(self):
        assert verify_h_lsi_product(rademacher(3), trials=300, seed=0) <= 1.0 + 1e-9

    def test_biased_bernoulli(self):
        assert verify_h_lsi_product(bernoulli_product(3, 0.9), trials=300, seed=1) <= 1.0 + 1e-9

    def test_single_coordinate_range_bound(self):
        # n = 1: Ent(f^2) <= 2 (b - a)^2 for E f^2 = 1, a/b the inf/sup of |f|
        rng = np.random.default_rng(2)
        space = ProductSpace(((0.0, 1.0, 2.0, 3.0),))
        mu = uniform(space)
        for _ in range(200):
            f = rng.standard_normal(4)
            f /= math.sqrt(float(np.dot(mu.prob_table(), f**2)))
            ent = entropy_functional(mu, f**2)
            a, b = np.abs(f).min(), np.abs(f).max()
            assert ent <= 2 * (b - a) ** 2 + 1e-9

    def test_non_product_rejected(self):
        mu = ExactMeasure(binary(2), np.array([0.5, 0.0, 0.0, 0.5]))
        with pytest.raises(DomainError):
            verify_h_lsi_product(mu, trials=10)


class TestPsi2Study:
    def test_baseline_half_is_finite_and_modest(self):
        rows = psi2_blowup_study([0.5], starts=16, seed=0)
        assert 1.0 < rows[0].psi2_value < 3.0

    def test_divergence_into_blowup(self):
        rows = psi2_blowup_study([1e-2, 1e-3, 1e-4], starts=16, seed=1)
        values = [r.psi2_value for r in rows]
        assert values[1] > values[0]
        assert values[2] > 100 * values[1]

    def test_orlicz_moment_estimate_present(self):
        rows = psi2_blowup_study([0.25], q_max=32, starts=8, seed=2)
        assert rows[0].orlicz_moment_estimate > 0.0

    def test_degenerate_p_rejected(self):
        with pytest.raises(DomainError):
            psi2_blowup_study([0.0])


class TestOperatorEnergies:
    def test_h_energy_dominates_d_energy(self):
        rng = np.random.default_rng(3)
        mu = bernoulli_product(3, 0.3)
        for _ in range(20):
            f = rng.standard_normal(8)
            assert gamma_squared_mean(mu, f, "h") >= gamma_squared_mean(mu, f, "d") - 1e-12

    def test_h_plus_between(self):
        rng = np.random.default_rng(4)
        mu = rademacher(3)
        for _ in range(20):
            f = rng.standard_normal(8)
            assert gamma_squared_mean(mu, f, "h_plus") <= gamma_squared_mean(mu, f, "h") + 1e-12
            assert gamma_squared_mean(mu, f, "h_plus") >= gamma_squared_mean(mu, f, "d") - 1e-12
