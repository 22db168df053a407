import cmath
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from inner_clt.circle_quad import uniform_grid
from inner_clt.config import SYMMETRY_TOL
from inner_clt.correlations import (correlation_value, covariance_check, decay_fit,
                                    disintegration_integral, factorization_check,
                                    four_factor_check, generic_four_factor, gram_coefficients,
                                    identity_suite, norm2_squared, norm_comparability_check,
                                    pushforward_check, squared_factor_check,
                                    uncorrelated_squares_check)
from inner_clt.errors import DomainError, PreconditionError
from inner_clt.inner_core import make_blaschke
from inner_clt.sequences import constant, explicit, sigma2


class TestCorrelationValue:
    def test_disintegration_covariance(self, half):
        assert_allclose(disintegration_integral(half, [1, 3], [-1, 1]), 0.25, atol=1e-15)

    def test_methods_agree(self, half):
        exact = correlation_value(half, [1, 2, 4], [1, -1, 1], method="disintegration").value
        grid = correlation_value(half, [1, 2, 4], [1, -1, 1], method="grid").value
        assert_allclose(grid, exact, atol=1e-10)

    def test_monte_carlo(self, half):
        result = correlation_value(half, [1, 3], [-1, 1], method="mc")
        assert result.method == "mc"
        assert abs(result.value - 0.25) < 5 * result.error_estimate

    def test_auto_picks_exact_grid_for_monomials(self, square):
        result = correlation_value(square, [1, 2], [-1, 1])
        assert result.method == "exact"
        assert abs(result.value) < 1e-15

    def test_grid_too_small(self, square):
        with pytest.raises(PreconditionError, match="not exact"):
            correlation_value(square, [1, 2], [-1, 1], grid=uniform_grid(4))

    def test_unknown_method(self, half):
        with pytest.raises(DomainError):
            correlation_value(half, [1, 2], [-1, 1], method="simpson")

    def test_repeated_index_merges(self, half):
        # |f^2|^2 = 1 on the circle
        assert_allclose(disintegration_integral(half, [2, 2], [1, -1]), 1.0)

    def test_empty_product(self, half):
        assert disintegration_integral(half, [], []) == 1.0

    @pytest.mark.parametrize("method", ["disintegration", "grid"])
    @pytest.mark.parametrize("indices, signs", [((1, 3), (-1, 1)), ((1, 2, 4), (1, -1, 1)),
                                                ((1, 2, 3, 5), (-1, 1, -1, 1))])
    def test_flipping_signs_conjugates(self, indices, signs, method):
        f = make_blaschke(cmath.exp(0.7j), [0, 0.7, 0.3j])
        value = correlation_value(f, indices, signs, method=method).value
        flipped = correlation_value(f, indices, [-s for s in signs], method=method).value
        assert abs(flipped - np.conj(value)) < SYMMETRY_TOL


class TestCovariance:
    @pytest.mark.parametrize("k, j, expected", [(1, 3, 0.25), (2, 3, 0.5), (1, 5, 0.0625)])
    def test_powers_of_multiplier(self, half, k, j, expected):
        report = covariance_check(half, k, j)
        assert report.passed
        assert_allclose(report.lhs, expected, atol=1e-12)

    def test_multiplier_ignores_zero_argument(self):
        f = make_blaschke(1.0, [0, 0.5 * cmath.exp(1j * math.pi / 3)])
        report = covariance_check(f, 2, 3)
        assert report.passed
        assert_allclose(report.rhs, 0.5, atol=1e-15)

    def test_on_quadrature_grid(self, half):
        assert covariance_check(half, 1, 2, method="grid").passed

    def test_order(self, half):
        with pytest.raises(PreconditionError):
            covariance_check(half, 3, 3)


class TestInvariance:
    def test_pushforward(self, half):
        report = pushforward_check(half, [0, 1, 0, 1, 1])
        assert report.passed
        assert abs(report.rhs) < 1e-15

    def test_pushforward_constant_term(self):
        f = make_blaschke(1.0, [0, 0.7, 0.3j])
        report = pushforward_check(f, [2.0, 0.5j, -1.0])
        assert_allclose(report.rhs, 0.5j, atol=1e-15)
        assert report.passed

    def test_pushforward_length(self, half):
        with pytest.raises(PreconditionError):
            pushforward_check(half, [1, 0])

    def test_factorization(self, half):
        report = factorization_check(half, [(1, 2), (3, 4)])
        assert report.passed
        assert_allclose(report.rhs, 0.25, atol=1e-14)

    def test_factorization_needs_separation(self, half):
        with pytest.raises(PreconditionError, match="not separated"):
            factorization_check(half, [(1, 3), (2, 4)])


class TestUncorrelatedSquares:
    def test_two_ranges(self, half):
        report = uncorrelated_squares_check(half, constant(), [(1, 2), (3, 4)])
        assert report.passed
        assert report.relative

    def test_single_indices_give_one(self, half):
        report = uncorrelated_squares_check(half, constant(), [(1, 1), (2, 2), (3, 3)])
        assert_allclose(report.lhs, 1.0)
        assert report.passed

    def test_random_coefficients(self):
        f = make_blaschke(1.0, [0, 0.35])
        rng = np.random.default_rng(3)
        seq = explicit(rng.normal(size=9) + 1j * rng.normal(size=9))
        assert uncorrelated_squares_check(f, seq, [(1, 3), (4, 6), (7, 9)]).passed

    def test_ranges_must_be_ordered(self, half):
        with pytest.raises(PreconditionError):
            uncorrelated_squares_check(half, constant(), [(1, 3), (3, 4)])


class TestFourFactor:
    def test_cancellation(self, half):
        for e1 in (1, -1):
            report = four_factor_check(half, "cancellation", (1, 2, 3, 4), (e1, -e1, 1, 1))
            assert report.passed
            assert abs(report.lhs) < 1e-9

    def test_equality(self, half):
        report = four_factor_check(half, "equality", (1, 2, 3, 5), (-1, 1, -1, 1))
        assert report.passed
        assert_allclose(report.rhs, 0.125)

    def test_equality_on_grid(self, half):
        report = four_factor_check(half, "equality", (1, 2, 3, 5), (-1, 1, -1, 1), method="grid")
        assert_allclose(abs(report.lhs), 0.125, atol=1e-9)

    def test_equality_sign_condition(self, half):
        with pytest.raises(PreconditionError):
            four_factor_check(half, "equality", (1, 2, 3, 5), (1, 1, -1, 1))

    def test_cancellation_ordering(self, half):
        with pytest.raises(PreconditionError):
            four_factor_check(half, "cancellation", (1, 3, 2, 4), (1, -1, 1, 1))

    def test_squared_reports_fitted_constant(self, half):
        report = squared_factor_check(half, (1, 2, 3), (1, 1, -1))
        assert report.details["exponent"] == 2
        assert report.details["fitted_constant"] is not None
        bounded = squared_factor_check(half, (1, 2, 3), (1, 1, -1),
                                       constant=report.details["fitted_constant"] * 1.01)
        assert bounded.passed

    def test_squared_with_vanishing_multiplier(self, square):
        # (z^2)^2 * z^4 * conj(z^8) integrates to 1 while a = 0
        report = squared_factor_check(square, (1, 2, 3), (1, 1, -1), constant=1.0)
        assert report.details["fitted_constant"] is None
        assert report.passed
        assert_allclose(report.lhs, 1.0)

    def test_generic_exponent(self, half):
        wide = generic_four_factor(half, (1, 2, 3, 7), (1, 1, -1, 1))
        narrow = generic_four_factor(half, (1, 2, 3, 4), (1, 1, -1, 1))
        assert wide.details["exponent"] == 5
        assert narrow.details["exponent"] == 2

    def test_rotation_rejected(self):
        with pytest.raises(DomainError):
            four_factor_check(make_blaschke(1.0, [0]), "equality", (1, 2, 3, 5), (-1, 1, -1, 1))

    def test_unknown_case(self, half):
        with pytest.raises(DomainError):
            four_factor_check(half, "sixfold", (1, 2, 3, 4), (1, 1, 1, 1))


class TestDecayFit:
    def test_two_factors_follow_multiplier(self, half):
        fit = decay_fit(half, 2, (-1, 1), range(1, 9))
        assert abs(fit.slope - math.log(0.5)) < 1e-6
        assert fit.passed

    @pytest.mark.parametrize("zeros, a", [([0, 0.5], 0.5), ([0, 0.7, 0.3j], 0.21)])
    def test_two_factor_ratios(self, zeros, a):
        fit = decay_fit(make_blaschke(1.0, zeros), 2, (-1, 1), range(1, 9))
        mags = np.array(fit.magnitudes)
        assert_allclose(mags[1:] / mags[:-1], a, rtol=0, atol=1e-9)

    def test_alternating_four_factors(self, half):
        fit = decay_fit(half, 4, (-1, 1, -1, 1), range(3, 11))
        assert fit.passed
        assert fit.slope <= math.log(0.5) + 0.05
        assert fit.fitted_constant is not None

    def test_vanishing_multiplier_underflows(self, square):
        fit = decay_fit(square, 2, (-1, 1), range(1, 6))
        assert fit.underflow
        assert fit.passed
        assert "underflow" in fit.note

    @pytest.mark.parametrize("k, signs, q_values", [
        (7, (1,) * 7, [1, 2]),
        (2, (1, 1, 1), [1, 2]),
        (2, (1, -1), [3, 2]),
        (2, (1, -1), []),
    ])
    def test_bad_inputs(self, half, k, signs, q_values):
        with pytest.raises(PreconditionError):
            decay_fit(half, k, signs, q_values)

    def test_q_min(self, half):
        with pytest.raises(PreconditionError, match="q_min"):
            decay_fit(half, 2, (-1, 1), [1, 2, 3], q_min=2)


class TestNorms:
    def test_gram_coefficients(self, half):
        assert_allclose(gram_coefficients(half, 4), [1, 0.5, 0.25, 0.125], atol=1e-15)

    def test_gram_norm(self, half):
        assert_allclose(norm2_squared(half, constant(), 8, method="gram"), 20.015625, rtol=1e-12)

    def test_boundary_norm(self, half):
        assert_allclose(norm2_squared(half, constant(), 4, method="boundary"),
                        sigma2(constant(), 0.5, 4), rtol=1e-8)

    @pytest.mark.parametrize("seed", range(4))
    def test_gram_matches_variance_formula(self, seed):
        f = make_blaschke(cmath.exp(0.7j), [0, 0.7, 0.3j])
        rng = np.random.default_rng(seed)
        seq = explicit(rng.normal(size=40) + 1j * rng.normal(size=40))
        assert_allclose(norm2_squared(f, seq, 40), sigma2(seq, f.multiplier, 40), rtol=1e-8)

    def test_unknown_norm_method(self, half):
        with pytest.raises(DomainError):
            norm2_squared(half, constant(), 4, method="simpson")

    def test_comparability(self, half):
        reports = norm_comparability_check(half, constant(), 8)
        failed = [r for r in reports if not r.passed]
        assert not failed, failed
        ratio = [r for r in reports if r.description.startswith("L4/L2")][0]
        assert ratio.details["fitted_constant"] >= 1.0


class TestIdentitySuite:
    @pytest.mark.parametrize("zeros", [[0, 0], [0, 0.5], [0, 0.7, 0.3j], [0, -0.5, 0.7j]])
    def test_small_suite_passes(self, zeros):
        f = make_blaschke(1.0, zeros)
        reports = identity_suite(f, n_max=4)
        failed = [r for r in reports if not r.passed]
        assert not failed, failed

    @pytest.mark.slow
    def test_full_suite(self, half):
        assert all(r.passed for r in identity_suite(half, n_max=12))
