import cmath

import numpy as np
import pytest
from numpy.testing import assert_allclose

from inner_clt.circle_quad import uniform_grid
from inner_clt.clark import (clark_measure, clark_suite, moment, power_moment_integral,
                             trig_integral, verify_disintegration, verify_moments)
from inner_clt.errors import DomainError, PreconditionError
from inner_clt.inner_core import evaluate, make_blaschke


class TestClarkMeasure:
    def test_square_at_one(self, square):
        mu = clark_measure(square, 1.0)
        assert_allclose(sorted(mu.points, key=lambda z: -z.real), [1, -1], atol=1e-14)
        assert_allclose(mu.weights, [0.5, 0.5])

    def test_square_at_minus_one(self, square):
        mu = clark_measure(square, -1.0)
        assert_allclose(mu.points, [1j, -1j], atol=1e-14)
        assert_allclose(mu.weights, [0.5, 0.5])

    @pytest.mark.parametrize("theta", [0.0, 0.4, 2.5, 5.9])
    def test_atoms_are_preimages_with_unit_mass(self, half, theta):
        alpha = cmath.exp(1j * theta)
        mu = clark_measure(half, alpha)
        assert len(mu.atoms) == 2
        assert_allclose(np.abs(mu.points), 1.0, atol=1e-14)
        assert_allclose(evaluate(half, mu.points), alpha, atol=1e-12)
        assert_allclose(mu.total_mass, 1.0, atol=1e-12)

    def test_degree_three(self):
        f = make_blaschke(cmath.exp(0.7j), [0, 0.7, 0.3j])
        mu = clark_measure(f, 1j)
        assert len(mu.atoms) == 3
        assert_allclose(mu.total_mass, 1.0, atol=1e-12)

    def test_alpha_off_circle(self, half):
        with pytest.raises(DomainError):
            clark_measure(half, 0.5)


class TestMoments:
    def test_square_second_moment(self, square):
        assert_allclose(moment(clark_measure(square, 1.0), 2), 1.0)

    def test_half_first_moment(self, half):
        assert_allclose(moment(clark_measure(half, 1.0), 1), 0.5, atol=1e-12)

    def test_half_second_moment(self, half):
        assert_allclose(moment(clark_measure(half, 1.0), 2), -0.5, atol=1e-12)

    def test_moment_order_limit(self, half):
        with pytest.raises(PreconditionError):
            moment(clark_measure(half, 1.0), 65)

    def test_verify_moments(self, half):
        results = verify_moments(half, cmath.exp(0.3j), 8)
        assert len(results) == 8
        assert all(r.passed for r in results), [r for r in results if not r.passed]

    def test_verify_moments_range(self, half):
        with pytest.raises(PreconditionError):
            verify_moments(half, 1.0, 17)

    def test_power_moment_needs_large_enough_grid(self, half):
        with pytest.raises(PreconditionError):
            power_moment_integral(half, 2, 3, grid=uniform_grid(8))

    def test_power_moment_of_square(self, square):
        # f(z)^2 = z^4
        assert_allclose(power_moment_integral(square, 2, 4), 1.0, atol=1e-14)


class TestDisintegration:
    def test_trig_integral_of_z_cancels_for_square(self, square):
        for theta in (0.0, 1.1, 3.0):
            mu = clark_measure(square, cmath.exp(1j * theta))
            assert abs(trig_integral(mu, [0.0, 0.0, 1.0])) < 1e-14

    def test_conjugate_z_averages_to_zero(self, half):
        check = verify_disintegration(half, [1.0, 0.0, 0.0], 5)
        assert check.residual < 1e-10

    def test_mixed_polynomial(self, half):
        check = verify_disintegration(half, [0.5, -1j, 2.0, 0.0, 3.0], 9)
        assert_allclose(check.rhs, 2.0)
        assert check.residual < 1e-10

    def test_alpha_grid_too_small(self, square):
        with pytest.raises(PreconditionError):
            verify_disintegration(square, [0.0, 1.0, 0.0], 4)

    def test_even_length(self, square):
        with pytest.raises(PreconditionError):
            verify_disintegration(square, [0.0, 1.0], 8)


class TestSuite:
    def test_small_suite_passes(self, half):
        results = clark_suite(half, n_alpha=16, l_max=4, m_max=3)
        failed = [r for r in results if not r.passed]
        assert not failed, failed

    @pytest.mark.slow
    @pytest.mark.parametrize("zeros", [
        [0, 0.5],
        [0, 0.7, 0.3j],
        [0, 0, 0.5, -0.7j],
        [0, 0, 0, 0.3, -0.7],
    ])
    def test_full_suite(self, zeros):
        f = make_blaschke(1.0, zeros)
        results = clark_suite(f, n_alpha=64, l_max=8, m_max=8)
        assert all(r.passed for r in results)
