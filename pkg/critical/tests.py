import cmath
import json
import math

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import ConfigurationError, DomainError, PoleError
from spectral_curve.params import ModelParams

from .exports import export_fits_csv, export_phase_table_csv, export_phase_table_json
from .services import (
    ExponentFit, PhaseRecord, alpha_kg, approach_geometries, chebyshev_pairing, chebyshev_s, chebyshev_t,
    critical_endpoint, dense_disc, dense_solution, fpl_limit_curve, locate_critical_t, phase_table,
    small_a_asymptotics, small_x_exponent,
)


def _linear_potential(n):
    """V'(x) = x."""
    return ModelParams(n=n, t=0.1, c=1.0, pot=(0, 0, 1))


class ChebyshevTests(SimpleTestCase):
    def setUp(self):
        rng = np.random.default_rng(11)
        self.points = rng.normal(size=6) + 1j * rng.normal(size=6)

    def test_norm_of_t(self):
        for n in (-1.2, 0.0, 0.8, 1.5):
            mu = ModelParams.fpl(n, 0.1, 1.0).mu
            values = chebyshev_pairing(lambda z: chebyshev_t(z, mu), lambda z: chebyshev_t(z, mu), self.points, n)
            np.testing.assert_allclose(values, math.sin(math.pi * mu) ** 2, atol=1e-10)

    def test_companion_is_orthogonal(self):
        n = 0.6
        mu = ModelParams.fpl(n, 0.1, 1.0).mu
        z = self.points
        cross = chebyshev_pairing(lambda w: chebyshev_t(w, mu), lambda w: chebyshev_s(w, mu), z, n)
        norm = chebyshev_pairing(lambda w: chebyshev_s(w, mu), lambda w: chebyshev_s(w, mu), z, n)
        np.testing.assert_allclose(cross, 0, atol=1e-10)
        np.testing.assert_allclose(norm, (1 - z ** 2) / z ** 2 * math.sin(math.pi * mu) ** 2, rtol=1e-10)


class DenseSolutionTests(SimpleTestCase):
    def test_fully_packed_coefficients(self):
        for n in (0.0, 1.0):
            params = _linear_potential(n)
            solution = dense_solution(1.3, params)
            half = math.sin(math.pi * params.mu / 2)
            self.assertAlmostEqual(solution.a_coeffs[0], 1.3 * params.mu * half, delta=1e-10)
            self.assertAlmostEqual(solution.a_hat_coeffs[0], 1.3 * half, delta=1e-10)

    def test_shifted_quadratic_adds_constant(self):
        params = ModelParams.fpl(1.0, 0.1, 2.0)
        solution = dense_solution(1.3, params)
        mu = params.mu
        expected = 1.3 * mu * math.sin(math.pi * mu / 2) + math.cos(math.pi * mu / 2)
        self.assertAlmostEqual(solution.a_coeffs[0], expected, delta=1e-10)

    def test_gaussian_limit(self):
        params = ModelParams.fpl(0.0, 0.25, 2.0)
        solution = dense_solution(2.0, params)
        self.assertAlmostEqual(solution.t, 0.25, delta=1e-12)
        for x in (3.0, 2.5 + 1j, -1.0):
            exact = ((x - 1) - cmath.sqrt(x - 2) * cmath.sqrt(x)) / 2
            self.assertAlmostEqual(solution.resolvent(x), exact, delta=1e-12)
        for x in (0.3, 1.0, 1.7):
            _, rho = dense_disc(x, 2.0, params, side=1)
            self.assertAlmostEqual(rho, 2 / math.pi * math.sqrt(x * (2 - x)), delta=1e-10)

    def test_linear_equation_on_the_cut(self):
        params = ModelParams.from_hat(0.7, 0.05, 2.0, (0, 0, 0, 0.1, 0.02))
        solution = dense_solution(1.5, params)
        for x in (0.3, 0.9, 1.4):
            self.assertLess(abs(solution.linear_equation_defect(x)), 1e-10)

    def test_density_is_normalized(self):
        for params, b in ((ModelParams.fpl(1.0, 0.1, 2.0), 1.2),
                          (ModelParams.from_hat(-0.5, 0.05, 2.0, (0, 0, 0, 0.1, 0.02)), 1.5)):
            solution = dense_solution(b, params)
            self.assertAlmostEqual(solution.normalization(), 1.0, delta=1e-7)

    def test_decay_at_infinity(self):
        solution = dense_solution(1.2, ModelParams.fpl(0.5, 0.1, 2.0))
        x = 1e4
        self.assertAlmostEqual(x * solution.resolvent(x), solution.t, delta=1e-3 * abs(solution.t))

    def test_cut_needs_a_side(self):
        params = ModelParams.fpl(0.5, 0.1, 2.0)
        with self.assertRaises(DomainError):
            dense_disc(0.5, 1.2, params)
        with self.assertRaises(PoleError):
            dense_disc(0.0, 1.2, params, side=1)


class FullyPackedLimitTests(SimpleTestCase):
    def test_regular_endpoint_of_gaussian(self):
        params = ModelParams.fpl(0.0, 0.25, 2.0)
        b = critical_endpoint(params)
        self.assertAlmostEqual(b, 2.0, delta=1e-10)
        self.assertAlmostEqual(dense_solution(b, params).t, 0.25, delta=1e-10)

    def test_regular_endpoint_closed_form(self):
        params = ModelParams.fpl(1.0, 0.1, 2.0)
        mu = params.mu
        expected = params.c / (2 * (1 - mu) * math.tan(math.pi * mu / 2))
        self.assertAlmostEqual(critical_endpoint(params), expected, delta=1e-10)

    def test_matches_dense_discontinuity(self):
        for n in (0.0, 1.0):
            params = ModelParams.fpl(n, 0.1, 2.0)
            b = critical_endpoint(params)
            solution = dense_solution(b, params)
            for zeta in (0.1, 0.5, 1.0, 2.0, 4.0):
                self.assertAlmostEqual(fpl_limit_curve(zeta, params, b), complex(solution.y_cut(zeta)), delta=1e-8)

    def test_half_integer_closed_form(self):
        params = ModelParams.fpl(0.0, 0.25, 2.0)
        for zeta in (0.2, 0.7, 1.5):
            x = 2.0 / math.cosh(zeta)
            self.assertAlmostEqual(fpl_limit_curve(zeta, params), 1j * math.sqrt(x * (2 - x)), delta=1e-9)

    def test_small_x_power(self):
        params = ModelParams.fpl(1.0, 0.1, 2.0)
        ratios = []
        for zeta in (25.0, 30.0):
            x = 2.0 / math.cosh(zeta)
            ratios.append(abs(fpl_limit_curve(zeta, params)) / x ** params.mu)
        self.assertAlmostEqual(ratios[0] / ratios[1], 1.0, delta=1e-6)
        self.assertEqual(fpl_limit_curve(0.0, params), 0)

    def test_exponent_matches_dense_phase(self):
        params = ModelParams.fpl(1.0, 0.1, 2.0)
        solution = dense_solution(critical_endpoint(params), params)
        (dense,) = phase_table(2, params.mu)
        self.assertAlmostEqual(small_x_exponent(solution), dense.lambda_, delta=1e-2)

    def test_needs_quadratic_potential(self):
        with self.assertRaises(ConfigurationError):
            fpl_limit_curve(1.0, ModelParams.from_hat(0.0, 0.1, 2.0, (0, 0, 0, 0.1)))


class PhaseTableTests(SimpleTestCase):
    def test_cubic_potential(self):
        dense, dilute = phase_table(3, 0.5)
        self.assertEqual((dense.epsilon, dense.m, dense.name), (-1, 0, 'dense'))
        self.assertEqual((dilute.epsilon, dilute.m, dilute.name), (1, 0, 'dilute'))
        self.assertAlmostEqual(dense.lambda_, 0.5)
        self.assertAlmostEqual(dilute.lambda_, 1.5)
        self.assertAlmostEqual(dense.gamma_str, -1.0)
        self.assertAlmostEqual(dilute.gamma_str, -0.5)

    def test_phase_counts(self):
        self.assertEqual([(r.epsilon, r.m) for r in phase_table(2, 0.3)], [(-1, 0)])
        self.assertEqual(len(phase_table(4, 0.3)), 3)
        self.assertNotIn((1, 1), [(r.epsilon, r.m) for r in phase_table(4, 0.3)])
        self.assertEqual(len(phase_table(5, 0.3)), 4)
        self.assertEqual(len(phase_table(7, 0.3)), 6)

    def test_invariants(self):
        for mu in (0.1, 0.5, 0.9):
            for record in phase_table(7, mu):
                self.assertAlmostEqual(record.lambda_, record.epsilon * (1 - mu) + 2 * record.m + 1)
                self.assertAlmostEqual(2 * record.beta, record.alpha + mu)
                self.assertLess(record.gamma_str, 0)
                self.assertAlmostEqual(record.alpha_kg(1, 0), record.alpha)

    def test_alpha_kg(self):
        self.assertEqual(alpha_kg(0.5, 0, 1), 0)
        self.assertEqual(alpha_kg(0.5, 2, 0), -2)

    def test_too_small_degree(self):
        with self.assertRaises(DomainError):
            phase_table(1, 0.5)

    def test_exports(self):
        records = phase_table(3, 0.5)
        lines = export_phase_table_csv(records, kg=((1, 0),)).getvalue().splitlines()
        self.assertEqual(lines[0], 'name,epsilon,m,mu,lambda,alpha,beta,gamma_str,"alpha(1,0)"')
        self.assertTrue(lines[1].startswith('dense,-1,0,0.5,0.5,'))
        payload = json.loads(export_phase_table_json(records, kg=((2, 1),)))
        self.assertEqual(payload[1]['name'], 'dilute')
        self.assertAlmostEqual(payload[1]['alpha_kg']['2,1'], -2 * 2.5 - 2)

    def test_record_build(self):
        record = PhaseRecord.build(1, 1, 0.25)
        self.assertAlmostEqual(record.lambda_, 0.75 + 3)


class ApproachTests(SimpleTestCase):
    """n = 0 with the Gaussian potential: a = c/2 - 2 sqrt(t), critical at t = c^2/16."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.params = ModelParams.fpl(0.0, 0.1, 2.0)

    def test_fits_need_four_samples(self):
        with self.assertRaises(ConfigurationError):
            small_a_asymptotics([None] * 3)

    def test_locate_critical_t(self):
        point = locate_critical_t(self.params, 0.1, 0.3, threshold=1e-2)
        self.assertLessEqual(point.a_over_b, 1e-2)
        self.assertLessEqual(point.t_below, 0.25)
        self.assertLess(point.t_below, point.t_above)
        self.assertAlmostEqual(point.t_below, 0.25, delta=0.01)

    def test_branch_point_exponent(self):
        a_values = np.geomspace(0.05, 0.005, 5)
        t_values = ((1 - a_values) / 2) ** 2
        geoms = approach_geometries(self.params, t_values)
        for a, geom in zip(a_values, geoms):
            self.assertAlmostEqual(geom.a.real, a, delta=1e-8)
        fits = small_a_asymptotics(geoms)
        fit = fits['e_mu_squared']
        self.assertIsInstance(fit, ExponentFit)
        self.assertAlmostEqual(fit.slope, fit.expected, delta=0.02 * fit.expected)
        lines = export_fits_csv(fits).getvalue().splitlines()
        self.assertEqual(lines[0], 'name,slope,stderr,intercept,r_squared,expected')
        self.assertEqual(len(lines), 4)
