import numpy as np
from django.test import SimpleTestCase, override_settings

from core.conf import numerics
from core.exceptions import ConvergenceError, LoopCurveError, PoleError
from core.quadrature import circle_coefficients, residue, segment_integral
from core.series import LaurentSeries


class LaurentSeriesTests(SimpleTestCase):
    def test_geometric_inverse(self):
        eps = LaurentSeries.variable(order=6)
        inv = 1 / (1 - eps)
        np.testing.assert_allclose(inv.coefficients(), np.ones(7))

    def test_laurent_division_keeps_relative_order(self):
        eps = LaurentSeries.variable(order=5)
        s = eps * (1 + eps * eps)
        q = 1 / s
        self.assertEqual(q.val, -1)
        self.assertAlmostEqual(q.coeff(-1), 1)
        self.assertAlmostEqual(q.coeff(1), -1)

    def test_residue_and_derivative(self):
        eps = LaurentSeries.variable(order=6)
        f = (1 + 2 * eps) / (eps * eps)
        self.assertAlmostEqual(f.residue(), 2)
        d = f.deriv()
        self.assertAlmostEqual(d.coeff(-3), -2)
        self.assertAlmostEqual(d.coeff(-2), -2)

    def test_integrate_rejects_residue(self):
        eps = LaurentSeries.variable(order=4)
        with self.assertRaises(ValueError):
            (1 / eps).integ()
        prim = (eps * eps).integ()
        self.assertAlmostEqual(prim.coeff(3), 1 / 3)

    def test_rescale_and_evaluate(self):
        exp_like = LaurentSeries([1, 1, 0.5, 1 / 6, 1 / 24, 1 / 120])
        self.assertAlmostEqual(complex(exp_like.rescale(0.5)(0.2)), complex(exp_like(0.1)))

    def test_unknown_orders_are_reported(self):
        s = LaurentSeries([1, 2], 0)
        with self.assertRaises(IndexError):
            s.coeff(5)
        self.assertEqual(s.coeff(-3), 0)


class QuadratureTests(SimpleTestCase):
    def test_segment_polynomial_exact(self):
        value = segment_integral(lambda z: z ** 3, 0, 1 + 1j, order=8)
        self.assertAlmostEqual(value, (1 + 1j) ** 4 / 4)

    def test_circle_coefficients_of_exp(self):
        coeffs = circle_coefficients(np.exp, 0.0, 0.5, 64, range(5))
        np.testing.assert_allclose(coeffs, [1, 1, 0.5, 1 / 6, 1 / 24], atol=1e-13)

    def test_residue_of_simple_pole(self):
        self.assertAlmostEqual(residue(lambda z: 3 / (z - 0.1), 0.1, 0.05), 3)


class ConfigurationTests(SimpleTestCase):
    def test_defaults_present(self):
        values = numerics()
        self.assertEqual(values['REPORT_SCHEMA'], 'loopcurve.report/1')
        self.assertGreater(values['INFINITY_NODES'], 0)

    @override_settings(LOOPCURVE={'THETA_TOL': 1e-9})
    def test_settings_override(self):
        self.assertEqual(numerics()['THETA_TOL'], 1e-9)
        self.assertEqual(numerics(theta_tol=1e-6)['THETA_TOL'], 1e-6)


class ExceptionTests(SimpleTestCase):
    def test_hierarchy(self):
        self.assertTrue(issubclass(PoleError, LoopCurveError))
        err = ConvergenceError('stalled', last_iterate=(1 + 2j, 3.0), residual=1e-3)
        self.assertEqual(err.diagnostics()['last_iterate'], [[1.0, 2.0], 3.0])
