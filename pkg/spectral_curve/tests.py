import cmath
import math

import numpy as np
from django.test import SimpleTestCase
from numpy.polynomial import Polynomial

from core.exceptions import DomainError
from elliptic.services import jacobi
from spectral_curve import services as sc
from spectral_curve.one_matrix import solve_one_cut
from spectral_curve.params import ModelParams, mu_from_n


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


class ModelParamsTests(SimpleTestCase):
    def test_mu_matches_n(self):
        for n in (-1.5, -0.3, 0.0, 1.0, 1.9):
            mu = mu_from_n(n)
            self.assertTrue(0 < mu < 1)
            self.assertAlmostEqual(-2 * math.cos(math.pi * mu), n, places=14)

    def test_fugacity_out_of_range(self):
        with self.assertRaises(DomainError):
            ModelParams.fpl(2.0, 0.1, 1.0)

    def test_inconsistent_mu(self):
        with self.assertRaises(DomainError):
            ModelParams(n=1.0, t=0.1, c=1.0, pot=(0, -0.5, 1), mu=0.5)

    def test_shifted_potential_recombination(self):
        params = ModelParams.from_hat(0.5, 0.03, 1.7, (0, 0, 0, 0.2, -0.05))
        rng = np.random.default_rng(3)
        for x in rng.normal(size=5) + 1j * rng.normal(size=5):
            xh = x - params.c / 2
            vhat = xh ** 2 / 2 - 0.2 * xh ** 3 / 3 + 0.05 * xh ** 4 / 4
            self.assertLess(abs(params.potential(x) - vhat), 1e-12)
        self.assertEqual(params.d_max, 4)

    def test_fully_packed_potential(self):
        params = ModelParams.fpl(1.0, 0.1, 2.0)
        self.assertAlmostEqual(complex(params.potential_derivative(3.0)), 2.0)
        self.assertEqual(params.with_t(0.2).t, 0.2)


class GeometryTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.params = ModelParams.from_hat(1.0, 0.05, 2.0, (0, 0, 0, 0.1))
        cls.geom = sc.solve_endpoints(cls.params)
        rng = np.random.default_rng(11)
        tau = cls.geom.tau
        cls.points = [complex(rng.uniform(-0.45, 0.45), rng.uniform(0.15, 0.85) * tau.imag) for _ in range(10)]

    def test_endpoints_solved(self):
        geom = self.geom
        self.assertLess(geom.residual, 1e-10)
        self.assertTrue(0 < geom.a.real < geom.b.real)
        self.assertLess(abs(geom.a.real - 1.0), 0.5)

    def test_special_points(self):
        geom = self.geom
        tau = geom.tau
        self.assertLess(abs(sc.x_of_u(tau / 2, geom)), 1e-12)
        self.assertLess(_rel(sc.x_of_u(tau, geom), geom.a), 1e-10)
        self.assertLess(_rel(sc.x_of_u(tau + 0.5, geom), geom.b), 1e-10)
        self.assertLess(_rel(sc.x_of_u(0.0, geom), -geom.a), 1e-10)
        self.assertLess(_rel(sc.x_of_u(0.5, geom), -geom.b), 1e-10)
        self.assertTrue(cmath.isinf(sc.x_of_u(geom.u_infinity, geom)))
        values = sc.x_of_u(np.array([geom.u_infinity, tau + 0.5]), geom)
        self.assertTrue(np.isinf(values[0]))
        self.assertLess(_rel(values[1], geom.b), 1e-10)

    def test_symmetries_of_x(self):
        geom = self.geom
        for u in self.points:
            x = sc.x_of_u(u, geom)
            self.assertLess(_rel(sc.x_of_u(geom.tau - u, geom), -x), 1e-10)
            self.assertLess(_rel(sc.x_of_u(-u, geom), x), 1e-10)
            self.assertLess(_rel(sc.x_of_u(u + 1, geom), x), 1e-10)
            self.assertLess(_rel(sc.x_of_u(2 * geom.tau - 1 - u, geom), x), 1e-10)

    def test_sigma(self):
        geom = self.geom
        for u in self.points:
            x, sigma = sc.x_of_u(u, geom), sc.sigma_of_u(u, geom)
            self.assertLess(_rel(sigma ** 2, (x ** 2 - geom.a ** 2) * (x ** 2 - geom.b ** 2)), 1e-9)
            self.assertLess(_rel(sc.sigma_of_x(x, geom), sigma), 1e-9)
        self.assertLess(_rel(sc.sigma_of_u(geom.tau / 2, geom), -geom.a * geom.b), 1e-10)
        e = geom.e_mu
        self.assertLess(_rel(geom.sigma_e_mu ** 2, (e ** 2 - geom.a ** 2) * (e ** 2 - geom.b ** 2)), 1e-9)

    def test_e_mu_from_jacobi(self):
        geom = self.geom
        k = (geom.a / geom.b).real
        sn, _, _ = jacobi(1j * geom.mu * geom.K_prime.real, k)
        self.assertLess(_rel(geom.e_mu, geom.a * sn), 1e-10)
        self.assertAlmostEqual(geom.alpha2, 0.5 * (geom.alpha1 ** 2 + geom.a ** 2 + geom.b ** 2 - geom.e_mu ** 2))

    def test_uniformize_round_trip(self):
        geom = self.geom
        for x in (0.3 + 0.2j, -1.1 + 0.4j, 2.5 - 0.1j, 0.3, 4.0, -3.0, 0.1j):
            u = sc.uniformize(x, geom)
            self.assertLess(abs(sc.x_of_u(u, geom) - x), 1e-10 * max(abs(x), 1.0))
            self.assertTrue(-1e-12 < u.imag < geom.tau.imag + 1e-12)
        self.assertEqual(sc.uniformize(complex('inf'), geom), geom.u_infinity)

    def test_uniformize_rejects_cut(self):
        geom = self.geom
        with self.assertRaises(DomainError):
            sc.uniformize(0.5 * (geom.a + geom.b).real, geom)

    def test_D_mu(self):
        geom = self.geom
        self.assertLess(abs(sc.D_mu((geom.tau - geom.mu) / 2, geom)), 1e-12)
        phase = cmath.exp(-1j * math.pi * geom.mu)
        for u in self.points:
            d = sc.D_mu(u, geom)
            self.assertLess(_rel(sc.D_mu(u + 1, geom), d), 1e-10)
            self.assertLess(_rel(sc.D_mu(u + geom.tau, geom), phase * d), 1e-10)
            x, sigma = sc.x_of_u(u, geom), sc.sigma_of_u(u, geom)
            product = d * sc.D_mu(geom.tau - u, geom)
            self.assertLess(_rel(product, -(x ** 2 - geom.e_mu ** 2) / sigma ** 2), 1e-9)
        near = geom.u_infinity + 1e-6
        self.assertLess(abs(sc.x_of_u(near, geom) * sc.D_mu(near, geom) - 1), 1e-4)

    def test_basis_norms(self):
        geom = self.geom
        for u in self.points:
            x, sigma = sc.x_of_u(u, geom), sc.sigma_of_u(u, geom)
            ff, hh, fh = sc.norms(u, geom)
            self.assertLess(_rel(ff, sc.norm_R(x, geom)), 1e-9)
            self.assertLess(_rel(hh, sc.norm_R_hat(x, geom)), 1e-9)
            self.assertLess(abs(fh), 1e-9 * abs(ff) ** 0.5 * abs(hh) ** 0.5)
            f, fhat = sc.basis(u, geom)
            f_m, fhat_m = sc.reflected_basis(u, geom)
            self.assertLess(_rel(f * fhat_m - f_m * fhat, sc.wronskian(x, sigma, geom)), 1e-9)

    def test_basis_solves_homogeneous_equation(self):
        geom = self.geom
        for u in self.points[:4]:
            f = sc.basis(u, geom)[0]
            self.assertLess(_rel(sc.basis(-u, geom)[0], f), 1e-10)
            self.assertLess(_rel(sc.basis(u + 1, geom)[0], f), 1e-10)
            shifted = sc.basis(u + 2 * geom.tau, geom)[0] + geom.n * sc.basis(u + geom.tau, geom)[0] + f
            self.assertLess(abs(shifted), 1e-9 * abs(f))

    def test_asymptotics(self):
        geom = self.geom
        E = geom.phase
        f_coeffs = sc.coefficients_at_infinity(lambda u: sc.basis(u, geom)[0], geom, [0, -1, -2, -3])
        np.testing.assert_allclose(
            f_coeffs, [0, 1, (1 + E) / (1 - E) * geom.alpha1, geom.alpha2], atol=1e-9, rtol=1e-9)
        h_coeffs = sc.coefficients_at_infinity(lambda u: sc.basis(u, geom)[1], geom, [0, -1, -2])
        h_second = (geom.alpha1 ** 2 - geom.e_mu ** 2) / 2
        np.testing.assert_allclose(h_coeffs, [1, (1 - E) / (1 + E) * geom.alpha1, h_second], atol=1e-9, rtol=1e-9)

    def test_branch_behaviour(self):
        geom = self.geom
        for v, endpoint in ((geom.v1, geom.a), (geom.v2, geom.b)):
            u = v + 1e-6 * (1 + 1j)
            value = sc.sigma_of_u(u, geom) * sc.basis(u, geom)[0]
            expected = (2 - geom.n) * (endpoint ** 2 - geom.e_mu ** 2)
            self.assertLess(_rel(value ** 2, expected), 1e-4)

    def test_differential_system(self):
        geom = self.geom
        h = 1e-5

        def vector(u):
            f, fhat = sc.basis(u, geom)
            return np.array([f, sc.x_of_u(u, geom) * fhat / sc.sigma_of_u(u, geom)])

        for u in self.points[:4]:
            derivative = (vector(u + h) - vector(u - h)) / (2 * h) / sc.s_of_u(u, geom)
            expected = sc.differential_system(u, geom) @ vector(u)
            self.assertLess(np.max(np.abs(derivative - expected)), 1e-6 * np.max(np.abs(expected)))

    def test_curve_polys(self):
        geom = self.geom
        polys = sc.curve_polys(geom)
        self.assertEqual(len(polys.A), self.params.d_max - 1)
        self.assertEqual(len(polys.B), self.params.d_max)
        self.assertLess(polys.odd_defect, 1e-9)

    def test_y_is_odd_at_branch_points(self):
        geom = self.geom
        for v in geom.branch_points:
            plus = sc.y_of(v + 1e-3, geom)
            minus = sc.y_of(v - 1e-3, geom)
            self.assertGreater(abs(plus), 1e-8)
            self.assertLess(abs(plus + minus), 1e-8 * abs(plus))

    def test_record(self):
        record = self.geom.to_record()
        self.assertEqual(record['schema'], 'loopcurve.report/1')
        self.assertEqual(record['params']['n'], 1.0)
        self.assertLess(record['residual'], 1e-10)


class LoopFreeReferenceTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.params = ModelParams.from_hat(0.0, 0.04, 2.0, (0, 0, 0, 0.15))
        cls.geom = sc.solve_endpoints(cls.params)
        cls.reference = solve_one_cut(Polynomial(cls.params.derivative_coefficients()), cls.params.t)

    def test_gaussian_reference(self):
        ref = solve_one_cut(Polynomial([-1.0, 1.0]), 0.09)
        self.assertAlmostEqual(ref.a, 0.4, places=12)
        self.assertAlmostEqual(ref.b, 1.6, places=12)

    def test_endpoints_agree(self):
        self.assertLess(abs(self.geom.a - self.reference.a), 1e-8)
        self.assertLess(abs(self.geom.b - self.reference.b), 1e-8)

    def test_y_agrees(self):
        geom = self.geom
        for u in (geom.tau * 0.3 + 0.1, geom.tau * 0.6 - 0.3, geom.tau * 0.8 + 0.27):
            x = sc.x_of_u(u, geom)
            self.assertLess(_rel(sc.y_of(u, geom), self.reference.y(x)), 1e-8)
