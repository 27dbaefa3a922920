import cmath

import numpy as np
from django.test import SimpleTestCase
from numpy.polynomial import Polynomial

from core.exceptions import PoleError
from correlators import services as cor
from spectral_curve import services as sc
from spectral_curve.one_matrix import solve_one_cut
from spectral_curve.params import ModelParams


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def _strip_points(geom, count, seed):
    rng = np.random.default_rng(seed)
    tau = geom.tau
    return [complex(rng.uniform(-0.45, 0.45), rng.uniform(0.2, 0.8) * tau.imag) for _ in range(count)]


class LoopGasCorrelatorTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.params = ModelParams.from_hat(1.0, 0.05, 2.0, (0, 0, 0, 0.1))
        cls.geom = sc.solve_endpoints(cls.params)
        cls.cfg = cor.KernelConfig.from_settings()
        cls.points = _strip_points(cls.geom, 8, 5)
        cls.partners = _strip_points(cls.geom, 8, 6)

    def test_w1_contour_matches_algebraic_form(self):
        geom = self.geom
        for x0 in (0.3 + 0.4j, -1.2 + 0.2j, 2.6 - 0.5j, 0.2j):
            u0 = sc.uniformize(x0, geom)
            self.assertLess(_rel(cor.w1_disc(x0, geom), cor.w1_algebraic(u0, geom)), 1e-9)

    def test_w1_behaviour_at_infinity(self):
        geom = self.geom
        coeffs = sc.coefficients_at_infinity(lambda u: cor.w1_algebraic(u, geom), geom, [1, 0, -1])
        np.testing.assert_allclose(coeffs, [0, 0, self.params.t], atol=1e-9)

    def test_spectral_curve_is_loop_equation_combination(self):
        geom = self.geom
        for u in self.points:
            scale = abs(sc.y_of(u, geom)) + abs(self.params.potential_derivative(sc.x_of_u(u, geom)))
            self.assertLess(abs(cor.loop_equation_defect(u, geom)), 1e-9 * scale)

    def test_saddle_point_equation_on_the_cut(self):
        geom = self.geom
        tau = geom.tau
        for s in (0.17, 0.31, -0.22):
            x = sc.x_of_u(tau + s, geom)
            lhs = (cor.w1_algebraic(tau + s, geom) + cor.w1_algebraic(tau - s, geom)
                   + geom.n * cor.w1_algebraic(-s, geom))
            rhs = complex(self.params.potential_derivative(x))
            self.assertLess(abs(lhs - rhs), 1e-9 * max(abs(rhs), 1.0))

    def test_wbar2_symmetric(self):
        geom = self.geom
        for u, u0 in zip(self.points, self.partners):
            self.assertLess(_rel(cor.wbar2(u, u0, geom, self.cfg), cor.wbar2(u0, u, geom, self.cfg)), 1e-12)

    def test_wbar2_truncation_converged(self):
        geom = self.geom
        u, u0 = self.points[0], self.partners[0]
        m_max = self.cfg.m_max(geom.tau, 2 * geom.tau.imag)
        short = self.cfg.with_overrides(series_m_max=m_max)
        wide = self.cfg.with_overrides(series_m_max=2 * m_max)
        self.assertLess(abs(cor.wbar2(u, u0, geom, short) - cor.wbar2(u, u0, geom, wide)), 1e-12)

    def test_wbar2_pole(self):
        with self.assertRaises(PoleError):
            cor.wbar2(self.points[0], self.points[0], self.geom, self.cfg)

    def test_bergman_decomposition(self):
        geom = self.geom
        for u, u0 in zip(self.points, self.partners):
            self.assertLess(_rel(cor.wbar2_from_bergman(u, u0, geom), cor.wbar2(u, u0, geom, self.cfg)), 1e-9)

    def test_wbar2_is_universal(self):
        geom = self.geom
        other = ModelParams.from_hat(1.0, 0.07, 2.0, (0, 0, 0, 0.3))
        twin = sc.build_geometry(geom.a, geom.b, other)
        for u, u0 in zip(self.points[:3], self.partners[:3]):
            self.assertLess(_rel(cor.wbar2(u, u0, twin, self.cfg), cor.wbar2(u, u0, geom, self.cfg)), 1e-12)

    def test_closed_form_matches_series(self):
        geom = self.geom
        for u, u0 in zip(self.points, self.partners):
            closed = cor.w2_closed_at(u0, u, geom)
            self.assertLess(_rel(closed, cor.w2_series(u0, u, geom, self.cfg)), 1e-8)
            self.assertLess(_rel(cor.w2_closed_at(u, u0, geom), closed), 1e-10)

    def test_closed_form_in_x(self):
        geom = self.geom
        x0, x = 0.4 + 0.3j, -1.5 + 0.6j
        expected = cor.w2_closed_at(sc.uniformize(x0, geom), sc.uniformize(x, geom), geom)
        self.assertLess(_rel(cor.w2_closed(x0, x, geom), expected), 1e-12)

    def _extrapolated_average(self, centre, u, delta=2e-3):
        """Two-sided average of w2_series around centre, with the delta**2 term removed."""
        def average(d):
            return 0.5 * (cor.w2_series(centre + d, u, self.geom, self.cfg)
                          + cor.w2_series(centre - d, u, self.geom, self.cfg))
        return (4 * average(delta / 2) - average(delta)) / 3

    def test_diagonal_limit(self):
        geom = self.geom
        for u in self.points[:4]:
            self.assertLess(_rel(cor.w2_closed_at(u, u, geom), self._extrapolated_average(u, u)), 1e-6)

    def test_antidiagonal_limit(self):
        geom = self.geom
        for u in self.points[:4]:
            mirror = geom.tau - u
            self.assertLess(_rel(cor.w2_closed_at(mirror, u, geom), self._extrapolated_average(mirror, u)), 1e-6)

    def test_decay_at_infinity(self):
        geom = self.geom
        u = self.points[0]
        scaled = []
        for h in (1e-3, 5e-4):
            u0 = geom.u_infinity + h
            scaled.append(sc.x_of_u(u0, geom) ** 2 * cor.w2_closed_at(u0, u, geom))
        self.assertLess(_rel(scaled[1], scaled[0]), 1e-2)

    def test_kernel_H_is_primitive(self):
        geom = self.geom
        h = 1e-5
        for u, u0 in zip(self.points[:4], self.partners[:4]):
            derivative = (cor.kernel_H_at(u0, u + h, geom) - cor.kernel_H_at(u0, u - h, geom)) / (2 * h)
            derivative /= sc.s_of_u(u, geom)
            expected = cor.wbar2(u, u0, geom, self.cfg) / (sc.s_of_u(u, geom) * sc.s_of_u(u0, geom))
            self.assertLess(_rel(derivative, expected), 1e-6)

    def test_kernel_H_vanishes_at_infinity(self):
        geom = self.geom
        u0 = self.partners[0]
        self.assertLess(abs(cor.kernel_H_at(u0, geom.u_infinity + 1e-5, geom)), 1e-3)

    def test_I_regular_at_minus_e(self):
        geom = self.geom
        u_minus_e = geom.tau - (geom.tau - geom.mu) / 2
        left = cor.I_at(u_minus_e - 1e-6, geom)
        right = cor.I_at(u_minus_e + 1e-6, geom)
        self.assertLess(abs(left - right), 1e-4 * max(abs(left), 1.0))

    def test_cauchy_kernel(self):
        geom = self.geom
        h = 1e-5
        u0 = self.partners[1]
        self.assertLess(abs(cor.cauchy_G(u0, geom.u_infinity, geom, self.cfg)), 1e-12)
        for u in self.points[:3]:
            derivative = (cor.cauchy_G(u0, u + h, geom, self.cfg) - cor.cauchy_G(u0, u - h, geom, self.cfg)) / (2 * h)
            expected = (2 * cor.wbar2(u, u0, geom, self.cfg)
                        + geom.n * cor.wbar2(geom.tau - u, u0, geom, self.cfg)) / sc.s_of_u(u0, geom)
            self.assertLess(_rel(derivative, expected), 1e-6)

    def test_recursion_kernel_antisymmetric(self):
        geom = self.geom
        u0 = self.partners[2]
        for v in geom.branch_points:
            u = v + 0.03 + 0.01j
            u_bar = cor.conjugate_point(u, geom)
            self.assertLess(abs(u_bar - (2 * v - u)), 1e-15)
            forward = cor.rec_kernel(u0, u, geom, self.cfg)
            self.assertLess(_rel(cor.rec_kernel(u0, u_bar, geom, self.cfg), -forward), 1e-10)
            self.assertLess(_rel(cor.rec_kernel(u0, u, geom, self.cfg, quadrature=True), forward), 1e-10)

    def test_recursion_kernel_uses_primitive(self):
        geom = self.geom
        u0 = self.partners[1]
        u = geom.v2 + 0.04 - 0.02j
        u_bar = cor.conjugate_point(u, geom)
        integral = cor.wbar2_primitive(u, u0, geom, self.cfg) - cor.wbar2_primitive(u_bar, u0, geom, self.cfg)
        expected = -0.5 * integral / (sc.y_of(u, geom) * sc.s_of_u(u, geom))
        self.assertLess(_rel(cor.rec_kernel(u0, u, geom, self.cfg), expected), 1e-12)

    def test_recursion_kernel_leading_term(self):
        geom = self.geom
        u0 = self.partners[3]
        h, delta = 1e-4, 1e-4
        for v in geom.branch_points:
            y_prime = (sc.y_of(v + h, geom) - sc.y_of(v - h, geom)) / (2 * h)
            s_prime = (sc.s_of_u(v + h, geom) - sc.s_of_u(v - h, geom)) / (2 * h)
            leading = -cor.wbar2(v, u0, geom, self.cfg) / (y_prime * s_prime)
            self.assertLess(_rel(delta * cor.rec_kernel(u0, v + delta, geom, self.cfg), leading), 1e-6)


class LoopFreeCorrelatorTests(SimpleTestCase):
    """n = 0 against the independent one-matrix formulas."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.params = ModelParams.from_hat(0.0, 0.04, 2.0, (0, 0, 0, 0.15))
        cls.geom = sc.solve_endpoints(cls.params)
        cls.reference = solve_one_cut(Polynomial(cls.params.derivative_coefficients()), cls.params.t)
        cls.points = _strip_points(cls.geom, 6, 9)
        cls.partners = _strip_points(cls.geom, 6, 10)

    def test_resolvent(self):
        geom = self.geom
        for u in self.points:
            x = sc.x_of_u(u, geom)
            self.assertLess(_rel(cor.w1_algebraic(u, geom), complex(self.reference.resolvent(x))), 1e-8)

    def test_two_point_function(self):
        geom = self.geom
        for u, u0 in zip(self.points, self.partners):
            x, x0 = sc.x_of_u(u, geom), sc.x_of_u(u0, geom)
            expected = complex(self.reference.two_point(x0, x))
            self.assertLess(_rel(cor.w2_series(u0, u, geom), expected), 1e-8)
            self.assertLess(_rel(cor.w2_closed_at(u0, u, geom), expected), 1e-8)

    def test_two_point_diagonal(self):
        geom = self.geom
        for u in self.points:
            x = sc.x_of_u(u, geom)
            expected = complex(self.reference.two_point_diagonal(x))
            self.assertLess(_rel(cor.w2_closed_at(u, u, geom), expected), 1e-8)

    def test_leading_vertex_term(self):
        # W = t/(x - c/2) + O(t^2); at small t the t^1 part dominates far from the cut
        geom = self.geom
        x = 6.0 + 1.0j
        value = cor.w1(x, geom)
        first_order = self.params.t / (x - self.params.c / 2)
        self.assertLess(_rel(value, first_order), 0.05)
        self.assertTrue(cmath.isfinite(value))
