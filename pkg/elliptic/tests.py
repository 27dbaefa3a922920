import cmath
import math

import numpy as np
from django.test import SimpleTestCase
from scipy.integrate import quad

from core.exceptions import DomainError, PoleError
from core.quadrature import segment_integral
from elliptic import services as ell


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


class ThetaTests(SimpleTestCase):
    def setUp(self):
        self.mod = ell.Modulus.from_tau(0.8j)
        self.rng = np.random.default_rng(7)

    def test_zero_at_origin(self):
        self.assertLess(abs(ell.theta1(0.0, self.mod)), 1e-15)

    def test_odd(self):
        w = 0.3 + 0.1j
        self.assertLess(abs(ell.theta1(-w, self.mod) + ell.theta1(w, self.mod)), 1e-14)

    def test_quasi_periodicity(self):
        tau = self.mod.tau
        for w in self.rng.uniform(-0.5, 0.5, 20) + 1j * self.rng.uniform(-0.3, 0.3, 20):
            lhs = ell.theta1(w + tau, self.mod)
            rhs = -cmath.exp(-2j * math.pi * (w + tau / 2)) * ell.theta1(w, self.mod)
            self.assertLess(_rel(lhs, rhs), 1e-10)

    def test_one_period(self):
        w = 0.2 + 0.05j
        self.assertLess(abs(ell.theta1(w + 1, self.mod) + ell.theta1(w, self.mod)), 1e-13)

    def test_truncation_is_converged(self):
        wider = ell.Modulus(tau=self.mod.tau, q_truncation=self.mod.q_truncation + 5, tol=self.mod.tol)
        w = 0.37 - 0.21j
        for order in range(4):
            self.assertLess(_rel(ell.theta1(w, self.mod, order), ell.theta1(w, wider, order)), 1e-12)

    def test_modular_transform(self):
        for _ in range(20):
            tau = complex(self.rng.uniform(0.0, 0.6), self.rng.uniform(0.6, 1.5))
            mod = ell.Modulus.from_tau(tau)
            w = complex(self.rng.uniform(-0.5, 0.5), self.rng.uniform(-0.2, 0.2))
            self.assertLess(_rel(ell.modular_transform(w, mod), ell.theta1(w, mod)), 1e-10)

    def test_derivative_vanishes_at_half(self):
        self.assertLess(abs(ell.theta1(0.5, self.mod, 1)), 1e-12)

    def test_derivatives_match_finite_differences(self):
        w, h = 0.13 + 0.07j, 1e-5
        fd = (ell.theta1(w + h, self.mod) - ell.theta1(w - h, self.mod)) / (2 * h)
        self.assertLess(_rel(ell.theta1(w, self.mod, 1), fd), 1e-8)

    def test_taylor_series(self):
        series = ell.theta_taylor(0.21 + 0.1j, self.mod, 12, scale=0.1)
        self.assertLess(_rel(complex(series(0.5)), ell.theta1(0.26 + 0.1j, self.mod)), 1e-12)

    def test_bad_tau(self):
        with self.assertRaises(DomainError):
            ell.Modulus.from_tau(1.0 - 0.1j)


class PeriodTests(SimpleTestCase):
    def test_small_modulus(self):
        K, _ = ell.elliptic_K(1e-8)
        self.assertAlmostEqual(K, math.pi / 2, places=12)

    def test_complementary_symmetry(self):
        K, _ = ell.elliptic_K(0.6)
        _, Kp = ell.elliptic_K(0.8)
        self.assertAlmostEqual(K, Kp, places=12)

    def test_against_quadrature(self):
        k = 0.5
        ref, _ = quad(lambda x: 1 / math.sqrt((1 - x * x) * (1 - k * k * x * x)), 0, 1, epsabs=1e-14, epsrel=1e-14)
        self.assertLess(abs(ell.elliptic_K(k)[0] - ref) / ref, 1e-10)

    def test_outside_domain(self):
        with self.assertRaises(DomainError):
            ell.elliptic_K(1.2)

    def test_complex_variant_matches_real(self):
        K, Kp = ell.elliptic_K(0.3)
        Kc, Kpc = ell.elliptic_K_complex(0.3 + 0j)
        self.assertLess(abs(Kc - K), 1e-12)
        self.assertLess(abs(Kpc - Kp), 1e-12)

    def test_modulus_from_k_round_trip(self):
        k = 0.35
        mod = ell.modulus_from_k(k)
        ratio = (ell.theta4(0.0, mod) / ell.theta3(0.0, mod)) ** 2
        self.assertLess(abs(ratio - k), 1e-12)
        K, Kp = ell.periods_from_tau(mod)
        K_ref, Kp_ref = ell.elliptic_K(k)
        self.assertLess(abs(K - K_ref), 1e-11)
        self.assertLess(abs(Kp - Kp_ref), 1e-11)
        polished = ell.modulus_from_k(k + 1e-3j, tau_guess=mod.tau)
        self.assertLess(abs(polished.tau - mod.tau), 1e-2)


class JacobiTests(SimpleTestCase):
    def test_origin(self):
        sn, cn, dn = ell.jacobi(0.0, 0.7)
        self.assertLess(abs(sn), 1e-14)
        self.assertLess(abs(cn - 1), 1e-13)
        self.assertLess(abs(dn - 1), 1e-13)

    def test_quarter_period(self):
        K, _ = ell.elliptic_K(0.7)
        sn, _, _ = ell.jacobi(K, 0.7)
        self.assertLess(abs(sn - 1), 1e-10)

    def test_identities(self):
        k = 0.45
        for phi in [0.3, 1.1 + 0.4j, -0.7 + 1.3j]:
            sn, cn, dn = ell.jacobi(phi, k)
            self.assertLess(abs(sn ** 2 + cn ** 2 - 1), 1e-10)
            self.assertLess(abs(dn ** 2 + k * k * sn ** 2 - 1), 1e-10)


class WeierstrassTests(SimpleTestCase):
    def setUp(self):
        self.mod = ell.Modulus.from_tau(0.8j)
        self.mu = 2.0 / 3.0
        self.points = [0.21 + 0.17j, 0.33 - 0.12j, -0.27 + 0.3j, 0.4 + 0.05j, 0.12 + 0.25j]

    def test_fallback_at_mu_one(self):
        w = 0.21 + 0.17j
        direct = ell.lattice_sum(w, self.mod, 0.0)
        self.assertLess(_rel(ell.wp(w, self.mod) + ell.lattice_c0(self.mod), direct), 1e-10)
        self.assertLess(_rel(ell.wp_mu(w, self.mod, 1 - 1e-6), direct), 1e-4)

    def test_wp_pole(self):
        with self.assertRaises(PoleError):
            ell.wp(self.mod.tau, self.mod)

    def test_wp_laurent_start(self):
        w = 1e-3 + 1e-3j
        self.assertLess(abs(ell.wp(w, self.mod) - 1 / w ** 2), 1e-4)

    def test_periodicity(self):
        tau = self.mod.tau
        for w in self.points:
            value = ell.wp_mu(w, self.mod, self.mu)
            self.assertLess(_rel(ell.wp_mu(w + 1, self.mod, self.mu), value), 1e-12)
            shifted = ell.wp_mu(w + tau, self.mod, self.mu)
            self.assertLess(_rel(shifted, cmath.exp(1j * math.pi * (1 - self.mu)) * value), 1e-12)

    def test_theta_representation(self):
        for w in self.points:
            self.assertLess(_rel(ell.wp_mu_theta(w, self.mod, self.mu), ell.wp_mu(w, self.mod, self.mu)), 1e-10)

    def test_kernel_derivatives_agree_across_branches(self):
        z = 0.31 + 0.2000001j
        for order in (1, 2, 5):
            far = ell.sin2_kernel(np.array([z]), order)[0]
            near = ell.sin2_kernel(np.array([z - 1e-6j]), order)[0]
            self.assertLess(_rel(near, far), 1e-4)

    def test_constants_even_case(self):
        consts = ell.wp_mu_constants(self.mod, 1.0)
        self.assertLess(abs(consts.c1_mu), 1e-10)
        self.assertLess(abs(consts.c3_mu), 1e-9)
        self.assertLess(abs(consts.c0_mu - ell.lattice_c0(self.mod)), 1e-10)

    def test_constants_closed_form(self):
        consts = ell.wp_mu_constants(self.mod, self.mu)
        self.assertLess(abs(consts.c0_mu - consts.c0_mu_closed), 1e-10)
        self.assertAlmostEqual(consts.g2_mu, 6 * consts.c2 + 4 * consts.c2_mu)

    def test_constants_continuous_at_one(self):
        near = ell.wp_mu_constants(self.mod, 1 - 1e-6)
        exact = ell.wp_mu_constants(self.mod, 1.0)
        self.assertLess(abs(near.c0_mu - exact.c0_mu), 1e-4)
        self.assertLess(abs(near.c2_mu - exact.c2_mu), 1e-3)

    def test_second_order_equation(self):
        consts = ell.wp_mu_constants(self.mod, self.mu)
        for w in self.points:
            residual = ell.wp_mu_second_order_residual(w, self.mod, self.mu, consts)
            scale = abs(ell.wp_mu(w, self.mod, self.mu, 2))
            self.assertLess(abs(residual) / max(scale, 1.0), 1e-8)

    def test_first_order_equation(self):
        consts = ell.wp_mu_constants(self.mod, self.mu)
        for w in self.points:
            residual = ell.wp_mu_first_order_residual(w, self.mod, self.mu, consts)
            scale = abs(ell.wp_mu(w, self.mod, 1.0, 1) * ell.wp_mu(w, self.mod, self.mu, 1))
            self.assertLess(abs(residual) / max(scale, 1.0), 1e-8)

    def test_primitive(self):
        w1, w2, w3 = 0.2 + 0.1j, 0.35 + 0.3j, 0.1 + 0.45j
        self.assertEqual(ell.wp_mu_primitive(w1, w1, self.mod, self.mu), 0)
        whole = ell.wp_mu_primitive(w1, w3, self.mod, self.mu)
        parts = ell.wp_mu_primitive(w1, w2, self.mod, self.mu) + ell.wp_mu_primitive(w2, w3, self.mod, self.mu)
        self.assertLess(abs(whole - parts), 1e-12)
        numeric = segment_integral(lambda z: ell.wp_mu(z, self.mod, self.mu), w1, w2, order=64)
        self.assertLess(abs(ell.wp_mu_primitive(w1, w2, self.mod, self.mu) - numeric), 1e-8)

    def test_sin2_laurent(self):
        coeffs = ell.sin2_laurent_at_zero(4)
        self.assertAlmostEqual(coeffs[-2], 1.0)
        self.assertAlmostEqual(coeffs[0], math.pi ** 2 / 3)
        self.assertAlmostEqual(coeffs[2], math.pi ** 4 / 15)
