import cmath
import math

import numpy as np
from django.test import SimpleTestCase
from numpy.polynomial import Polynomial

from core.exceptions import ConfigurationError, MissingCorrelatorError, PoleError
from core.quadrature import circle_coefficients
from correlators import services as cor
from spectral_curve import services as sc
from spectral_curve.one_matrix import solve_one_cut
from spectral_curve.params import ModelParams
from toporec import jets as tj
from toporec import services as tr


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def _strip_points(geom, count, seed):
    rng = np.random.default_rng(seed)
    tau = geom.tau
    return [complex(rng.uniform(-0.45, 0.45), rng.uniform(0.2, 0.8) * tau.imag) for _ in range(count)]


class BranchJetTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.params = ModelParams.from_hat(1.0, 0.05, 2.0, (0, 0, 0, 0.1))
        cls.geom = sc.solve_endpoints(cls.params)
        cls.jets = tj.build_jets(cls.geom, 4)

    def test_branch_values(self):
        first, second = self.jets.points
        self.assertLess(abs(first.x.series.coeff(0) - self.geom.a), 1e-10)
        self.assertLess(abs(second.x.series.coeff(0) - self.geom.b), 1e-10)

    def test_even_derivatives_vanish(self):
        geom = self.geom
        rho = self.jets.scale
        for v in geom.branch_points:
            for func in (lambda u: sc.s_of_u(u, geom), lambda u: sc.y_of(u, geom)):
                coeffs = circle_coefficients(func, v, rho, 128, range(5)) * rho ** np.arange(5)
                scale = abs(coeffs[1])
                for k in (0, 2, 4):
                    self.assertLess(abs(coeffs[k]), 1e-10 * scale)

    def test_theta_route_agrees(self):
        theta = tj.build_jets(self.geom, 4, method='theta')
        for a, b in zip(self.jets.points, theta.points):
            for attr in ('s1', 's3', 'y1', 'y3'):
                self.assertLess(_rel(getattr(b, attr), getattr(a, attr)), 1e-8)

    def test_unknown_method(self):
        with self.assertRaises(ConfigurationError):
            tj.build_jets(self.geom, 2, method='spline')

    def test_basis_windows_match_contour_coefficients(self):
        jets = self.jets
        rho = jets.scale
        orders = np.arange(-6, 4)
        for bp in jets.points:
            for idx in range(jets.dim):
                expected = circle_coefficients(lambda u: jets.chi_values(u)[idx], bp.center, rho, 256, orders)
                expected = expected * rho ** orders.astype(float)
                got = bp.chi[idx, orders - bp.chi_lo]
                scale = max(np.max(np.abs(expected)), 1.0)
                self.assertLess(np.max(np.abs(got - expected)), 1e-9 * scale)

    def test_regularized_bracket_residues(self):
        residues = tr.bracket_residues(self.jets)
        for res, sb in zip(residues, tr.s_B(self.jets)):
            self.assertLess(abs(res['times_distance'] + 0.25), 1e-10)
            self.assertLess(_rel(res['over_distance'], self.jets.c_B), 1e-10)
            self.assertLess(_rel(res['over_dx'], -sb / 6), 1e-10)

    def test_schwarzian_laurent_form(self):
        for bp in self.jets.points:
            series, rho = bp.regularized.series, bp.scale
            # S/6 = -1/(4 (u - v)^2) + O((u - v)^2)
            self.assertLess(abs(series.coeff(-2) * rho ** 2 + 0.25), 1e-10)
            self.assertLess(abs(series.coeff(-1)), 1e-10 / rho)
            self.assertLess(abs(series.coeff(1)), 1e-10 / rho)

    def test_s_B_series_part(self):
        for bp, full, series in zip(self.jets.points, tr.s_B(self.jets), tr.s_B_series(self.jets)):
            self.assertLess(_rel(full - series, -bp.s3 / (4 * bp.s1 ** 2)), 1e-12)

    def test_regularization_constant_converged(self):
        geom = self.geom
        cfg = cor.KernelConfig.from_settings()
        m_max = cfg.m_max(geom.tau)
        short = tj.regularization_constant(geom, cfg.with_overrides(series_m_max=m_max))
        wide = tj.regularization_constant(geom, cfg.with_overrides(series_m_max=2 * m_max))
        self.assertLess(abs(short - wide), 1e-9)


class RecursionTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.params = ModelParams.from_hat(1.0, 0.05, 2.0, (0, 0, 0, 0.1))
        cls.geom = sc.solve_endpoints(cls.params)
        cls.table = tr.CorrelatorTable(cls.geom, targets=[(3, 0), (2, 1)])
        cls.points = _strip_points(cls.geom, 9, 21)

    def test_closure(self):
        self.assertEqual(tr.correlator_closure([(2, 1)]), [(3, 0), (1, 1), (2, 1)])
        self.assertEqual(self.table.max_chi, 2)

    def test_three_point_closed_form(self):
        for i in range(3):
            triple = self.points[3 * i:3 * i + 3]
            expected = tr.omega3_closed(triple, self.table.jets)
            self.assertLess(_rel(self.table.evaluate(3, 0, triple), expected), 1e-8)

    def test_torus_one_point_closed_form(self):
        for u0 in self.points[:4]:
            expected = tr.omega11_closed(u0, self.table.jets)
            self.assertLess(_rel(self.table.evaluate(1, 1, [u0]), expected), 1e-8)

    def test_symmetry(self):
        self.assertLess(self.table.symmetry_defect(3, 0, self.points[:3]), 1e-9)
        self.assertLess(self.table.symmetry_defect(2, 1, self.points[3:5]), 1e-9)

    def test_vectorised_first_argument(self):
        u = np.array(self.points[:3])
        values = self.table.evaluate(2, 1, [u, self.points[5]])
        for value, u0 in zip(values, u):
            self.assertLess(_rel(value, self.table.evaluate(2, 1, [u0, self.points[5]])), 1e-12)

    def test_linear_equation_on_the_cut(self):
        others = self.points[6:8]
        for s in (0.13, 0.29, 0.41):
            self.assertLess(tr.linear_equation_defect(self.table, 3, 0, s, others), 1e-8)
            self.assertLess(tr.linear_equation_defect(self.table, 1, 1, s), 1e-8)
            self.assertLess(tr.linear_equation_defect(self.table, 2, 1, s, others[:1]), 1e-8)

    def test_genus_one_loop_equation(self):
        for s in (0.11, 0.23, 0.37):
            self.assertLess(tr.loop_equation_defect_11(self.table, s), 1e-6)

    def test_dilaton_equation(self):
        u1, u2 = self.points[0], self.points[1]
        lhs, rhs = tr.dilaton_residue(self.table, 2, 0, [u1, u2])
        self.assertEqual(rhs, 0)
        scale = abs(self.table.evaluate(3, 0, [self.points[2], u1, u2]))
        self.assertLess(abs(lhs), 1e-8 * max(scale, 1.0))
        lhs, rhs = tr.dilaton_residue(self.table, 1, 1, [u1])
        self.assertLess(_rel(lhs, rhs), 1e-7)
        self.assertLess(_rel(rhs, -self.table.evaluate(1, 1, [u1])), 1e-12)

    def test_dilaton_potential_derivative(self):
        phi = tr.DilatonPotential(self.geom)
        h = 1e-4
        tau = self.geom.tau
        for u in (0.45 * tau - 0.05, 0.6 * tau, 0.3 * tau + 0.05):
            fd = (phi(u + h) - phi(u - h)) / (2 * h)
            self.assertLess(_rel(fd, phi.derivative(u)), 1e-6)

    def test_branch_point_is_a_pole(self):
        with self.assertRaises(PoleError):
            self.table.evaluate(1, 1, [self.geom.v1])

    def test_missing_entry(self):
        with self.assertRaises(MissingCorrelatorError):
            self.table.entry(1, 2)

    def test_genus_cap(self):
        with self.assertRaises(ConfigurationError):
            tr.CorrelatorTable(self.geom, targets=[(1, 4)])

    def test_unstable_target(self):
        with self.assertRaises(ConfigurationError):
            tr.correlator_closure([(2, 0)])

    def test_wrong_number_of_points(self):
        with self.assertRaises(ConfigurationError):
            self.table.evaluate(3, 0, self.points[:2])

    def test_t_cycle_integral(self):
        tau = self.geom.tau
        # clear of the polygon and of the reflected poles
        for u in (0.02 + 0.25 * tau, -0.03 + 0.3 * tau, 0.04 + 0.72 * tau):
            expected = sc.s_of_u(u, self.geom) * sc.basis(u, self.geom)[0]
            self.assertLess(_rel(tr.omega_t_cycle(u, self.geom), expected), 1e-9)

    def test_dF1_dt_routes_agree(self):
        closed = tr.dF1_dt(self.table)
        path = tr.dF1_dt(self.table, route='path')
        self.assertLess(_rel(path, closed), 1e-7)

    def test_record(self):
        probes = {(3, 0): [self.points[:3]]}
        record = self.table.to_record(probes)
        self.assertEqual(record['max_chi'], 2)
        entries = {(e['k'], e['g']): e for e in record['entries']}
        self.assertEqual(set(entries), {(1, 1), (3, 0), (2, 1)})
        value = complex(*entries[(3, 0)]['probes'][0]['value'])
        self.assertLess(_rel(value, self.table.evaluate(3, 0, self.points[:3])), 1e-12)


class HigherGenusTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.params = ModelParams.from_hat(0.5, 0.04, 2.0, (0, 0, 0, 0.1))
        cls.geom = sc.solve_endpoints(cls.params)
        cls.table = tr.CorrelatorTable(cls.geom, targets=[(1, 2)])

    def test_free_energy_independent_of_base_point(self):
        default = tr.free_energy(2, self.table)
        moved = tr.free_energy(2, self.table, tr.DilatonPotential(self.geom, base_point=self.geom.tau / 2 + 0.1))
        self.assertLess(_rel(moved, default), 1e-10)
        self.assertTrue(cmath.isfinite(default))

    def test_genus_two_linear_equation(self):
        for s in (0.17, 0.33):
            self.assertLess(tr.linear_equation_defect(self.table, 1, 2, s), 1e-8)

    def test_free_energy_needs_genus_two(self):
        with self.assertRaises(ConfigurationError):
            tr.free_energy(1, self.table)


class LoopFreeRecursionTests(SimpleTestCase):
    """n = 0 against the one-matrix loop equations."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.params = ModelParams.from_hat(0.0, 0.04, 2.0, (0, 0, 0, 0.15))
        cls.geom = sc.solve_endpoints(cls.params)
        cls.reference = solve_one_cut(Polynomial(cls.params.derivative_coefficients()), cls.params.t)
        cls.table = tr.CorrelatorTable(cls.geom, targets=[(2, 1)])
        cls.points = _strip_points(cls.geom, 4, 31)

    def test_torus_resolvent(self):
        for u in self.points:
            x = sc.x_of_u(u, self.geom)
            expected = complex(self.reference.torus_resolvent(x))
            self.assertLess(_rel(self.table.resolvent(1, 1, [u]), expected), 1e-7)

    def test_genus_one_symmetry(self):
        self.assertLess(self.table.symmetry_defect(2, 1, self.points[:2]), 1e-9)

    def test_genus_one_dilaton(self):
        lhs, rhs = tr.dilaton_residue(self.table, 1, 1, [self.points[2]])
        self.assertLess(_rel(lhs, rhs), 1e-7)

    def test_torus_closed_form_matches_resolvent(self):
        for u in self.points[:2]:
            x = sc.x_of_u(u, self.geom)
            closed = tr.omega11_closed(u, self.table.jets) / sc.s_of_u(u, self.geom)
            self.assertLess(_rel(closed, complex(self.reference.torus_resolvent(x))), 1e-7)

    def test_diagonal_mode_agrees(self):
        diagonal = tr.CorrelatorTable(self.geom, targets=[(2, 1)], mode='diagonal', jets=self.table.jets)
        pair = self.points[:2]
        self.assertLess(_rel(diagonal.evaluate(2, 1, pair), self.table.evaluate(2, 1, pair)), 1e-8)

    def test_unknown_mode(self):
        with self.assertRaises(ConfigurationError):
            tr.CorrelatorTable(self.geom, mode='mirror')

    def test_f0_tt(self):
        self.assertLess(_rel(tr.f0_tt(self.geom), self.reference.f0_tt()), 1e-8)


class GaussianFreeEnergyTests(SimpleTestCase):
    """Fully packed loops at n = 0: a shifted Gaussian."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.params = ModelParams.fpl(0.0, 0.05, 2.0)
        cls.geom = sc.solve_endpoints(cls.params)
        t = 0.05
        # V = (x - 1)^2/2 is a translate of x^2/2, t0 = c^2/8 included
        cls.expected_f0 = t ** 2 / 2 * math.log(t) - 0.75 * t ** 2
        cls.expected_f0_t = t * math.log(t) - t

    def test_f0_t(self):
        self.assertLess(_rel(tr.f0_t(self.geom), self.expected_f0_t), 1e-8)

    def test_f0(self):
        self.assertLess(_rel(tr.f0(self.geom), self.expected_f0), 1e-8)

    def test_f0_tt(self):
        self.assertLess(abs(tr.f0_tt(self.geom) - math.log(0.05)), 1e-9)

    def test_constant_in_potential(self):
        shift = 0.3
        pot = self.params.pot
        moved = sc.solve_endpoints(self.params.with_pot((pot[0] + shift,) + pot[1:]))
        self.assertLess(abs(moved.a - self.geom.a), 1e-10)
        self.assertLess(_rel(tr.f0_t(moved), self.expected_f0_t - shift), 1e-8)
        self.assertLess(_rel(tr.f0(moved), self.expected_f0 - 0.05 * shift), 1e-8)

    def test_f0_homogeneity(self):
        defect = tr.homogeneity_defect(tr.f0, self.geom, 2)
        self.assertLess(abs(defect), 1e-5 * abs(self.expected_f0))


class FreeEnergyDerivativeTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.params = ModelParams.from_hat(1.0, 0.05, 2.0, (0, 0, 0, 0.1))
        cls.geom = sc.solve_endpoints(cls.params)

    def test_f0_t_routes_agree(self):
        subtracted = tr.f0_t(self.geom)
        limit = tr.f0_t(self.geom, method='limit')
        self.assertLess(_rel(limit, subtracted), 1e-5)

    def test_f0_ttt_matches_difference_quotient(self):
        h = 1e-4
        seed = (self.geom.a, self.geom.b)
        plus = sc.solve_endpoints(self.params.with_t(self.params.t + h), seed=seed)
        minus = sc.solve_endpoints(self.params.with_t(self.params.t - h), seed=seed)
        fd = (tr.f0_tt(plus) - tr.f0_tt(minus)) / (2 * h)
        self.assertLess(_rel(tr.f0_ttt(self.geom), fd), 1e-5)

    def test_f0_homogeneity(self):
        defect = tr.homogeneity_defect(tr.f0, self.geom, 2)
        self.assertLess(abs(defect), 1e-5 * abs(tr.f0(self.geom)))

    def test_torus_resolvent_homogeneity(self):
        x = 2.5 + 0.7j

        def torus(geom):
            return tr.CorrelatorTable(geom).resolvent(1, 1, [sc.uniformize(x, geom)])

        value = torus(self.geom)
        self.assertLess(abs(tr.homogeneity_defect(torus, self.geom, -1)), 1e-4 * abs(value))

    def test_t_variation(self):
        fd, expected = tr.t_variation(self.geom, 2.4 + 0.5j, h=1e-4)
        self.assertLess(_rel(fd, expected), 1e-5)

    def test_tj_variation(self):
        for j in (1, 2, 3):
            analytic, fd = tr.tj_variation(self.geom, j, 2.4 + 0.5j, h=1e-4)
            self.assertLess(_rel(analytic, fd), 1e-5)
