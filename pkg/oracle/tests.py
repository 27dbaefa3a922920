import sympy
from django.test import SimpleTestCase, override_settings

from core.exceptions import ConfigurationError, PoleError, ResourceGuardError
from spectral_curve.params import ModelParams

from .maps import iter_maps
from .services import (
    C_SYMBOL, N_SYMBOL, catalog_for, enumerate_maps, numeric_series_extract, oracle_comparison,
    series_from_catalog, tutte_planar_counts,
)

T3 = sympy.Symbol('t3')
XH1 = sympy.Symbol('xh1')


def _is_zero(expr):
    return sympy.simplify(sympy.expand(expr)) == 0


class EnumerationTests(SimpleTestCase):
    def test_single_vertex_map(self):
        catalog = enumerate_maps(v_max=1)
        self.assertEqual(catalog.map_count, 1)
        self.assertEqual(catalog.keys(), [(0, 1, 1, (0,))])
        self.assertEqual(catalog.weight((0, 1, 1, (0,))), 1)

    def test_second_order_of_one_point_function(self):
        catalog = enumerate_maps(v_max=2, d_max=3)
        expected = 1 / XH1 ** 3 + (T3 - N_SYMBOL / C_SYMBOL) / XH1 ** 2
        self.assertTrue(_is_zero(catalog.coefficient(0, 2) - expected))

    def test_planar_cylinder_lowest_order(self):
        catalog = enumerate_maps(v_max=1, k=2)
        self.assertEqual(catalog.map_count, 1)
        self.assertEqual(catalog.keys(), [(0, 2, 1, (1, 1))])

    def test_euler_relation_and_loop_parity(self):
        for k in (1, 2):
            for m in iter_maps(v_max=2, g_max=1, k=k, d_max=4):
                self.assertEqual(m.euler_defect(), 0)
                self.assertLessEqual(m.genus, 1)
                self.assertLessEqual(m.v, 2)
                self.assertEqual(m.monomial(4)[0], m.loops)
                self.assertLessEqual(m.loops, m.ell)
                self.assertEqual(m.loops > 0, m.ell > 0)

    def test_loop_free_counts_match_tutte_recursion(self):
        catalog = enumerate_maps(v_max=4, d_max=4)
        census = {}
        for key in catalog.keys(g=0):
            value = sympy.expand(catalog.weight(key).subs(N_SYMBOL, 0))
            if value != 0:
                census[(key[3][0], key[2])] = value
        tutte = tutte_planar_counts(v_max=4, d_max=4)
        self.assertEqual(set(census), set(tutte))
        for key, value in tutte.items():
            self.assertTrue(_is_zero(census[key] - value), key)

    def test_json_export(self):
        record = enumerate_maps(v_max=2, d_max=3).to_json()
        entries = record['entries']['0/1/2']
        self.assertEqual(set(entries), {'1', '2'})
        self.assertEqual(sympy.sympify(entries['2']), 1)
        self.assertTrue(_is_zero(sympy.sympify(entries['1']) - (T3 - N_SYMBOL / C_SYMBOL)))

    def test_guards(self):
        with self.assertRaises(ResourceGuardError):
            enumerate_maps(v_max=6)
        with override_settings(LOOPCURVE={'ORACLE_MAX_VERTICES': 2}):
            with self.assertRaises(ResourceGuardError):
                enumerate_maps(v_max=3)
        with self.assertRaises(ConfigurationError):
            enumerate_maps(v_max=2, k=0)


class SeriesTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.params = ModelParams.from_hat(1.0, 0.02, 2.0, (0, 0, 0, 0.1))
        cls.catalog = catalog_for(cls.params, v_max=3)

    def test_first_coefficient(self):
        (series,) = series_from_catalog(self.catalog, self.params, [3.0])
        self.assertAlmostEqual(series.coeff(1), 0.5)
        self.assertEqual(series.coeff(0), 0)

    def test_real_coefficients_at_real_points(self):
        for series in series_from_catalog(self.catalog, self.params, [2.5, 4.0, -0.5]):
            for v in range(4):
                self.assertEqual(series.coeff(v).imag, 0)

    def test_pole_at_expansion_point(self):
        with self.assertRaises(PoleError):
            series_from_catalog(self.catalog, self.params, [1.0])

    def test_geometric_series_extraction(self):
        series = numeric_series_extract(lambda t: 1 / (1 - t), order=10, t_scale=0.5)
        for v in range(11):
            self.assertAlmostEqual(series.coeff(v), 1, delta=1e-10)
        self.assertTrue(series.consistent)

    def test_radius_beyond_convergence_is_flagged(self):
        series = numeric_series_extract(lambda t: 1 / (1 - t), order=6, t_scale=1.5)
        self.assertFalse(series.consistent)


class AnalyticAgreementTests(SimpleTestCase):
    def test_one_point_function_matches_census(self):
        x_points = [2.0, 2.4, 1.0 + 1.0j]
        for n in (0.0, 1.0):
            with self.subTest(n=n):
                params = ModelParams.from_hat(n, 0.02, 2.0, (0, 0, 0, 0.1))
                result = oracle_comparison(params, 3, x_points, t_scale=0.02, tol=1e-6)
                self.assertTrue(result['passed'], result['max_abs_deviation'])
                self.assertEqual(len(result['rows']), 9)
