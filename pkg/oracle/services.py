"""
Exact census of small rooted decorated maps and its comparison with the
analytic one-point function.

A map contributes

    t^v n^#loops (-1/c)^ell prod_j that_j^(n_j) / prod_i (x_i - c/2)^(l_i + 1)

to W_k^(g). The weights are kept as exact integer monomial counts and turned
into sympy polynomials or floats on request.
"""

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np
import sympy

from core.conf import numerics
from core.exceptions import ConfigurationError, ConvergenceError, PoleError, ResourceGuardError
from core.quadrature import circle_coefficients
from core.series import TruncatedSeries
from correlators.services import w1_stable
from spectral_curve.services import s_of_u, solve_endpoints, uniformize, x_of_u

from .maps import iter_maps

logger = logging.getLogger(__name__)

N_SYMBOL, C_SYMBOL = sympy.symbols('n c')


def coupling_symbols(d_max):
    """that_3 ... that_dmax as sympy symbols t3, t4, ..."""
    return tuple(sympy.Symbol(f't{j}') for j in range(3, d_max + 1))


@dataclass
class MapCatalog:
    """
    Rooted maps grouped by (g, k, v, boundary lengths). Each entry is a
    Counter from the monomial (#loops, ell, n_3, ..., n_dmax) to the number
    of maps carrying it.
    """

    v_max: int
    g_max: int
    k: int
    d_max: int
    loop_triangles: bool = True
    entries: dict = field(default_factory=lambda: defaultdict(Counter))
    map_count: int = 0

    def add(self, m):
        self.entries[(m.genus, m.k, m.v, m.boundary_lengths)][m.monomial(self.d_max)] += 1
        self.map_count += 1

    def keys(self, g=None, v=None):
        return sorted(key for key in self.entries if (g is None or key[0] == g) and (v is None or key[2] == v))

    def weight(self, key):
        """Exact weight polynomial of one entry in n, c and the that_j."""
        couplings = coupling_symbols(self.d_max)
        total = sympy.Integer(0)
        for (loops, ell, *counts), multiplicity in self.entries[key].items():
            term = multiplicity * N_SYMBOL ** loops * (-1 / C_SYMBOL) ** ell
            for symbol, power in zip(couplings, counts):
                term *= symbol ** power
            total += term
        return sympy.expand(total)

    def weight_value(self, key, n, c, couplings):
        """The weight of one entry evaluated at numeric n, c and that_j."""
        total = 0j
        for (loops, ell, *counts), multiplicity in self.entries[key].items():
            term = multiplicity * n ** loops * (-1 / c) ** ell
            for value, power in zip(couplings, counts):
                term *= value ** power
            total += term
        return total

    def coefficient(self, g, v):
        """[t^v] W_k^(g) as a rational function of the shifted variables xh1 ... xhk."""
        xh = sympy.symbols(' '.join(f'xh{i + 1}' for i in range(self.k)))
        xh = xh if isinstance(xh, tuple) else (xh,)
        total = sympy.Integer(0)
        for key in self.keys(g=g, v=v):
            denominator = sympy.Integer(1)
            for symbol, l in zip(xh, key[3]):
                denominator *= symbol ** (l + 1)
            total += self.weight(key) / denominator
        return total

    def to_json(self):
        """Entries keyed 'g/k/v', each a map from boundary lengths to the weight polynomial."""
        out = defaultdict(dict)
        for key in self.keys():
            g, k, v, lengths = key
            out[f'{g}/{k}/{v}'][','.join(str(l) for l in lengths)] = str(self.weight(key))
        return {
            'schema': numerics()['REPORT_SCHEMA'],
            'v_max': self.v_max,
            'g_max': self.g_max,
            'k': self.k,
            'd_max': self.d_max,
            'loop_triangles': self.loop_triangles,
            'map_count': self.map_count,
            'entries': dict(out),
        }


def enumerate_maps(v_max, g_max=0, k=1, d_max=3, loop_triangles=True):
    """
    Exhaustive census of connected rooted decorated maps.

    Args:
        v_max: largest vertex count
        g_max: largest genus
        k: number of boundaries
        d_max: largest empty polygon degree (ignored below 3)
        loop_triangles: include triangles carrying a path

    Returns:
        MapCatalog

    Raises:
        ResourceGuardError: v_max beyond ORACLE_MAX_VERTICES
        ConfigurationError: k < 1
    """
    limit = numerics()['ORACLE_MAX_VERTICES']
    if v_max > limit:
        raise ResourceGuardError(f'v_max={v_max} exceeds the enumeration limit {limit}')
    if k < 1:
        raise ConfigurationError('only rooted maps (k >= 1) are enumerated')
    d_max = max(int(d_max), 2)
    catalog = MapCatalog(v_max=v_max, g_max=g_max, k=k, d_max=d_max, loop_triangles=loop_triangles)
    for m in iter_maps(v_max, g_max, k, d_max, loop_triangles):
        catalog.add(m)
    logger.info('enumerated %d rooted maps (v <= %d, g <= %d, k = %d, d_max = %d)',
                catalog.map_count, v_max, g_max, k, d_max)
    return catalog


def catalog_for(params, v_max, g_max=0, k=1):
    """Census matching the polygon degrees of a model."""
    return enumerate_maps(v_max, g_max, k, d_max=params.d_max, loop_triangles=True)


def _couplings(params, d_max):
    if params.hat_pot is None:
        raise ConfigurationError('the oracle needs the unshifted couplings that_j')
    hat = params.hat_pot
    return tuple(complex(hat[j]) if j < len(hat) else 0j for j in range(3, d_max + 1))


def series_from_catalog(catalog, params, x_points, g=0):
    """
    [t^v] W_k^(g), v = 0 ... v_max, at numeric parameters and points.

    Args:
        catalog: MapCatalog
        params: ModelParams carrying hat_pot
        x_points: list of x (k = 1) or of k-tuples of x
        g: genus

    Returns:
        list of TruncatedSeries, one per point

    Raises:
        PoleError: a point at x = c/2
    """
    couplings = _couplings(params, catalog.d_max)
    n, c = params.n, params.c
    weights = {key: catalog.weight_value(key, n, c, couplings) for key in catalog.keys(g=g)}
    out = []
    for point in x_points:
        xs = tuple(point) if np.ndim(point) else (point,)
        if len(xs) != catalog.k:
            raise ConfigurationError(f'expected {catalog.k} points, got {len(xs)}')
        shifted = [complex(x) - c / 2 for x in xs]
        if any(abs(xh) == 0 for xh in shifted):
            raise PoleError(f'x = c/2 = {c / 2} is the expansion point of the oracle series')
        coeffs = np.zeros(catalog.v_max + 1, dtype=complex)
        for key, value in weights.items():
            term = value
            for xh, l in zip(shifted, key[3]):
                term /= xh ** (l + 1)
            coeffs[key[2]] += term
        out.append(TruncatedSeries(coeffs))
    return out


def tutte_planar_counts(v_max, d_max=3):
    """
    Loop-free planar rooted maps from Tutte's root-edge recursion

        M_l = sum_j that_j M_(l+j-2) + sum_p M_p M_(l-2-p),  M_0 = t,

    solved order by order in t.

    Returns:
        dict (l, v) -> sympy polynomial in the that_j, nonzero entries only
    """
    couplings = dict(zip(range(3, d_max + 1), coupling_symbols(d_max)))
    l_max = 2 * v_max
    zero = sympy.Integer(0)
    counts = [[zero] * (v_max + 1) for _ in range(l_max + 1)]
    counts[0][1] = sympy.Integer(1)
    for _ in range((v_max + 1) * (l_max + 1)):
        new = [list(counts[0])] + [[zero] * (v_max + 1) for _ in range(l_max)]
        for l in range(1, l_max + 1):
            for v in range(1, v_max + 1):
                total = zero
                for j, symbol in couplings.items():
                    if l + j - 2 <= l_max:
                        total += symbol * counts[l + j - 2][v]
                for p in range(l - 1):
                    for v1 in range(1, v):
                        total += counts[p][v1] * counts[l - 2 - p][v - v1]
                new[l][v] = sympy.expand(total)
        if new == counts:
            break
        counts = new
    return {(l, v): counts[l][v] for l in range(l_max + 1) for v in range(v_max + 1) if counts[l][v] != 0}


def numeric_series_extract(evaluator, order, t_scale, nodes=None, tol=1e-8):
    """
    Taylor coefficients of an analytic function of t by the discrete Cauchy
    transform on |t| = t_scale, with an error estimate from |t| = t_scale/2.

    Args:
        evaluator: callable t -> complex
        order: highest coefficient
        t_scale: circle radius, inside the disc of analyticity
        nodes: samples per circle, at least 4 order
        tol: relative tolerance on the two-radius difference

    Returns:
        TruncatedSeries, flagged inconsistent when the two radii disagree
    """
    nodes = nodes or max(4 * order, 32)
    if nodes < 4 * order:
        raise ConfigurationError(f'{nodes} samples are too few for order {order}')

    def func(t):
        return np.array([evaluator(complex(z)) for z in np.atleast_1d(t)], dtype=complex)

    orders = range(order + 1)
    main = circle_coefficients(func, 0.0, t_scale, nodes, orders)
    half = circle_coefficients(func, 0.0, t_scale / 2, nodes, orders)
    error = np.abs(main - half)
    consistent = bool(np.all(error <= tol * np.maximum(1.0, np.abs(main))))
    if not consistent:
        logger.warning('series extraction at radius %.3g is inconsistent: max deviation %.2e',
                       t_scale, float(np.max(error)))
    return TruncatedSeries(main, error=error, consistent=consistent)


def _track(x, geom, u_seed):
    u = complex(u_seed)
    defect = x_of_u(u, geom) - x
    for _ in range(40):
        if abs(defect) < 1e-14 * max(abs(x), 1.0):
            return u
        u = u - defect / s_of_u(u, geom)
        defect = x_of_u(u, geom) - x
    raise ConvergenceError('lost u(x) along the t-circle', last_iterate=u, residual=abs(defect))


def analytic_w1_series(params, x_points, order, t_scale=0.02, nodes=None, tol=1e-12):
    """
    Taylor coefficients in t of the analytic W_1^(0)(x) at fixed x.

    The endpoints behave like c/2 -/+ 2 sqrt(t), so the geometry is followed
    along the circle of s = sqrt(t): each solve is seeded with the previous
    (a, b, tau) and each u(x) with the previous u. W_1 is even in s, so the
    half circle suffices and the t^v coefficient is the s^(2v) one.

    Args:
        params: ModelParams (t is replaced)
        x_points: points away from both cuts on the whole circle
        order: highest power of t
        t_scale: radius in t
        nodes: samples on the full s-circle (even, at least 8 order)
        tol: endpoint tolerance for each solve

    Returns:
        list of TruncatedSeries, one per x
    """
    nodes = nodes or max(8 * order, 32)
    nodes += nodes % 2
    radius = np.sqrt(t_scale)
    s_values = radius * np.exp(2j * np.pi * np.arange(nodes // 2) / nodes)
    samples = np.empty((len(x_points), nodes), dtype=complex)

    geom = None
    u_values = None
    for j, s in enumerate(s_values):
        if geom is None:
            geom = solve_endpoints(params.with_t(t_scale), tol=tol)
            u_values = [uniformize(complex(x), geom) for x in x_points]
        else:
            geom = solve_endpoints(params.with_t(s * s), seed=(geom.a, geom.b), tau_guess=geom.tau, tol=tol)
            u_values = [_track(complex(x), geom, u) for x, u in zip(x_points, u_values)]
        for i, u in enumerate(u_values):
            samples[i, j] = w1_stable(u, geom)
        logger.debug('s-circle sample %d: residual %.2e', j, geom.residual)
    samples[:, nodes // 2:] = samples[:, :nodes // 2]

    powers = radius ** np.arange(nodes)
    out = []
    for row in samples:
        s_coeffs = np.fft.fft(row) / nodes / powers
        out.append(TruncatedSeries(s_coeffs[0:2 * order + 1:2]))
    return out


def oracle_comparison(params, v_max, x_points, t_scale=0.02, tol=1e-6, catalog=None):
    """
    Per-coefficient table of [t^v] W_1^(0) from the census against the
    analytic pipeline, v = 1 ... v_max.

    Returns:
        dict with 'rows', 'max_abs_deviation' and 'passed'
    """
    catalog = catalog or catalog_for(params, v_max)
    exact = series_from_catalog(catalog, params, x_points)
    analytic = analytic_w1_series(params, x_points, v_max, t_scale=t_scale)
    rows = []
    for x, lhs, rhs in zip(x_points, exact, analytic):
        x = complex(x)
        for v in range(1, v_max + 1):
            deviation = abs(lhs.coeff(v) - rhs.coeff(v))
            rows.append({
                'x': [x.real, x.imag],
                'v': v,
                'oracle': [lhs.coeff(v).real, lhs.coeff(v).imag],
                'analytic': [rhs.coeff(v).real, rhs.coeff(v).imag],
                'deviation': deviation,
            })
    worst = max((row['deviation'] for row in rows), default=0.0)
    logger.info('oracle comparison v <= %d: max deviation %.2e', v_max, worst)
    return {'rows': rows, 'max_abs_deviation': worst, 'passed': worst <= tol, 'map_count': catalog.map_count}
