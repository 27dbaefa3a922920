"""
Deformed topological recursion on the O(n) spectral curve.

Stable correlators omega_k^(g) (2g - 2 + k > 0) are stored as tensors over the
basis chi_{l,q} of toporec.jets, one index per argument:

    omega_k^(g)(u_0, ..., u_{k-1}) = sum T[i_0, ..., i_{k-1}] chi_{i_0}(u_0) ... chi_{i_{k-1}}(u_{k-1}).

Each recursion step is pure Laurent algebra on branch-point jets: the bracket
is expanded in eps with u = v_l + rho eps, u-bar = v_l - rho eps, multiplied
with the kernel coefficients and the eps^-1 coefficient is read off.
"""

import cmath
import itertools
import logging
import math

import numpy as np

from core.conf import numerics
from core.exceptions import ConfigurationError, ConvergenceError, MissingCorrelatorError
from core.quadrature import circle_coefficients, circle_integral, path_integral, segment_integral
from correlators.services import (
    KernelConfig,
    w1,
    w1_algebraic,
    w1_stable,
    w2_closed_at,
    w2_series,
    wbar2,
)
from spectral_curve.services import (
    basis,
    coefficients_at_infinity,
    infinity_radius,
    reflected_basis,
    s_of_u,
    solve_endpoints,
    uniformize,
    x_of_u,
    y_of,
)
from toporec.jets import build_jets

logger = logging.getLogger(__name__)

RECURSION_MODES = ('reflected', 'diagonal')


def euler_characteristic(k, g):
    return 2 * g - 2 + k


def is_stable(k, g):
    return k >= 1 and g >= 0 and euler_characteristic(k, g) > 0


def q_cap(k, g):
    """Highest derivative order of chi appearing in omega_k^(g)."""
    return 6 * g - 6 + 2 * k


def _prerequisites(k, g):
    needed = set()
    if g >= 1 and is_stable(k + 1, g - 1):
        needed.add((k + 1, g - 1))
    for size in range(k):
        for h in range(g + 1):
            if (size, h) in ((0, 0), (k - 1, g)):
                continue
            for pair in ((size + 1, h), (k - size, g - h)):
                if is_stable(*pair):
                    needed.add(pair)
    return needed


def correlator_closure(targets):
    """
    Every stable (k, g) the recursion visits on the way to ``targets``, in
    build order (increasing 2g - 2 + k).

    Raises:
        ConfigurationError: a target is unstable
    """
    seen = set()
    todo = list(targets)
    while todo:
        kg = tuple(todo.pop())
        if kg in seen:
            continue
        if not is_stable(*kg):
            raise ConfigurationError(f'omega_{kg[0]}^({kg[1]}) is not stable')
        seen.add(kg)
        todo.extend(_prerequisites(*kg))
    return sorted(seen, key=lambda kg: (euler_characteristic(*kg), kg[1]))


def _reflection_signs(lo, hi):
    return np.where(np.arange(lo, hi + 1) % 2 == 0, 1.0, -1.0)


def _product(left, right, lo_out, hi_out):
    """Cauchy product of two windows (lo, array[orders, dims]), flattened over the dims."""
    lo_a, arr_a = left
    lo_b, arr_b = right
    n_out = hi_out - lo_out + 1
    out = np.zeros((n_out, arr_a.shape[1], arr_b.shape[1]), dtype=complex)
    for p in range(arr_a.shape[0]):
        start = lo_a + p + lo_b - lo_out
        q0, q1 = max(0, -start), min(arr_b.shape[0], n_out - start)
        if q0 >= q1:
            continue
        out[start + q0:start + q1] += arr_a[p][None, :, None] * arr_b[q0:q1, None, :]
    return out.reshape(n_out, -1)


class CorrelatorEntry:
    """omega_k^(g) as a coefficient tensor."""

    def __init__(self, k, g, tensor):
        self.k = k
        self.g = g
        self.tensor = tensor

    @property
    def chi(self):
        return euler_characteristic(self.k, self.g)

    def to_record(self, jets):
        """Coefficients up to the derivative cap, as nested [re, im] pairs."""
        keep = [jets.index(l, q) for l in range(2) for q in range(min(q_cap(self.k, self.g), jets.q_max) + 1)]
        block = self.tensor[np.ix_(*([keep] * self.k))]
        return {
            'k': self.k,
            'g': self.g,
            'q_cap': q_cap(self.k, self.g),
            'index': [[l, q] for l in range(2) for q in range(min(q_cap(self.k, self.g), jets.q_max) + 1)],
            'coefficients': np.stack([block.real, block.imag], axis=-1).tolist(),
        }


class CorrelatorTable:
    """
    Append-only table of stable correlators, built level by level in
    2g - 2 + k from the branch-point jets.

    Args:
        geom: solved CurveGeometry
        targets: (k, g) pairs to compute, prerequisites are added
        cfg: KernelConfig for the lattice sums
        mode: 'reflected' uses omega(u, u-bar, I) in the first bracket term,
            'diagonal' uses omega(u, u, I) there (except at (1, 1))
        method: jet method, see build_jets
        jets: prebuilt JetSet to reuse

    Raises:
        ConfigurationError: unknown mode or a genus above GENUS_CAP
    """

    def __init__(self, geom, targets=((1, 1),), cfg=None, mode='reflected', method='cauchy', jets=None):
        if mode not in RECURSION_MODES:
            raise ConfigurationError(f'unknown recursion mode {mode!r}, expected one of {RECURSION_MODES}')
        cap = int(numerics()['GENUS_CAP'])
        for k, g in targets:
            if g > cap:
                raise ConfigurationError(f'genus {g} is above the configured cap {cap}')
        self.geom = geom
        self.mode = mode
        self.build_order = correlator_closure(targets)
        q_max = max(q_cap(k, g) for k, g in self.build_order)
        if jets is None or jets.q_max < q_max:
            jets = build_jets(geom, q_max, cfg or KernelConfig.from_settings(), method)
        self.jets = jets
        self.entries = {}
        for k, g in self.build_order:
            self.entries[(k, g)] = CorrelatorEntry(k, g, self._recurse(k, g))
            logger.info('omega_%d^(%d) computed (chi=%d, mode=%s)', k, g, euler_characteristic(k, g), mode)

    @property
    def max_chi(self):
        return max(entry.chi for entry in self.entries.values())

    def entry(self, k, g):
        try:
            return self.entries[(k, g)]
        except KeyError:
            raise MissingCorrelatorError(f'omega_{k}^({g}) is not in the table') from None

    # recursion ----------------------------------------------------------

    def _factor(self, bp, k, g, reflect):
        """Jet window of omega_k^(g)(u or u-bar, J): (lo, array[orders, dims of J])."""
        jets = self.jets
        if (k, g) == (2, 0):
            arr = np.zeros((jets.q_max + 1, jets.dim), dtype=complex)
            for q in range(jets.q_max + 1):
                arr[q, jets.index(bp.index, q)] = (-1) ** q if reflect else 1
            return 0, arr
        tensor = self.entry(k, g).tensor
        arr = bp.chi.T @ tensor.reshape(jets.dim, -1)
        if reflect:
            arr = arr * _reflection_signs(bp.chi_lo, bp.chi_hi)[:, None]
        return bp.chi_lo, arr

    def _pair_term(self, bp, k, g, lo, hi):
        """omega_{k+1}^(g-1)(u, u-bar, I), or (u, u, I) in diagonal mode."""
        dim = self.jets.dim
        tensor = self.entry(k + 1, g - 1).tensor
        window = bp.chi
        second = window if self.mode == 'diagonal' else window * _reflection_signs(bp.chi_lo, bp.chi_hi)[None, :]
        both = np.einsum('ap,abr,bq->pqr', window, tensor.reshape(dim, dim, -1), second, optimize=True)
        m = window.shape[1]
        out = np.zeros((2 * m - 1, both.shape[2]), dtype=complex)
        for p in range(m):
            out[p:p + m] += both[p]
        first = lo - 2 * bp.chi_lo
        return out[first:first + hi - lo + 1]

    def _bracket(self, bp, k, g):
        dim = self.jets.dim
        lo, hi = 2 * bp.chi_lo, 0
        n = hi - lo + 1
        shape = (n,) + (dim,) * (k - 1)
        if (k, g) == (1, 1):
            # the regularized bracket carries d ubar = -du; the other terms take plain values at ubar
            series = bp.regularized.series
            return lo, -np.array([series.coeff(o) for o in range(lo, hi + 1)])

        total = np.zeros(shape, dtype=complex)
        if g >= 1:
            total += self._pair_term(bp, k, g, lo, hi).reshape(shape)

        args = range(k - 1)
        for size in range(k):
            for J in itertools.combinations(args, size):
                rest = tuple(i for i in args if i not in J)
                for h in range(g + 1):
                    if (size, h) in ((0, 0), (k - 1, g)):
                        continue
                    left = self._factor(bp, size + 1, h, reflect=False)
                    right = self._factor(bp, k - size, g - h, reflect=True)
                    prod = _product(left, right, lo, hi).reshape(shape)
                    order = list(J) + list(rest)
                    total += prod.transpose([0] + [1 + order.index(i) for i in args])
        return lo, total

    def _recurse(self, k, g):
        jets = self.jets
        out = np.zeros((jets.dim,) * k, dtype=complex)
        for bp in jets.points:
            lo, bracket = self._bracket(bp, k, g)
            inverse_Y = bp.Y.series.inverse()
            rho = bp.scale
            for j in range(min(q_cap(k, g), jets.q_max) // 2 + 1):
                kappa = inverse_Y.shift(2 * j + 1) * (-rho / (2 * j + 1))
                powers = np.arange(kappa.val, -lo)
                coeffs = np.array([kappa.coeff(p) for p in powers])
                out[jets.index(bp.index, 2 * j)] += rho * np.tensordot(coeffs, bracket[-1 - powers - lo], axes=(0, 0))
        return out

    # evaluation ---------------------------------------------------------

    def evaluate(self, k, g, points):
        """
        omega_k^(g) / (du_0 ... du_{k-1}) at ``points``; the first point may be an array.

        Raises:
            ConfigurationError: wrong number of points
            MissingCorrelatorError: (k, g) not computed
            PoleError: a point sits on a branch point
        """
        if len(points) != k:
            raise ConfigurationError(f'omega_{k}^({g}) takes {k} points, got {len(points)}')
        out = self.entry(k, g).tensor
        for u in reversed(points[1:]):
            out = out @ self.jets.chi_values(u)
        values = np.tensordot(out, self.jets.chi_values(points[0]), axes=(0, 0))
        return complex(values) if np.ndim(values) == 0 else values

    def resolvent(self, k, g, points):
        """W_k^(g) at x(points): omega divided by the product of s(u_i)."""
        value = self.evaluate(k, g, points)
        for u in points:
            value = value / s_of_u(u, self.geom)
        return value

    def symmetry_defect(self, k, g, points):
        """Largest relative change of omega_k^(g) over all permutations of ``points``."""
        reference = self.evaluate(k, g, list(points))
        worst = 0.0
        for perm in itertools.permutations(points):
            worst = max(worst, abs(self.evaluate(k, g, list(perm)) - reference))
        return worst / max(abs(reference), 1e-300)

    def to_record(self, probes=None):
        """JSON record: geometry, jet metadata, coefficients and values at probe points."""
        probes = probes or {}
        entries = []
        for (k, g), entry in sorted(self.entries.items()):
            record = entry.to_record(self.jets)
            points = probes.get((k, g))
            if points:
                record['probes'] = [
                    {'points': [[complex(u).real, complex(u).imag] for u in pts],
                     'value': _pair(self.evaluate(k, g, list(pts)))}
                    for pts in points
                ]
            entries.append(record)
        return {
            'schema': numerics()['REPORT_SCHEMA'],
            'geometry': self.geom.to_record(),
            'jets': {
                'q_max': self.jets.q_max,
                'scale': self.jets.scale,
                'method': self.jets.method,
                'c_B': _pair(self.jets.c_B),
                'y_prime': [_pair(bp.y1) for bp in self.jets.points],
                's_prime': [_pair(bp.s1) for bp in self.jets.points],
            },
            'mode': self.mode,
            'max_chi': self.max_chi,
            'entries': entries,
        }


def _pair(z):
    z = complex(z)
    return [z.real, z.imag]


def omega(k, g, points, geom=None, table=None, mode='reflected'):
    """
    Value of omega_k^(g) / prod du_i at ``points``.

    Either pass a populated ``table`` or a ``geom`` to build one on the fly.
    """
    if table is None:
        if geom is None:
            raise ConfigurationError('omega needs a CorrelatorTable or a CurveGeometry')
        table = CorrelatorTable(geom, targets=[(k, g)], mode=mode)
    return table.evaluate(k, g, list(points))


# ---------------------------------------------------------------------------
# the regularized bracket at a branch point and closed forms
# ---------------------------------------------------------------------------

def s_B(jets):
    """S_B(v_i) = -6 Res "omega_2(u, u-bar)"/dx = -6 c_B/s' - s'''/(4 s'^2), per branch point."""
    return tuple(-6 * jets.c_B / bp.s1 - bp.s3 / (4 * bp.s1 ** 2) for bp in jets.points)


def s_B_series(jets):
    """The lattice-series part (2 pi^2 + sum_m 6 cos(pi (1 - mu) m) pi^2/sin^2(pi m tau))/s'."""
    return tuple(-6 * jets.c_B / bp.s1 for bp in jets.points)


def bracket_residues(jets):
    """
    Residues of the regularized "omega_2(u, u-bar)" at each branch point:
    (u - v) times it, divided by (u - v), and divided by dx.
    """
    out = []
    for bp in jets.points:
        series, rho = bp.regularized.series, bp.scale
        by_dx = series * bp.s.series.inverse()
        out.append({
            'times_distance': rho ** 2 * series.coeff(-2),
            'over_distance': series.coeff(0),
            'over_dx': rho * by_dx.residue(),
        })
    return out


def omega3_closed(points, jets):
    """omega_3^(0) = sum_i -2/(y' s')(v_i) wbar2(u_0, v_i) wbar2(u_1, v_i) wbar2(u_2, v_i)."""
    geom = jets.geom
    total = 0j
    for bp in jets.points:
        product = 1.0
        for u in points:
            product = product * wbar2(u, bp.center, geom, jets.cfg)
        total += -2 / (bp.y1 * bp.s1) * product
    return total


def _w11_weights(jets):
    """Coefficients of (second derivative, value) in the omega_1^(1) closed form."""
    weights = []
    for bp, sb in zip(jets.points, s_B(jets)):
        second = -1 / (24 * bp.y1 * bp.s1)
        value = -(sb / 6 - bp.y3 / (24 * bp.y1 * bp.s1)) / bp.y1
        weights.append((second, value))
    return weights


def omega11_closed(u0, jets):
    """omega_1^(1)(u0) = -sum_i [chi_2/(24 y' s') + (chi_0/y')(S_B/6 - y'''/(24 y' s'))]."""
    geom = jets.geom
    total = 0j
    for bp, (second, value) in zip(jets.points, _w11_weights(jets)):
        total = total + (second * wbar2(u0, bp.center, geom, jets.cfg, deriv0=2)
                         + value * wbar2(u0, bp.center, geom, jets.cfg))
    return total


# ---------------------------------------------------------------------------
# free energies
# ---------------------------------------------------------------------------

class DilatonPotential:
    """
    phi(u) = int_{base}^{u} y s du, so that d phi = y dx.

    The default base point is v2 (x = b); the evaluator integrates along the
    straight segment from the base point.
    """

    def __init__(self, geom, base_point=None, order=None):
        self.geom = geom
        self.base_point = geom.v2 if base_point is None else complex(base_point)
        self.order = order or numerics()['QUAD_ORDER']

    def derivative(self, u):
        return y_of(u, self.geom) * s_of_u(u, self.geom)

    def __call__(self, u):
        if abs(u - self.base_point) < 1e-15:
            return 0j
        return segment_integral(self.derivative, self.base_point, u, self.order)

    def jet(self, bp):
        """Laurent jet of phi at a branch point: phi(v) + rho * int Y d eps."""
        return bp.Y.series.integ() * bp.scale + self(bp.center)


def _residue_with(series, window, lo):
    """eps^-1 coefficient of series times the window (lo, coefficients)."""
    total = 0j
    for p in range(series.val, series.top + 1):
        o = -1 - p
        if lo <= o < lo + len(window):
            total += series.coeff(p) * window[o - lo]
    return total


def _first_argument_windows(table, k, g, points):
    """Jet windows in the first argument of omega_k^(g)(u, points), per branch point."""
    out = table.entry(k, g).tensor
    for u in reversed(points):
        out = out @ table.jets.chi_values(u)
    return [(bp, bp.chi.T @ out) for bp in table.jets.points]


def free_energy(g, table, phi=None):
    """
    F_g = 1/(2 - 2g) sum_i Res_{v_i} phi omega_1^(g), g >= 2.

    Raises:
        ConfigurationError: g < 2
        MissingCorrelatorError: omega_1^(g) not in the table
    """
    if g < 2:
        raise ConfigurationError('free_energy covers g >= 2; use f0 and dF1_dt below')
    phi = phi or DilatonPotential(table.geom)
    total = 0j
    for bp, window in _first_argument_windows(table, 1, g, []):
        total += bp.scale * _residue_with(phi.jet(bp), window, bp.chi_lo)
    value = total / (2 - 2 * g)
    logger.info('F_%d = %s', g, value)
    return value


def dilaton_residue(table, k, g, points, phi=None):
    """
    Both sides of sum_i Res phi(u) omega_{k+1}^(g)(u, I) = (2 - 2g - k) omega_k^(g)(I).

    Returns:
        tuple (residue side, right-hand side)
    """
    phi = phi or DilatonPotential(table.geom)
    lhs = 0j
    for bp, window in _first_argument_windows(table, k + 1, g, list(points)):
        lhs += bp.scale * _residue_with(phi.jet(bp), window, bp.chi_lo)
    factor = 2 - 2 * g - k
    rhs = 0j if factor == 0 else factor * table.evaluate(k, g, list(points))
    return lhs, rhs


def omega_t_path(geom):
    """Polygon from u(infinity) to its reflection u(infinity) + tau, clear of the branch points."""
    start = geom.u_infinity
    return [start, start + 0.25, start + 0.25 + geom.tau, start + geom.tau]


def omega_t_cycle(u, geom, cfg=None, order=None):
    """int over the t-cycle of wbar2(., u): the t-derivative s f_mu of omega_1^(0) at u."""
    order = order or numerics()['QUAD_ORDER']
    return path_integral(lambda z: wbar2(z, u, geom, cfg), omega_t_path(geom), order)


def _sf_jets(jets):
    geom = jets.geom

    def sf(u):
        return s_of_u(u, geom) * basis(u, geom)[0]

    out = []
    for bp in jets.points:
        coeffs = circle_coefficients(sf, bp.center, bp.scale, 128, range(3))
        out.append((complex(coeffs[0]), complex(2 * coeffs[2])))
    return out


def dF1_dt(table, route='closed', order=None):
    """
    dF_1/dt, either from the closed form with the jets of s f_mu ('closed')
    or by Gauss-Legendre integration of omega_1^(1) along the t-cycle ('path').
    """
    if route == 'closed':
        total = 0j
        for (second, value), (sf0, sf2) in zip(_w11_weights(table.jets), _sf_jets(table.jets)):
            total += second * sf2 + value * sf0
        return total
    if route == 'path':
        order = order or numerics()['QUAD_ORDER']
        return path_integral(lambda u: table.evaluate(1, 1, [u]), omega_t_path(table.geom), order)
    raise ConfigurationError(f"unknown route {route!r}, expected 'closed' or 'path'")


# ---------------------------------------------------------------------------
# genus zero free energy
# ---------------------------------------------------------------------------

def _half_path(geom):
    """Vertical segment from u(infinity) to the branch point of x = b, Re u = -1/2."""
    return geom.u_infinity, geom.tau - 0.5


def _f0_t_subtracted(geom, order):
    params = geom.params
    n, t, b = geom.n, params.t, geom.b

    def integrand(u):
        values = []
        for z in np.atleast_1d(u):
            x = x_of_u(z, geom)
            regular = 2 * w1_stable(z, geom) + n * w1_stable(geom.tau - z, geom) - (2 - n) * t / x
            values.append(regular * s_of_u(z, geom))
        return np.array(values)

    integral = segment_integral(integrand, *_half_path(geom), order)
    return complex(-params.potential(b)) + (2 - n) * t * cmath.log(b) + integral


def _f0_t_limit(geom, order, start=0.2, levels=5, tol=1e-6):
    """Richardson extrapolation of the cut-off expression as the cut-off point tends to u(infinity)."""
    params = geom.params
    n, t = geom.n, params.t
    origin, end = _half_path(geom)
    span = end - origin

    def cutoff(fraction):
        first = origin + fraction * span
        points = [first]
        f = fraction
        while 2 * f < 1:
            f *= 2
            points.append(origin + f * span)
        points.append(end)
        x = x_of_u(first, geom)
        integral = path_integral(lambda u: y_of(u, geom) * s_of_u(u, geom), points, order)
        return (2 - n) * t * cmath.log(x) - complex(params.potential(x)) + integral

    table = [[cutoff(start)]]
    for level in range(1, levels + 1):
        row = [cutoff(start / 2 ** level)]
        for j in range(1, level + 1):
            row.append(row[j - 1] + (row[j - 1] - table[-1][j - 1]) / (2 ** j - 1))
        table.append(row)
    value, previous = table[-1][-1], table[-2][-1]
    change = abs(value - previous)
    logger.debug('f0_t limit: extrapolations %s', [row[-1] for row in table])
    if change > tol * max(1.0, abs(value)):
        raise ConvergenceError('cut-off limit of dF0/dt did not settle', last_iterate=value, residual=change)
    return value


def f0_t(geom, method='subtracted', order=None):
    """
    dF_0/dt = lim [(2 - n) t ln x - V(x) + int_{x}^{b} y dx'] as x -> infinity.

    'subtracted' integrates y + V' - (2 - n) t/x from infinity to b directly;
    'limit' extrapolates the cut-off expression.

    Raises:
        ConvergenceError: the 'limit' extrapolation does not settle
    """
    order = order or numerics()['QUAD_ORDER']
    if method == 'subtracted':
        return _f0_t_subtracted(geom, order)
    if method == 'limit':
        return _f0_t_limit(geom, order)
    raise ConfigurationError(f"unknown method {method!r}, expected 'subtracted' or 'limit'")


def f0_tt(geom, order=None):
    """
    d^2F_0/dt^2 = (2 - n) ln b + int_{u(inf)}^{u(b)} [2 f(u) + n f(tau - u) - (2 - n)/x] s du,
    using dW_1^(0)/dt = f_mu.
    """
    order = order or numerics()['QUAD_ORDER']
    n = geom.n

    def integrand(u):
        f = basis(u, geom)[0]
        f_reflected = reflected_basis(u, geom)[0]
        return (2 * f + n * f_reflected - (2 - n) / x_of_u(u, geom)) * s_of_u(u, geom)

    return (2 - n) * cmath.log(geom.b) + segment_integral(integrand, *_half_path(geom), order)


def endpoint_t_derivatives(geom, h=1e-4):
    """(da/dt, db/dt) by central differences of the endpoint solve."""
    params = geom.params
    seed = (geom.a, geom.b)
    plus = solve_endpoints(params.with_t(params.t + h), seed=seed)
    minus = solve_endpoints(params.with_t(params.t - h), seed=seed)
    return (plus.a - minus.a) / (2 * h), (plus.b - minus.b) / (2 * h)


def f0_ttt(geom, h=1e-4):
    """d^3F_0/dt^3 = (2 - n)/(a^2 - b^2) [(a^2 - e^2)/a da/dt - (b^2 - e^2)/b db/dt]."""
    a, b, e2 = geom.a, geom.b, geom.e_mu ** 2
    da, db = endpoint_t_derivatives(geom, h)
    return (2 - geom.n) / (a ** 2 - b ** 2) * ((a ** 2 - e2) / a * da - (b ** 2 - e2) / b * db)


def f0(geom, f0_t_value=None):
    """F_0 = -1/2 [x^-1](V W_1^(0)) + t/2 dF_0/dt."""
    params = geom.params

    def product(u):
        return params.potential(x_of_u(u, geom)) * w1_algebraic(u, geom)

    residue = coefficients_at_infinity(product, geom, [-1])[0]
    if f0_t_value is None:
        f0_t_value = f0_t(geom)
    return complex(-0.5 * residue + 0.5 * params.t * f0_t_value)


# ---------------------------------------------------------------------------
# property checks
# ---------------------------------------------------------------------------

def homogeneity_defect(func, geom, degree, h=1e-4):
    """
    (t d/dt + sum_j t_j d/dt_j) F - degree F by central differences along the
    scaling (t, t_j) -> lambda (t, t_j), lambda = 1 +/- h.

    Args:
        func: callable CurveGeometry -> complex
        geom: solved CurveGeometry at lambda = 1
        degree: expected homogeneity degree (2 - 2g - k)
    """
    params = geom.params
    seed = (geom.a, geom.b)

    def scaled(lam):
        p = params.with_pot([lam * v for v in params.pot]).with_t(lam * params.t)
        return func(solve_endpoints(p, seed=seed))

    derivative = (scaled(1 + h) - scaled(1 - h)) / (2 * h)
    return derivative - degree * func(geom)


def t_variation(geom, x, h=1e-5):
    """(finite-difference dW_1^(0)/dt at fixed x, f_mu(x))."""
    params = geom.params
    seed = (geom.a, geom.b)
    plus = solve_endpoints(params.with_t(params.t + h), seed=seed)
    minus = solve_endpoints(params.with_t(params.t - h), seed=seed)
    fd = (w1(x, plus) - w1(x, minus)) / (2 * h)
    return fd, basis(uniformize(x, geom), geom)[0]


def tj_variation(geom, j, x1, h=1e-5, nodes=None):
    """
    (Res_{u(inf)} (x^j/j) W_2^(0)(x(u), x1) dx, finite-difference dW_1^(0)(x1)/dt_j).
    """
    if j < 1:
        raise ConfigurationError('t_j variations start at j = 1')
    nodes = nodes or numerics()['INFINITY_NODES']
    params = geom.params
    u1 = uniformize(x1, geom)

    def integrand(u):
        x = x_of_u(u, geom)
        return x ** j / j * w2_series(u1, u, geom) * s_of_u(u, geom)

    analytic = circle_integral(integrand, geom.u_infinity, infinity_radius(geom), nodes) / (2j * math.pi)

    def shifted(delta):
        pot = list(params.pot) + [0j] * max(0, j + 1 - len(params.pot))
        pot[j] += delta
        return solve_endpoints(params.with_pot(pot), seed=(geom.a, geom.b))

    fd = (w1(x1, shifted(h)) - w1(x1, shifted(-h))) / (2 * h)
    return analytic, fd


def linear_equation_defect(table, k, g, s, others=()):
    """
    |W(x + i0, I) + n W(-x, I) + W(x - i0, I)| / |W(x + i0, I)| for x = x(tau + s) on (a, b).
    """
    geom = table.geom
    upper, lower = geom.tau + s, geom.tau - s

    def resolvent(u):
        return table.evaluate(k, g, [u] + list(others)) / s_of_u(u, geom)

    top = resolvent(upper)
    defect = top + resolvent(lower) + geom.n * resolvent(geom.tau - upper)
    return abs(defect) / max(abs(top), 1e-300)


def loop_equation_defect_11(table, s):
    """
    Jump across the cut of the genus-one loop-equation combination

        y(x) W_1^(1)(x) + y(-x) W_1^(1)(-x) + W_2(x, x) + W_2(-x, -x) + n W_2(x, -x),

    which is a polynomial; relative to the size of its terms, at x = x(tau + s).
    """
    geom = table.geom

    def combination(u):
        r = geom.tau - u
        w11 = table.resolvent(1, 1, [u])
        w11_reflected = table.resolvent(1, 1, [r])
        terms = (y_of(u, geom) * w11, y_of(r, geom) * w11_reflected,
                 w2_closed_at(u, u, geom), w2_closed_at(r, r, geom), geom.n * w2_closed_at(u, r, geom))
        return sum(terms), max(abs(term) for term in terms)

    upper, scale_upper = combination(geom.tau + s)
    lower, scale_lower = combination(geom.tau - s)
    return abs(upper - lower) / max(scale_upper, scale_lower)
