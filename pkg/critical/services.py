"""
Critical limits of the loop gas: the dense solution with its cut on [0, b],
the fully packed limit curve, the phase table and the scaling fits of a
sequence of geometries approaching a = 0.
"""

import cmath
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, stats

from core.exceptions import ConfigurationError, ConvergenceError, DomainError, LoopCurveError, PoleError
from core.quadrature import circle_coefficients
from spectral_curve.services import basis, solve_endpoints, uniformize

logger = logging.getLogger(__name__)

DENSE = (-1, 0)
DILUTE = (1, 0)


# ---------------------------------------------------------------------------
# Chebyshev functions, z = cos(phi)
# ---------------------------------------------------------------------------

def _arccos(z):
    return np.arccos(np.asarray(z, dtype=complex))


def chebyshev_t(z, mu):
    """T_mu(z) = cos(mu phi), analytic off ]-inf, -1]."""
    return np.cos(mu * _arccos(z))


def chebyshev_t_hat(z, mu):
    """T-hat_mu(z) = cot(phi) sin(mu phi)."""
    phi = _arccos(z)
    return np.sin(mu * phi) / np.tan(phi)


def chebyshev_s(z, mu):
    """tan(phi) sin(mu phi) = (1/z^2 - 1) T-hat_mu(z), the second homogeneous solution."""
    phi = _arccos(z)
    return np.tan(phi) * np.sin(mu * phi)


def chebyshev_pairing(f, g, z, n):
    """
    (f|g)(z) = f(z)g(z) + f(-z)g(-z) + n/2 (f(z)g(-z) + f(-z)g(z)).

    Args:
        f: vectorised callable
        g: vectorised callable
        z: point(s)
        n: loop fugacity
    """
    z = np.asarray(z, dtype=complex)
    fz, fm, gz, gm = f(z), f(-z), g(z), g(-z)
    return fz * gz + fm * gm + 0.5 * n * (fz * gm + fm * gz)


# ---------------------------------------------------------------------------
# dense solution, cut on [0, b]
# ---------------------------------------------------------------------------

def _particular_coefficients(params):
    """Ascending coefficients of (2V'(x) - n V'(-x)) / (4 - n^2)."""
    n = params.n
    v = params.derivative_coefficients()
    signs = np.array([(-1) ** m for m in range(len(v))])
    return (2 - n * signs) * v / (4 - n ** 2)


@dataclass(frozen=True)
class DenseSolution:
    """
    W(x) = P(x) + [A(x^2) cos(mu phi) + Ahat(x^2) tan(phi) sin(mu phi)] / sin^2(pi mu),
    z = cos(phi) = -b/x, with P the particular solution of the linear equation.

    ``a_coeffs`` and ``a_hat_coeffs`` are ascending in x^2.
    """

    params: object
    b: float
    a_coeffs: tuple
    a_hat_coeffs: tuple
    t: complex

    @property
    def mu(self):
        return self.params.mu

    def A(self, x):
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=complex) ** 2, self.a_coeffs)

    def A_hat(self, x):
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=complex) ** 2, self.a_hat_coeffs)

    def particular(self, x):
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=complex), _particular_coefficients(self.params))

    def _phi(self, x, side):
        x = np.asarray(x, dtype=complex)
        on_cut = (x.imag == 0) & (x.real > 0) & (x.real < self.b)
        if np.any(on_cut) and side is None:
            raise DomainError('x lies on the cut [0, b]; pass side=+1 or side=-1')
        phi = _arccos(-self.b / np.where(x == 0, 1, x))
        if np.any(on_cut):
            theta = np.arccosh(self.b / np.where(on_cut, x.real, self.b))
            phi = np.where(on_cut, np.pi - side * 1j * theta, phi)
        return phi

    def _combine(self, x, phi):
        mu = self.mu
        hom = self.A(x) * np.cos(mu * phi) + self.A_hat(x) * np.tan(phi) * np.sin(mu * phi)
        return self.particular(x) + hom / math.sin(math.pi * mu) ** 2

    def resolvent(self, x, side=None):
        """
        W(x); on the open cut ]0, b[ the boundary value x + i0 (side=+1) or x - i0 (side=-1).

        Raises:
            PoleError: x = 0
            DomainError: x on the cut without a side
        """
        scalar = np.ndim(x) == 0
        x = np.asarray(x, dtype=complex)
        if np.any(x == 0):
            raise PoleError('the dense resolvent is singular at x = 0')
        values = self._combine(x, self._phi(x, side))
        return complex(values) if scalar else values

    def y_cut(self, theta):
        """y = W(x - i0) - W(x + i0) at x = b / cosh(theta), theta > 0."""
        theta = np.asarray(theta, dtype=complex)
        x = self.b / np.cosh(theta)
        return self._combine(x, np.pi + 1j * theta) - self._combine(x, np.pi - 1j * theta)

    def density(self, x):
        """rho(x) = (W(x - i0) - W(x + i0)) / (2 i pi t), zero off [0, b]."""
        x = complex(x)
        if x.imag != 0 or not 0 < x.real < self.b:
            return 0j
        theta = math.acosh(self.b / x.real)
        return complex(self.y_cut(theta)) / (2j * math.pi * self.t)

    def normalization(self):
        """Integral of rho over [0, b], computed in theta with x = b / cosh(theta)."""
        upper = min(700.0, 60.0 / (1 - self.mu))

        def integrand(theta):
            jac = self.b * math.sinh(theta) / math.cosh(theta) ** 2
            return complex(self.y_cut(theta)) * jac / (2j * math.pi * self.t)

        re, _ = integrate.quad(lambda s: integrand(s).real, 0, upper, limit=200)
        im, _ = integrate.quad(lambda s: integrand(s).imag, 0, upper, limit=200)
        return complex(re, im)

    def linear_equation_defect(self, x):
        """W(x + i0) + W(x - i0) + n W(-x) - V'(x) on the cut."""
        w_plus = self.resolvent(x, side=1)
        w_minus = self.resolvent(x, side=-1)
        return w_plus + w_minus + self.params.n * self.resolvent(-x) - complex(self.params.potential_derivative(x))

    def regularity_defect(self):
        """A(0) - Ahat(0): coefficient of the x^(-mu) divergence of y at x -> 0."""
        return complex(self.a_coeffs[0] - self.a_hat_coeffs[0])

    def to_record(self):
        def pair(z):
            z = complex(z)
            return [z.real, z.imag]

        return {
            'b': self.b,
            'A': [pair(c) for c in self.a_coeffs],
            'A_hat': [pair(c) for c in self.a_hat_coeffs],
            't': pair(self.t),
            'params': self.params.to_dict(),
        }


def dense_solution(b, params, nodes=64):
    """
    Solve for A and Ahat so that W - P has no polynomial part at x -> infinity,
    then read t from W ~ t/x.

    Args:
        b: right endpoint of the cut [0, b]
        params: ModelParams
        nodes: trapezoid points for the Laurent coefficients in w = 1/x

    Returns:
        DenseSolution
    """
    if b <= 0:
        raise DomainError(f'the cut [0, b] needs b > 0, got b={b}')
    mu = params.mu
    degree = params.d_max - 1
    n_a = degree // 2 + 1
    n_a_hat = (degree + 1) // 2
    top = 2 * max(n_a, n_a_hat) + 1
    orders = list(range(-1, top + 1))
    radius = 0.5 / b

    def laurent(func):
        coeffs = circle_coefficients(lambda w: func(-b * w, mu), 0, radius, nodes, orders)
        return dict(zip(orders, coeffs))

    tau = laurent(chebyshev_t)
    sig = laurent(chebyshev_s)

    def coeff(table, k):
        return table.get(k, 0j) if k >= -1 else 0j

    sin2 = math.sin(math.pi * mu) ** 2
    p = _particular_coefficients(params)
    matrix = np.zeros((degree + 1, n_a + n_a_hat), dtype=complex)
    rhs = np.zeros(degree + 1, dtype=complex)
    for m in range(degree + 1):
        for i in range(n_a):
            matrix[m, i] = coeff(tau, 2 * i - m) if 2 * i - m >= 0 else 0j
        for i in range(n_a_hat):
            matrix[m, n_a + i] = coeff(sig, 2 * i - m)
        rhs[m] = -sin2 * (p[m] if m < len(p) else 0)
    try:
        solution = np.linalg.solve(matrix, rhs)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError('singular system for the dense solution', last_iterate=b) from exc
    a_coeffs, a_hat_coeffs = solution[:n_a], solution[n_a:]
    t = (sum(a_coeffs[i] * coeff(tau, 2 * i + 1) for i in range(n_a))
         + sum(a_hat_coeffs[i] * coeff(sig, 2 * i + 1) for i in range(n_a_hat))) / sin2
    logger.debug('dense solution at b=%s: t=%s', b, t)
    return DenseSolution(params, float(b), tuple(a_coeffs), tuple(a_hat_coeffs), complex(t))


def dense_disc(x, b, params, side=None):
    """
    Resolvent and density of the dense solution with its cut on [0, b].

    Returns:
        tuple (W(x), rho(x)); rho is zero off the cut
    """
    solution = dense_solution(b, params)
    w = solution.resolvent(x, side)
    rho = solution.density(x) if side is not None else 0j
    return w, rho


def critical_endpoint(params, bracket=None, grid=200):
    """
    The endpoint b for which y stays finite at x = 0, i.e. A(0) = Ahat(0).

    Args:
        params: ModelParams with real coefficients
        bracket: optional (b_lo, b_hi) with a sign change of the regularity defect
        grid: number of geometric scan points when no bracket is given

    Raises:
        ConvergenceError: no sign change found
    """
    def defect(b):
        return dense_solution(b, params).regularity_defect().real

    if bracket is None:
        scale = max(1.0, params.c)
        points = np.geomspace(1e-3 * scale, 1e3 * scale, grid)
        values = [defect(b) for b in points]
        for lo, hi, v_lo, v_hi in zip(points[:-1], points[1:], values[:-1], values[1:]):
            if v_lo == 0:
                return float(lo)
            if v_lo * v_hi < 0:
                bracket = (lo, hi)
                break
        else:
            raise ConvergenceError('no regular endpoint in the scanned range', last_iterate=(points[0], points[-1]))
    b = optimize.brentq(defect, *bracket, xtol=1e-14, rtol=1e-14)
    logger.info('regular dense endpoint b=%.12g', b)
    return float(b)


def fpl_limit_curve(zeta, params, b=None):
    """
    Fully packed limit curve at x = b / cosh(zeta):

        y(zeta) = C sinh((1 - mu) zeta) / cosh(zeta),   C = 2i Ahat / sin(pi mu)

    equal to tanh(zeta) cosh(mu zeta) - sinh(mu zeta) up to C; y(0) = 0 and
    y ~ x^mu as x -> 0. C is taken from the dense solution at b, which by
    default is the regular endpoint.

    Raises:
        ConfigurationError: potential is not the fully packed one (d_max = 2)
    """
    if params.d_max != 2:
        raise ConfigurationError(f'the fully packed limit needs a quadratic potential, got d_max={params.d_max}')
    if b is None:
        b = critical_endpoint(params)
    solution = dense_solution(b, params)
    mu = params.mu
    const = 2j * solution.a_hat_coeffs[0] / math.sin(math.pi * mu)
    zeta = np.asarray(zeta, dtype=complex) if np.ndim(zeta) else complex(zeta)
    if np.ndim(zeta):
        return const * np.sinh((1 - mu) * zeta) / np.cosh(zeta)
    return const * cmath.sinh((1 - mu) * zeta) / cmath.cosh(zeta)


# ---------------------------------------------------------------------------
# phases
# ---------------------------------------------------------------------------

def alpha_kg(alpha, k, g):
    """alpha(k, g) = (2 - 2g - k)(alpha + 1) - k."""
    return (2 - 2 * g - k) * (alpha + 1) - k


@dataclass(frozen=True)
class PhaseRecord:
    epsilon: int
    m: int
    mu: float
    lambda_: float
    alpha: float
    beta: float
    gamma_str: float

    @classmethod
    def build(cls, epsilon, m, mu):
        lam = epsilon * (1 - mu) + 2 * m + 1
        beta = (lam + mu) / 2
        return cls(epsilon, m, mu, lam, lam, beta, (mu - 1) / beta)

    @property
    def name(self):
        if (self.epsilon, self.m) == DENSE:
            return 'dense'
        if (self.epsilon, self.m) == DILUTE:
            return 'dilute'
        return f'multicritical({self.epsilon:+d},{self.m})'

    def alpha_kg(self, k, g):
        return alpha_kg(self.alpha, k, g)

    def to_record(self, kg=()):
        record = {
            'name': self.name,
            'epsilon': self.epsilon,
            'm': self.m,
            'mu': self.mu,
            'lambda': self.lambda_,
            'alpha': self.alpha,
            'beta': self.beta,
            'gamma_str': self.gamma_str,
        }
        if kg:
            record['alpha_kg'] = {f'{k},{g}': self.alpha_kg(k, g) for k, g in kg}
        return record


def admissible_phases(d_max):
    """
    (epsilon, m) pairs reachable with a potential of degree d_max:
    {+-1} x {0 .. d'-1} for d_max = 2d' + 1, the same without (1, d'-1) for d_max = 2d'.
    """
    if d_max < 2:
        raise DomainError(f'phases need d_max >= 2, got {d_max}')
    d_prime = d_max // 2
    pairs = [(epsilon, m) for m in range(d_prime) for epsilon in (-1, 1)]
    if d_max % 2 == 0:
        pairs.remove((1, d_prime - 1))
    return pairs


def phase_table(d_max, mu):
    return [PhaseRecord.build(epsilon, m, mu) for epsilon, m in admissible_phases(d_max)]


def small_x_exponent(solution, x_values=None):
    """Slope of log|y| against log x near x = 0 for a DenseSolution."""
    if x_values is None:
        x_values = solution.b * np.geomspace(1e-8, 1e-6, 6)
    x_values = np.asarray(x_values, dtype=float)
    theta = np.arccosh(solution.b / x_values)
    y = np.abs(solution.y_cut(theta))
    return stats.linregress(np.log(x_values), np.log(y)).slope


# ---------------------------------------------------------------------------
# approach to a = 0
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CriticalPoint:
    t_below: float
    t_above: float
    geom: object

    @property
    def a_over_b(self):
        return float((self.geom.a / self.geom.b).real)

    def to_record(self):
        return {'t_below': self.t_below, 't_above': self.t_above, 'a_over_b': self.a_over_b}


def _solve(params, t, seed=None):
    return solve_endpoints(params.with_t(t), seed=seed)


def locate_critical_t(params, t_lo, t_hi, threshold=1e-4, max_iter=80):
    """
    Bisect along real t for the point where the left endpoint a reaches 0.

    Args:
        params: ModelParams with real t
        t_lo: a t where the one-cut solution exists
        t_hi: a t beyond the critical point
        threshold: stop once a <= threshold * b
        max_iter: bisection cap

    Returns:
        CriticalPoint with the last solvable geometry

    Raises:
        ConfigurationError: no solution at t_lo
    """
    try:
        geom = _solve(params, t_lo)
    except (ConvergenceError, DomainError) as exc:
        raise ConfigurationError(f'no one-cut solution at t_lo={t_lo}') from exc
    lo, hi = float(t_lo), float(t_hi)
    for iteration in range(max_iter):
        if (geom.a / geom.b).real <= threshold:
            break
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        try:
            trial = _solve(params, mid, seed=(geom.a, geom.b))
        except (LoopCurveError, ArithmeticError):
            hi = mid
            continue
        lo, geom = mid, trial
        logger.debug('critical bisection %d: t=%.15g a/b=%.3e', iteration, mid, (geom.a / geom.b).real)
    point = CriticalPoint(lo, hi, geom)
    if point.a_over_b > threshold:
        logger.warning('a/b=%.3e above threshold %.1e after bisection', point.a_over_b, threshold)
    else:
        logger.info('critical t between %.12g and %.12g (a/b=%.2e)', lo, hi, point.a_over_b)
    return point


def approach_geometries(params, t_values):
    """Solve along t_values in order, seeding each solve with the previous endpoints."""
    geoms = []
    seed = None
    for t in t_values:
        geom = _solve(params, t, seed=seed)
        geoms.append(geom)
        seed = (geom.a, geom.b)
    return geoms


@dataclass(frozen=True)
class ExponentFit:
    name: str
    slope: float
    stderr: float
    intercept: float
    r_squared: float
    expected: float = None

    @property
    def interval(self):
        """95% confidence interval of the slope."""
        return self.slope - 1.96 * self.stderr, self.slope + 1.96 * self.stderr

    def to_record(self):
        return {
            'name': self.name,
            'slope': self.slope,
            'stderr': self.stderr,
            'interval': list(self.interval),
            'intercept': self.intercept,
            'r_squared': self.r_squared,
            'expected': self.expected,
        }


def _fit(name, x, y, expected=None):
    result = stats.linregress(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return ExponentFit(name, float(result.slope), float(result.stderr), float(result.intercept),
                       float(result.rvalue ** 2), expected)


def _check_samples(geoms, minimum=4):
    if len(geoms) < minimum:
        raise ConfigurationError(f'exponent fits need at least {minimum} geometries, got {len(geoms)}')


def small_a_asymptotics(geoms, x_star=2j, with_f1=False):
    """
    Log-log fits along a sequence of geometries with a -> 0.

    Args:
        geoms: solved CurveGeometry list at real t
        x_star: the fixed x/a at which the f_mu scale factor is sampled
        with_f1: also fit dF_1/dt against d(ln a)/dt (builds a correlator table per sample)

    Returns:
        dict name -> ExponentFit, plus 'f_mu_collapse' holding the relative
        spread of a^mu |f_mu(a x_star)|
    """
    _check_samples(geoms)
    mu = geoms[0].mu
    a = np.array([g.a.real for g in geoms])
    b = np.array([g.b.real for g in geoms])
    log_a = np.log(a)

    fits = {
        'e_mu_squared': _fit('e_mu_squared', log_a, np.log(np.abs([g.e_mu ** 2 for g in geoms])), 2 * (1 - mu)),
        'alpha1': _fit('alpha1', log_a, np.log(np.abs([g.alpha1 + 1j * mu * g.b for g in geoms]))),
    }

    scale = np.array([abs(basis(uniformize(ai * x_star, g), g)[0]) for ai, g in zip(a, geoms)])
    fits['f_mu_scale'] = _fit('f_mu_scale', log_a, np.log(scale), -mu)
    collapsed = scale * a ** mu
    fits['f_mu_collapse'] = float(np.std(collapsed) / np.mean(collapsed))

    if with_f1:
        from toporec.services import CorrelatorTable, dF1_dt

        t = np.array([g.params.t.real for g in geoms])
        rate = np.gradient(log_a, t)
        f1_t = np.array([dF1_dt(CorrelatorTable(g, targets=((1, 1),))).real for g in geoms])
        fits['dF1_dt'] = _fit('dF1_dt', rate, f1_t)
    logger.info('small-a fits over %d geometries, a in [%.3e, %.3e], b ~ %.4g', len(geoms), a.min(), a.max(), b.mean())
    return fits


def third_derivative_scaling(geoms, phase=None):
    """
    Exponent of the singular part of d^3F_0/dt^3 against a, read from
    d(F_0''')/d(ln a) so that the regular constant drops out.

    The expected value is 2(1 - mu) - 2 beta with beta of ``phase`` (dense by default).
    """
    from toporec.services import f0_ttt

    _check_samples(geoms)
    mu = geoms[0].mu
    phase = phase or PhaseRecord.build(*DENSE, mu)
    log_a = np.log([g.a.real for g in geoms])
    third = np.array([f0_ttt(g).real for g in geoms])
    slope = np.abs(np.gradient(third, log_a))
    return _fit('f0_ttt', log_a, np.log(slope), 2 * (1 - mu) - 2 * phase.beta)
