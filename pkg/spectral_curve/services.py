"""
Spectral curve service functions.

The curve is the two-sheeted cover of the x-plane cut along [a, b] and
[-b, -a], uniformized by a torus with periods 1 and 2 tau, tau = iK/K'.
The physical sheet is the strip 0 < Im u < Im tau. Points of interest:

    u = tau/2        x = 0
    u = tau          x = a        (branch point v1)
    u = tau + 1/2    x = b        (branch point v2)
    u = (tau - 1)/2  x = infinity (physical sheet)

Values "at -x" are values at tau - u.
"""

import cmath
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial import Polynomial

from core.conf import numerics
from core.exceptions import (
    ConvergenceError,
    DegenerateBasisError,
    DomainError,
    PoleError,
)
from core.quadrature import circle_nodes, path_integral
from elliptic.services import (
    Modulus,
    log_theta1_derivative,
    modulus_from_k,
    periods_from_tau,
    theta1,
)

logger = logging.getLogger(__name__)

CONTINUATION_STEPS = (0.05, 0.1, 0.2, 0.35, 0.5, 0.7, 0.85, 1.0)


@dataclass(frozen=True)
class CurveGeometry:
    """Solved (or trial) geometry of the spectral curve for one ModelParams."""

    params: object
    a: complex
    b: complex
    mod: Modulus
    K: complex
    K_prime: complex
    x_scale: complex
    e_mu: complex = 0j
    sigma_e_mu: complex = 0j
    alpha1: complex = 0j
    alpha2: complex = 0j
    e_hat_mu: complex = 0j
    residual: float = float('nan')
    cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    @property
    def tau(self):
        return self.mod.tau

    @property
    def k_ratio(self):
        return self.a / self.b

    @property
    def u_infinity(self):
        return (-1 + self.tau) / 2

    @property
    def v1(self):
        return self.tau

    @property
    def v2(self):
        return self.tau + 0.5

    @property
    def branch_points(self):
        return (self.v1, self.v2)

    @property
    def mu(self):
        return self.params.mu

    @property
    def n(self):
        return self.params.n

    @property
    def phase(self):
        """E = e^(i pi mu)."""
        return cmath.exp(1j * math.pi * self.params.mu)

    def to_record(self):
        """Versioned JSON record of the geometry."""

        def pair(z):
            z = complex(z)
            return [z.real, z.imag]

        return {
            'schema': numerics()['REPORT_SCHEMA'],
            'a': pair(self.a),
            'b': pair(self.b),
            'tau': pair(self.tau),
            'K': pair(self.K),
            'K_prime': pair(self.K_prime),
            'e_mu': pair(self.e_mu),
            'sigma_e_mu': pair(self.sigma_e_mu),
            'alpha1': pair(self.alpha1),
            'alpha2': pair(self.alpha2),
            'e_hat_mu': pair(self.e_hat_mu),
            'residual': self.residual,
            'params': self.params.to_dict(),
        }


@dataclass(frozen=True)
class CurvePolys:
    """Even polynomials A and B, ascending coefficients in x."""

    A: np.ndarray
    B: np.ndarray
    odd_defect: float = 0.0

    def A_at(self, x):
        return Polynomial(self.A)(x)

    def B_at(self, x):
        return Polynomial(self.B)(x)


# ---------------------------------------------------------------------------
# geometry construction
# ---------------------------------------------------------------------------

def build_geometry(a, b, params, tau_guess=None, residual=float('nan')):
    """
    Geometry attached to trial endpoints (a, b).

    Args:
        a, b: cut endpoints, possibly complex
        params: ModelParams
        tau_guess: previous tau, used to follow tau continuously for complex k
        residual: endpoint residual to record

    Returns:
        CurveGeometry
    """
    a, b = complex(a), complex(b)
    if b == 0 or a == 0:
        raise DomainError('cut endpoints must be non-zero')
    k = a / b
    if abs(k.imag) > 0:
        mod = modulus_from_k(k, tau_guess=tau_guess)
    else:
        mod = modulus_from_k(k)
    K, Kp = periods_from_tau(mod)
    half = mod.tau / 2
    x_scale = a * theta1(half + 0.5, mod) / theta1(half, mod)
    geom = CurveGeometry(params=params, a=a, b=b, mod=mod, K=K, K_prime=Kp, x_scale=x_scale, residual=residual)

    mu = params.mu
    u_e = (mod.tau - mu) / 2
    e_mu = x_of_u(u_e, geom)
    sigma_e = sigma_of_u(u_e, geom)
    alpha1 = -1j * b / (2 * Kp) * log_theta1_derivative((1 - mu) / 2, mod)
    alpha2 = 0.5 * (alpha1 ** 2 + a ** 2 + b ** 2 - e_mu ** 2)
    # zero of L_e: -alpha1 (x^2 - e^2) + e sigma(e) = 0
    e_hat = np.sqrt(e_mu ** 2 + e_mu * sigma_e / alpha1)
    if e_hat.real < 0:
        e_hat = -e_hat
    return replace(
        geom, e_mu=complex(e_mu), sigma_e_mu=complex(sigma_e), alpha1=complex(alpha1),
        alpha2=complex(alpha2), e_hat_mu=complex(e_hat),
    )


# ---------------------------------------------------------------------------
# uniformization
# ---------------------------------------------------------------------------

def _w(u, geom):
    return np.asarray(u, dtype=complex) - geom.tau / 2


def _scalar(values, like):
    return complex(values) if np.ndim(like) == 0 else values


def x_of_u(u, geom):
    """x(u) = x_scale theta1(u - tau/2) / theta1(u - tau/2 + 1/2); infinity at the pole."""
    w = _w(u, geom)
    num = np.asarray(theta1(w, geom.mod), dtype=complex)
    den = np.asarray(theta1(w + 0.5, geom.mod), dtype=complex)
    with np.errstate(divide='ignore', invalid='ignore'):
        values = np.where(np.abs(den) <= 1e-15 * np.abs(num), complex('inf'), geom.x_scale * num / den)
    return _scalar(values, u)


def s_of_u(u, geom):
    """s(u) = dx/du."""
    w = _w(u, geom)
    mod = geom.mod
    t0, t1 = theta1(w, mod), theta1(w, mod, 1)
    h0, h1 = theta1(w + 0.5, mod), theta1(w + 0.5, mod, 1)
    return _scalar(geom.x_scale * (t1 * h0 - t0 * h1) / h0 ** 2, u)


def sigma_of_u(u, geom):
    """Physical-sheet root sigma = -i b s / (2K'), with sigma^2 = (x^2 - a^2)(x^2 - b^2)."""
    return -1j * geom.b * s_of_u(u, geom) / (2 * geom.K_prime)


def sigma_of_x(x, geom):
    """sigma on the physical sheet as a function of x, principal roots."""
    x = np.asarray(x, dtype=complex)
    a2, b2 = geom.a ** 2, geom.b ** 2
    safe = np.where(x == 0, 1.0, x)
    values = safe ** 2 * np.sqrt(1 - a2 / safe ** 2) * np.sqrt(1 - b2 / safe ** 2)
    values = np.where(x == 0, -geom.a * geom.b, values)
    return _scalar(values, x)


def _on_cut(x, geom):
    if abs(x.imag) > 1e-14 * max(abs(x), 1.0):
        return False
    lo, hi = abs(geom.a), abs(geom.b)
    return lo - 1e-14 <= abs(x.real) <= hi + 1e-14


def uniformize(x, geom, order=None):
    """
    u(x) on the physical sheet: u = tau/2 - (i b / 2K') int_0^x dx' / sigma(x'),
    polished by Newton iteration on x_of_u.

    Raises:
        DomainError: x lies on a cut
    """
    if x is None or cmath.isinf(complex(x)):
        return geom.u_infinity
    x = complex(x)
    if _on_cut(x, geom):
        raise DomainError(f'x={x} lies on a cut; pass x +/- i eps')
    order = order or numerics()['QUAD_ORDER']
    prefactor = -1j * geom.b / (2 * geom.K_prime)

    def integrand(z):
        return prefactor / sigma_of_x(z, geom)

    if x == 0:
        return geom.tau / 2
    if abs(x.imag) <= 1e-14 * abs(x) and abs(x.real) > abs(geom.b):
        # straight path would run along a cut
        points = [0j, 1j * abs(geom.b), x]
    else:
        points = [0j, x]
    u = geom.tau / 2 + path_integral(integrand, points, order)

    for _ in range(30):
        defect = x_of_u(u, geom) - x
        if abs(defect) < 1e-14 * max(abs(x), 1.0):
            break
        u = u - defect / s_of_u(u, geom)
    return complex(u)


# ---------------------------------------------------------------------------
# D_mu and the basis
# ---------------------------------------------------------------------------

def D_mu(u, geom):
    """
    D_mu(u) = (x / sigma)(u) theta1(w + mu/2)/theta1(w) theta1(-1/2)/theta1(-1/2 + mu/2), w = u - tau/2.

    D_mu(u + 1) = D_mu(u), D_mu(u + tau) = e^(-i pi mu) D_mu(u) and D_mu ~ 1/x at infinity.
    """
    mod, mu = geom.mod, geom.mu
    w = _w(u, geom)
    sigma = sigma_of_u(u, geom)
    if np.ndim(u) == 0 and abs(sigma) < 1e-300:
        raise PoleError(f'D_mu has a pole at u={u}')
    const = theta1(-0.5, mod) / theta1(-0.5 + mu / 2, mod)
    values = geom.x_scale * theta1(w + mu / 2, mod) / (theta1(w + 0.5, mod) * sigma) * const
    return _scalar(values, u)


def sigma_over_x(u, geom):
    w = _w(u, geom)
    values = sigma_of_u(u, geom) * theta1(w + 0.5, geom.mod) / (geom.x_scale * theta1(w, geom.mod))
    return _scalar(values, u)


def _check_phase(geom):
    E = geom.phase
    if abs(1 - E) < 1e-12 or abs(1 + E) < 1e-12:
        raise DegenerateBasisError(f'degenerate basis at mu={geom.mu}')
    return E


def basis(u, geom):
    """
    The pair (f_mu, fhat_mu) at u:

        f    = (D(u) + D(-u)) / (1 - E)
        fhat = (sigma/x)(u) (D(u) - D(-u)) / (1 + E)
    """
    E = _check_phase(geom)
    u = np.asarray(u, dtype=complex) if np.ndim(u) else complex(u)
    plus, minus = D_mu(u, geom), D_mu(-u, geom)
    f = (plus + minus) / (1 - E)
    fhat = sigma_over_x(u, geom) * (plus - minus) / (1 + E)
    return f, fhat


def reflected_basis(u, geom):
    """(f_mu, fhat_mu) at -x, i.e. at tau - u."""
    if np.ndim(u):
        u = np.asarray(u, dtype=complex)
    return basis(geom.tau - u, geom)


def bilinear(g, h, g_minus, h_minus, n):
    """(g | h) = g h + g(-x) h(-x) + n/2 (g h(-x) + g(-x) h)."""
    return g * h + g_minus * h_minus + 0.5 * n * (g * h_minus + g_minus * h)


def norms(u, geom):
    """(f|f, fhat|fhat, f|fhat) at x(u)."""
    f, fh = basis(u, geom)
    fm, fhm = reflected_basis(u, geom)
    n = geom.n
    return bilinear(f, f, fm, fm, n), bilinear(fh, fh, fhm, fhm, n), bilinear(f, fh, fm, fhm, n)


def norm_R(x, geom):
    """R_mu = (2 - n)(x^2 - e^2)/((x^2 - a^2)(x^2 - b^2))."""
    return (2 - geom.n) * (x ** 2 - geom.e_mu ** 2) / ((x ** 2 - geom.a ** 2) * (x ** 2 - geom.b ** 2))


def norm_R_hat(x, geom):
    """Rhat_mu = (2 + n)(x^2 - e^2)/x^2."""
    return (2 + geom.n) * (x ** 2 - geom.e_mu ** 2) / x ** 2


def wronskian(x, sigma, geom):
    """f(x) fhat(-x) - f(-x) fhat(x) = 2 (x^2 - e^2)/(x sigma)."""
    return 2 * (x ** 2 - geom.e_mu ** 2) / (x * sigma)


def differential_system(u, geom):
    """
    Matrix M(x) with d/dx (f, x fhat/sigma) = M (f, x fhat/sigma).
    """
    E = _check_phase(geom)
    x, sigma = x_of_u(u, geom), sigma_of_u(u, geom)
    e, se = geom.e_mu, geom.sigma_e_mu
    L_o = x / (x ** 2 - e ** 2) - x * (2 * x ** 2 - geom.a ** 2 - geom.b ** 2) / sigma ** 2
    L_e = (-geom.alpha1 + e * se / (x ** 2 - e ** 2)) / sigma
    return np.array([[L_o, (1 + E) / (1 - E) * L_e], [(1 - E) / (1 + E) * L_e, L_o]], dtype=complex)


# ---------------------------------------------------------------------------
# coefficients at infinity and the curve polynomials
# ---------------------------------------------------------------------------

def infinity_radius(geom):
    return 0.45 * min(0.5, abs(geom.tau) / 2)


def coefficients_at_infinity(func, geom, orders, nodes=None):
    """
    [x^k] of the expansion at the physical infinity of a function of u:
    -(1/2 pi i) of the counter-clockwise u-circle integral of F x^(-k-1) s du.

    Args:
        func: vectorised callable of u
        geom: CurveGeometry
        orders: iterable of integer k
        nodes: trapezoid points, defaults to INFINITY_NODES

    Returns:
        numpy array of coefficients
    """
    nodes = nodes or numerics()['INFINITY_NODES']
    centre = geom.u_infinity
    u = circle_nodes(centre, infinity_radius(geom), nodes)
    x = x_of_u(u, geom)
    weight = np.asarray(func(u), dtype=complex) * s_of_u(u, geom) * (u - centre)
    return np.array([-np.mean(weight * x ** (-k - 1)) for k in orders], dtype=complex)


def _polynomial_part(func, geom, degree):
    coeffs = coefficients_at_infinity(func, geom, range(degree + 1))
    odd = coeffs[1::2]
    defect = float(np.max(np.abs(odd))) if odd.size else 0.0
    coeffs[1::2] = 0
    return coeffs, defect


def curve_polys(geom):
    """
    A(x^2) = [-1/2 (V'(x) f(x) + V'(-x) f(-x))]_+ and the same with fhat for B.
    Cached on the geometry.
    """
    if 'polys' in geom.cache:
        return geom.cache['polys']
    params = geom.params
    d_max = params.d_max

    def combination(u, which):
        x = x_of_u(u, geom)
        direct = basis(u, geom)[which]
        reflected = reflected_basis(u, geom)[which]
        return -0.5 * (params.potential_derivative(x) * direct + params.potential_derivative(-x) * reflected)

    A, defect_a = _polynomial_part(lambda u: combination(u, 0), geom, max(d_max - 2, 0))
    B, defect_b = _polynomial_part(lambda u: combination(u, 1), geom, max(d_max - 1, 0))
    polys = CurvePolys(A=A, B=B, odd_defect=max(defect_a, defect_b))
    logger.debug('curve polynomials A=%s B=%s odd defect %.2e', A, B, polys.odd_defect)
    geom.cache['polys'] = polys
    return polys


def y_of(u, geom):
    """y(u) = A(x^2) y_mu + B(x^2) yhat_mu, the cut discontinuity of W_1^(0)."""
    polys = curve_polys(geom)
    x, sigma = x_of_u(u, geom), sigma_of_u(u, geom)
    f_m, fh_m = reflected_basis(u, geom)
    common = x * sigma / (x ** 2 - geom.e_mu ** 2)
    return polys.A_at(x) * common * fh_m - polys.B_at(x) * common * f_m


# ---------------------------------------------------------------------------
# endpoint equations
# ---------------------------------------------------------------------------

def endpoint_residuals(a, b, params, tau_guess=None):
    """
    The two compatibility equations at trial (a, b):

        E1 = [x^-1](x V'(x) f_mu(x)) - (2 - n) t
        E2 = A(e^2) f(e) sigma(e)^2 / (2 - n) + B(e^2) fhat(e) e^2 / (2 + n)

    Returns:
        tuple (numpy array [E1, E2], CurveGeometry)
    """
    geom = build_geometry(a, b, params, tau_guess)
    n = params.n

    def moment(u):
        x = x_of_u(u, geom)
        return x * params.potential_derivative(x) * basis(u, geom)[0]

    e1 = coefficients_at_infinity(moment, geom, [-1])[0] - (2 - n) * params.t
    polys = curve_polys(geom)
    u_e = (geom.tau - geom.mu) / 2
    f_e, fh_e = basis(u_e, geom)
    e = geom.e_mu
    e2 = polys.A_at(e) * f_e * geom.sigma_e_mu ** 2 / (2 - n) + polys.B_at(e) * fh_e * e ** 2 / (2 + n)
    return np.array([e1, e2], dtype=complex), geom


def default_seed(params):
    """Semicircle endpoints c/2 -/+ 2 sqrt(t)."""
    root = cmath.sqrt(params.t)
    return params.c / 2 - 2 * root, params.c / 2 + 2 * root


def _newton(params, seed, tau_guess, tol, max_iter):
    real_mode = abs(params.t.imag) == 0 and tau_guess is None
    z = np.array(seed, dtype=complex)
    if real_mode:
        z = z.real.astype(complex)
    res, geom = endpoint_residuals(z[0], z[1], params, tau_guess)
    norm = float(np.linalg.norm(res))
    for iteration in range(max_iter):
        logger.debug('endpoint Newton %d: a=%s b=%s residual=%.3e', iteration, z[0], z[1], norm)
        if norm < tol:
            logger.info('endpoints converged in %d iterations: a=%s b=%s residual=%.2e', iteration, z[0], z[1], norm)
            return replace(geom, residual=norm)
        guess = None if real_mode else geom.tau
        h = 1e-6 * max(abs(z[1]), 1.0)
        jac = np.empty((2, 2), dtype=complex)
        for j in range(2):
            dz = np.zeros(2, dtype=complex)
            dz[j] = h
            plus, _ = endpoint_residuals(*(z + dz), params, guess)
            minus, _ = endpoint_residuals(*(z - dz), params, guess)
            jac[:, j] = (plus - minus) / (2 * h)
        try:
            step = np.linalg.solve(jac, res)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError('singular Jacobian in endpoint Newton',
                                   last_iterate=tuple(z), residual=norm) from exc
        if real_mode:
            step = step.real.astype(complex)

        # step halving
        damping = 1.0
        for _ in range(12):
            trial = z - damping * step
            try:
                trial_res, trial_geom = endpoint_residuals(trial[0], trial[1], params, guess)
            except DomainError:
                damping /= 2
                continue
            trial_norm = float(np.linalg.norm(trial_res))
            if trial_norm < norm:
                break
            damping /= 2
        else:
            raise ConvergenceError('endpoint Newton stalled', last_iterate=tuple(z), residual=norm)
        z, res, geom, norm = trial, trial_res, trial_geom, trial_norm
    if norm < tol:
        return replace(geom, residual=norm)
    raise ConvergenceError('endpoint Newton did not converge', last_iterate=tuple(z), residual=norm)


def solve_endpoints(params, seed=None, tau_guess=None, tol=None, max_iter=None):
    """
    Solve the compatibility equations for the cut endpoints (a, b).

    Args:
        params: ModelParams
        seed: optional starting (a, b); defaults to c/2 -/+ 2 sqrt(t)
        tau_guess: previous tau for continuation along complex t
        tol: residual tolerance, defaults to ENDPOINT_TOL
        max_iter: Newton cap, defaults to NEWTON_MAX_ITER

    Returns:
        CurveGeometry with the endpoint residual recorded

    Raises:
        ConvergenceError: Newton failed also along the t-continuation
        DomainError: a real solution left the one-cut phase (a <= 0 or a >= b)
    """
    values = numerics()
    tol = tol or values['ENDPOINT_TOL']
    max_iter = max_iter or values['NEWTON_MAX_ITER']
    seed = seed or default_seed(params)
    try:
        geom = _newton(params, seed, tau_guess, tol, max_iter)
    except (ConvergenceError, DomainError) as exc:
        logger.info('direct endpoint solve failed (%s); continuing from small t', exc)
        geom = None
        for fraction in CONTINUATION_STEPS:
            step_params = params.with_t(params.t * fraction)
            step_seed = (geom.a, geom.b) if geom is not None else default_seed(step_params)
            step_guess = geom.tau if (geom is not None and tau_guess is not None) else tau_guess
            geom = _newton(step_params, step_seed, step_guess, tol, max_iter)
        geom = replace(geom, params=params)

    if params.t.imag == 0:
        a, b = geom.a.real, geom.b.real
        if not 0 < a < b:
            raise DomainError(f'solution left the one-cut phase: a={a}, b={b}')
    return geom
