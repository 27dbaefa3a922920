"""
Unstable correlators and kernels on the solved spectral curve.

Every function works on torus coordinates u (physical strip 0 < Im u < Im tau);
the value "at -x" of a function of x is its value at tau - u. The few entry
points taking x arguments (w1_disc, w2_closed, kernel_H) uniformize first.

Forms are returned as the coefficient of du (or du du0), functions of x as
plain values.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from core.conf import numerics
from core.exceptions import ConfigurationError, PoleError
from core.quadrature import circle_integral, segment_integral
from elliptic.services import sin2_kernel, wp_mu
from spectral_curve.services import (
    D_mu,
    basis,
    curve_polys,
    norm_R,
    norm_R_hat,
    s_of_u,
    sigma_of_u,
    uniformize,
    x_of_u,
    y_of,
)

logger = logging.getLogger(__name__)

PI = math.pi


@dataclass(frozen=True)
class KernelConfig:
    """
    Truncation and quadrature settings of the correlator evaluators.

    series_m_max = 0 picks the m-range of the lattice sums from ``tol``.
    """

    series_m_max: int = 0
    quad_order: int = 64
    tol: float = 1e-13

    @classmethod
    def from_settings(cls, **overrides):
        values = numerics()
        config = cls(
            series_m_max=int(values['SERIES_M_MAX']),
            quad_order=int(values['QUAD_ORDER']),
            tol=float(values['THETA_TOL']),
        )
        return config.with_overrides(**overrides) if overrides else config

    def with_overrides(self, **overrides):
        fields = {k: v for k, v in overrides.items() if v is not None}
        return KernelConfig(**{**self.__dict__, **fields})

    def m_max(self, tau, w_imag_max=0.0):
        """Symmetric truncation |m| <= M of the sums over w + m tau."""
        if self.series_m_max:
            return int(self.series_m_max)
        reach = (w_imag_max + math.log(1.0 / self.tol) / (2 * PI)) / tau.imag
        return int(math.ceil(reach)) + 1


def _config(cfg):
    return cfg if cfg is not None else KernelConfig.from_settings()


def _scalar(values, like):
    return complex(values) if np.ndim(like) == 0 else values


def series_weights(m, geom):
    """C_m = 2 cos(pi (1 - mu) m) / (4 - n^2)."""
    return 2 * np.cos(PI * (1 - geom.mu) * m) / (4 - geom.n ** 2)


def _weighted_sum(w, geom, cfg, deriv=0):
    """sum_m C_m g^(deriv)(w + m tau), g = pi^2 / sin^2(pi w)."""
    w = np.asarray(w, dtype=complex)
    reach = float(np.max(np.abs(w.imag))) if w.size else 0.0
    m_max = cfg.m_max(geom.tau, reach)
    m = np.arange(-m_max, m_max + 1)
    shifted = w[..., None] + m * geom.tau
    return np.sum(series_weights(m, geom) * sin2_kernel(shifted, deriv), axis=-1)


def _weighted_cot_sum(w_plus, w_minus, geom, cfg):
    """sum_m C_m pi [cot pi(w_plus + m tau) - cot pi(w_minus + m tau)]."""
    w_plus = np.asarray(w_plus, dtype=complex)
    w_minus = np.asarray(w_minus, dtype=complex)
    reach = float(max(np.max(np.abs(w_plus.imag)), np.max(np.abs(w_minus.imag))))
    m_max = cfg.m_max(geom.tau, reach)
    m = np.arange(-m_max, m_max + 1)
    plus = w_plus[..., None] + m * geom.tau
    minus = w_minus[..., None] + m * geom.tau
    terms = series_weights(m, geom) * PI * (1 / np.tan(PI * plus) - 1 / np.tan(PI * minus))
    return np.sum(terms, axis=-1)


def _check_separated(u, u0, geom):
    """u must differ from +/- u0 modulo 1 and tau."""
    for w in (np.asarray(u) - u0, np.asarray(u) + u0):
        w = np.atleast_1d(w)
        k = np.round(w.imag / geom.tau.imag)
        rest = w - k * geom.tau
        if np.any(np.abs(rest - np.round(rest.real)) < 1e-12):
            raise PoleError(f'u={u} coincides with a translate of +/-u0={u0}')


# ---------------------------------------------------------------------------
# W_1^(0)
# ---------------------------------------------------------------------------

def particular_derivative(x, geom):
    """V_s'(x) = (2 V'(x) - n V'(-x)) / (4 - n^2)."""
    params = geom.params
    n = geom.n
    return (2 * params.potential_derivative(x) - n * params.potential_derivative(-x)) / (4 - n ** 2)


def w1_algebraic(u, geom):
    """
    W_1^(0) at x(u) from V_s' + A f/R + B fhat/Rhat.

    Args:
        u: torus point (scalar or array)
        geom: solved CurveGeometry

    Returns:
        complex value(s) of W_1^(0)
    """
    polys = curve_polys(geom)
    x = x_of_u(u, geom)
    f, fhat = basis(u, geom)
    value = (particular_derivative(x, geom)
             + polys.A_at(x) * f / norm_R(x, geom)
             + polys.B_at(x) * fhat / norm_R_hat(x, geom))
    return _scalar(value, u)


def w1_disc(x0, geom, nodes=None):
    """
    W_1^(0)(x0) as a contour integral around [a, b]:

        1/(2 i pi) oint dx x V'(x)/(x0^2 - x^2) (f(x0) f(x)/R(x0) + fhat(x0) fhat(x)/Rhat(x0))

    The contour is the periodic line u = tau + s, s in [-1/2, 1/2], which runs
    counter-clockwise along both lips of the cut. The trapezoid rule on it
    converges geometrically.

    Args:
        x0: point of the physical sheet, off [a, b]
        geom: solved CurveGeometry
        nodes: number of trapezoid points, defaults to INFINITY_NODES

    Returns:
        complex value of W_1^(0)(x0)
    """
    return w1_disc_at(uniformize(x0, geom), geom, nodes)


def w1_disc_at(u0, geom, nodes=None):
    """Contour form of W_1^(0) at the uniformized point u0."""
    nodes = nodes or numerics()['INFINITY_NODES']
    x0 = x_of_u(u0, geom)
    f0, fhat0 = basis(u0, geom)
    weight_f = f0 / norm_R(x0, geom)
    weight_h = fhat0 / norm_R_hat(x0, geom)

    # midpoints keep the nodes off the branch points
    s = -0.5 + (np.arange(nodes) + 0.5) / nodes
    u = geom.tau + s
    x = x_of_u(u, geom)
    f, fhat = basis(u, geom)
    integrand = (x * geom.params.potential_derivative(x) / (x0 ** 2 - x ** 2)
                 * (weight_f * f + weight_h * fhat) * s_of_u(u, geom))
    return complex(np.mean(integrand) / (2j * PI))


def w1_stable(u, geom, far=4.0):
    """
    W_1^(0) at u, switching to the contour form once |x(u)| exceeds ``far``
    times the cut size. Near infinity the algebraic form loses every digit to
    the cancellation against V'(x).
    """
    x = x_of_u(u, geom)
    if abs(x) > far * max(abs(geom.a), abs(geom.b)):
        return w1_disc_at(u, geom)
    return complex(w1_algebraic(u, geom))


def w1(x, geom):
    """W_1^(0) at a point x of the physical sheet."""
    return w1_algebraic(uniformize(x, geom), geom)


def loop_equation_defect(u, geom):
    """2 W(x) + n W(-x) - V'(x) - y(x), zero on the whole physical sheet."""
    x = x_of_u(u, geom)
    direct = w1_algebraic(u, geom)
    reflected = w1_algebraic(geom.tau - np.asarray(u), geom)
    return _scalar(2 * direct + geom.n * reflected - geom.params.potential_derivative(x) - y_of(u, geom), u)


# ---------------------------------------------------------------------------
# W_2^(0): series representation
# ---------------------------------------------------------------------------

def wbar2(u, u0, geom, cfg=None, deriv0=0):
    """
    omega-bar_2^(0)(u, u0) / (du du0) as the lattice series

        sum_m C_m [g(u - u0 + m tau) - g(u + u0 + m tau)],  C_m = 2 cos(pi (1 - mu) m)/(4 - n^2),

    or its ``deriv0``-th derivative in u0.

    Raises:
        PoleError: u = +/- u0 modulo the lattice
    """
    cfg = _config(cfg)
    _check_separated(u, u0, geom)
    u = np.asarray(u, dtype=complex)
    sign = (-1) ** deriv0
    value = (sign * _weighted_sum(u - u0, geom, cfg, deriv0)
             - _weighted_sum(u + u0, geom, cfg, deriv0))
    return _scalar(value, u)


def wbar2_primitive(u, u0, geom, cfg=None):
    """A primitive of wbar2 in u: sum_m C_m pi [cot pi(u + u0 + m tau) - cot pi(u - u0 + m tau)]."""
    cfg = _config(cfg)
    u = np.asarray(u, dtype=complex)
    return _scalar(_weighted_cot_sum(u + u0, u - u0, geom, cfg), u)


def particular_two_point(x0, x, n):
    """P_2 = [-2/(x - x0)^2 + n/(x + x0)^2] / (4 - n^2)."""
    return (-2 / (x - x0) ** 2 + n / (x + x0) ** 2) / (4 - n ** 2)


def w2_series(u0, u, geom, cfg=None):
    """Full W_2^(0)(x(u0), x(u)) = wbar2 / (s s0) + P_2."""
    x, x0 = x_of_u(u, geom), x_of_u(u0, geom)
    regular = wbar2(u, u0, geom, cfg) / (s_of_u(u, geom) * s_of_u(u0, geom))
    return regular + particular_two_point(x0, x, geom.n)


def bergman_mu(u, u0, geom):
    """B(u, u0) = wp_mu(u + u0 - tau)."""
    return wp_mu(np.asarray(u) + u0 - geom.tau, geom.mod, geom.mu)


def wbar2_from_bergman(u, u0, geom):
    """omega-bar_2 rebuilt from the four translates of B."""
    E, tau = geom.phase, geom.tau
    total = (bergman_mu(u, u0, geom) / E
             + bergman_mu(tau - u, u0, geom)
             + bergman_mu(u, tau - u0, geom)
             + E * bergman_mu(tau - u, tau - u0, geom))
    return total / (4 - geom.n ** 2)


# ---------------------------------------------------------------------------
# W_2^(0): closed form and its primitive
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Local:
    """x, sigma and D_mu at a torus point."""

    x: complex
    sigma: complex
    D: complex

    @classmethod
    def at(cls, u, geom):
        return cls(x=x_of_u(u, geom), sigma=sigma_of_u(u, geom), D=D_mu(u, geom))


def _xsigma_prime(p, geom):
    """d/dx (x sigma(x))."""
    a2, b2 = geom.a ** 2, geom.b ** 2
    return p.sigma + p.x ** 2 * (2 * p.x ** 2 - a2 - b2) / p.sigma


def I_function(p, geom):
    """I(x) = (x sigma + e sigma(e)) / (x^2 - e^2)."""
    e, se = geom.e_mu, geom.sigma_e_mu
    return (p.x * p.sigma + e * se) / (p.x ** 2 - e ** 2)


def I_prime(p, geom):
    e, se = geom.e_mu, geom.sigma_e_mu
    den = p.x ** 2 - e ** 2
    return (_xsigma_prime(p, geom) * den - 2 * p.x * (p.x * p.sigma + e * se)) / den ** 2


def I_at(u, geom):
    return I_function(_Local.at(u, geom), geom)


def _coincide(p, q):
    return abs(p.x - q.x) <= 1e-10 * max(abs(p.x), 1.0)


def _opposite(p, q):
    return abs(p.x + q.x) <= 1e-10 * max(abs(p.x), 1.0)


def w2_plus_antidiagonal(u, geom):
    """W_2|+(x, -x) = (e^2 - alpha1^2)/(2 sigma^2) + x^2 (b^2 - a^2)^2 / (4 sigma^4)."""
    x, sigma = x_of_u(u, geom), sigma_of_u(u, geom)
    return ((geom.e_mu ** 2 - geom.alpha1 ** 2) / (2 * sigma ** 2)
            + x ** 2 * (geom.b ** 2 - geom.a ** 2) ** 2 / (4 * sigma ** 4))


def _w2_plus(p0, p, geom, u_antidiagonal=None):
    """
    W_2|+(x0, x) = D(x0) D(x) [1 - (alpha1 + dQ) dI] - 1/(x + x0)^2 where dQ and dI are the
    difference quotients of x sigma and I in x^2.
    """
    if _coincide(p0, p):
        quotient_q = _xsigma_prime(p, geom) / (2 * p.x)
        quotient_i = I_prime(p, geom) / (2 * p.x)
        return p.D ** 2 * (1 - (geom.alpha1 + quotient_q) * quotient_i) - 1 / (4 * p.x ** 2)
    if _opposite(p0, p):
        return w2_plus_antidiagonal(u_antidiagonal, geom)
    dx2 = p.x ** 2 - p0.x ** 2
    quotient_q = (p.x * p.sigma - p0.x * p0.sigma) / dx2
    quotient_i = (I_function(p, geom) - I_function(p0, geom)) / dx2
    return p0.D * p.D * (1 - (geom.alpha1 + quotient_q) * quotient_i) - 1 / (p.x + p0.x) ** 2


def w2_closed_at(u0, u, geom):
    """
    Full W_2^(0)(x(u0), x(u)) from the four-term closed form

        (E^-1 W+(x0, x) + W+(-x0, x) + W+(x0, -x) + E W+(-x0, -x)) / (4 - n^2),

    coincident and antipodal arguments going through the limit formulas.
    """
    E, tau = geom.phase, geom.tau
    p0, p = _Local.at(u0, geom), _Local.at(u, geom)
    m0, m = _Local.at(tau - u0, geom), _Local.at(tau - u, geom)
    total = (_w2_plus(p0, p, geom, u) / E
             + _w2_plus(m0, p, geom, u)
             + _w2_plus(p0, m, geom, u)
             + E * _w2_plus(m0, m, geom, u))
    return complex(total / (4 - geom.n ** 2))


def w2_closed(x0, x, geom):
    """W_2^(0)(x0, x) for two points of the physical sheet; x0 = x is allowed."""
    return w2_closed_at(uniformize(x0, geom), uniformize(x, geom), geom)


def _h_plus(p0, p, geom):
    """H+(x0, x) = D(x0) sigma(x) D(x) (I(x) - I(x0)) / (x^2 - x0^2)."""
    if _coincide(p0, p):
        return p0.D * p.sigma * p.D * I_prime(p, geom) / (2 * p.x)
    if _opposite(p0, p):
        raise PoleError(f'H has a pole at x = -x0 = {p.x}')
    return p0.D * p.sigma * p.D * (I_function(p, geom) - I_function(p0, geom)) / (p.x ** 2 - p0.x ** 2)


def kernel_H_at(u0, u, geom):
    """
    Primitive of Wbar_2^(0)(x0, .) based at infinity:

        H = (E^-1 H+(x0, x) + H+(-x0, x) - H+(x0, -x) - E H+(-x0, -x)) / (4 - n^2) + f(x0)/(2 - n)

    so that dH/dx = Wbar_2^(0)(x0, x) and H(x0, infinity) = 0.
    """
    E, tau = geom.phase, geom.tau
    p0, p = _Local.at(u0, geom), _Local.at(u, geom)
    m0, m = _Local.at(tau - u0, geom), _Local.at(tau - u, geom)
    total = (_h_plus(p0, p, geom) / E
             + _h_plus(m0, p, geom)
             - _h_plus(p0, m, geom)
             - E * _h_plus(m0, m, geom))
    f0 = basis(u0, geom)[0]
    return complex(total / (4 - geom.n ** 2) + f0 / (2 - geom.n))


def kernel_H(x0, x, geom):
    return kernel_H_at(uniformize(x0, geom), uniformize(x, geom), geom)


# ---------------------------------------------------------------------------
# Cauchy kernel and recursion kernel
# ---------------------------------------------------------------------------

def cauchy_G(u0, u, geom, cfg=None):
    """
    G(x0, x) = int_infinity^x dx' (2 Wbar_2(x0, x') + n Wbar_2(x0, -x'))
             = (1/s0) int_{u(inf)}^u [2 wbar2(u', u0) + n wbar2(tau - u', u0)] du'.
    """
    cfg = _config(cfg)

    def primitive(v):
        return 2 * wbar2_primitive(v, u0, geom, cfg) - geom.n * wbar2_primitive(geom.tau - v, u0, geom, cfg)

    u = np.asarray(u, dtype=complex)
    value = (primitive(u) - primitive(geom.u_infinity)) / s_of_u(u0, geom)
    return _scalar(value, u)


def residue_radius(geom):
    return numerics()['JET_SCALE'] * min(geom.tau.imag, 0.5)


def cauchy_reconstruct(form, u0, geom, cfg=None, radius=None, nodes=128):
    """
    W(x0) = 1/2 sum_i Res_{u -> v_i} G(x0, u) form(u) du for a form whose
    only poles sit at the branch points.

    Args:
        form: vectorised callable, coefficient of du of the form s(u) W(x(u)) du
        u0: torus point of x0
        geom: solved CurveGeometry
        radius: small circle radius around each branch point

    Returns:
        complex value of W(x0)
    """
    radius = radius or residue_radius(geom)
    for v in geom.branch_points:
        if abs(u0 - v) <= 2 * radius:
            raise ConfigurationError(f'u0={u0} too close to the branch point {v} for radius {radius}')

    def integrand(u):
        return cauchy_G(u0, u, geom, cfg) * np.asarray(form(u), dtype=complex)

    total = sum(circle_integral(integrand, v, radius, nodes) for v in geom.branch_points)
    return total / (4j * PI)


def conjugate_point(u, geom):
    """u-bar = 2 v_i - u, v_i the branch point nearest to u."""
    v = min(geom.branch_points, key=lambda p: abs(u - p))
    return 2 * v - u


def rec_kernel(u0, u, geom, cfg=None, quadrature=False):
    """
    Recursion kernel K(u0, u) = -1/2 int_{u-bar}^{u} wbar2(u0, u') du' / (y s)(u).

    The integral uses the closed cot-sum primitive; ``quadrature=True`` evaluates it by
    Gauss-Legendre on the straight segment instead.

    Raises:
        PoleError: (y s)(u) vanishes, i.e. u is a branch point
    """
    cfg = _config(cfg)
    u_bar = conjugate_point(u, geom)
    if quadrature:
        integral = segment_integral(lambda v: wbar2(v, u0, geom, cfg), u_bar, u, cfg.quad_order)
    else:
        integral = wbar2_primitive(u, u0, geom, cfg) - wbar2_primitive(u_bar, u0, geom, cfg)
    denominator = y_of(u, geom) * s_of_u(u, geom)
    if abs(denominator) < 1e-300:
        raise PoleError(f'(y dx)(u) vanishes at u={u}; use the branch-point jets')
    return complex(-0.5 * integral / denominator)
