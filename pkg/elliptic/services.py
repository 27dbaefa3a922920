"""
Elliptic service functions: theta functions, complete elliptic integrals,
Jacobi elliptic functions, the Weierstrass function and its mu-deformed
version.

Conventions: ``theta1(w | tau) = i sum_m (-1)^m q^((m-1/2)^2) e^(i pi (2m-1) w)``
with ``q = e^(i pi tau)``, so theta1 has periods 1 (up to sign) and tau (up to
a multiplier). Lattice sums are over ``w + m tau``.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import Polynomial

from core.conf import numerics
from core.exceptions import ConfigurationError, DomainError, PoleError
from core.quadrature import circle_coefficients
from core.series import LaurentSeries

logger = logging.getLogger(__name__)

PI = math.pi
MU_ONE_FALLBACK = 1e-8


@dataclass(frozen=True)
class Modulus:
    """Half-period ratio together with its truncation data."""

    tau: complex
    q_truncation: int
    tol: float

    @classmethod
    def from_tau(cls, tau, tol=None):
        tau = complex(tau)
        if tau.imag <= 0:
            raise DomainError(f'Im(tau) must be positive, got tau={tau}')
        tol = tol or numerics()['THETA_TOL']
        width = math.sqrt(math.log(1.0 / tol) / (PI * tau.imag))
        return cls(tau=tau, q_truncation=int(math.ceil(width + 0.5)), tol=tol)

    @property
    def q(self):
        return np.exp(1j * PI * self.tau)

    def lattice_terms(self, w_imag_max=0.0):
        """Number of terms for lattice sums of pi^2/sin^2 at the given |Im w|."""
        fixed = numerics()['SERIES_M_MAX']
        if fixed:
            return int(fixed)
        reach = (w_imag_max + math.log(1.0 / self.tol) / (2 * PI)) / self.tau.imag
        return int(math.ceil(reach)) + 1


@dataclass(frozen=True)
class WpMuConstants:
    """
    Expansion constants of wp_mu at 0 in the derivative convention
    ``wp_mu(w) = 1/w^2 + c0 + c1 w + c2 w^2/2 + c3 w^3/6 + ...``.
    """

    c0_mu: complex
    c1_mu: complex
    c2_mu: complex
    c3_mu: complex
    g2_mu: complex
    lam: complex
    lam_prime: complex
    c0: complex
    c2: complex
    c0_mu_closed: complex

    def to_dict(self):
        return {k: [complex(v).real, complex(v).imag] for k, v in self.__dict__.items()}


def _as_array(w):
    arr = np.asarray(w, dtype=complex)
    return arr, arr.ndim == 0


def _ret(values, scalar):
    return complex(values) if scalar else values


# ---------------------------------------------------------------------------
# theta functions
# ---------------------------------------------------------------------------

def _theta_indices(mod, w_imag_max, deriv_order):
    shift = int(math.ceil(w_imag_max / mod.tau.imag))
    m_max = mod.q_truncation + shift + 1 + deriv_order // 2
    return np.arange(-m_max + 1, m_max + 1)


def theta1(w, mod, deriv_order=0):
    """
    theta1(w | tau) or its w-derivative.

    Args:
        w: complex point or array
        mod: Modulus
        deriv_order: non-negative derivative order

    Returns:
        complex value (array for array input)
    """
    if deriv_order < 0:
        raise DomainError('derivative order must be non-negative')
    w, scalar = _as_array(w)
    w_imag_max = float(np.max(np.abs(w.imag))) if w.size else 0.0
    m = _theta_indices(mod, w_imag_max, deriv_order)
    k = (2 * m - 1).astype(float)
    sign = np.where(m % 2 == 0, 1.0, -1.0)
    exponent = 1j * PI * (mod.tau * (m - 0.5) ** 2 + k * w[..., None])
    factor = (1j * PI * k) ** deriv_order
    values = 1j * np.sum(sign * factor * np.exp(exponent), axis=-1)
    return _ret(values, scalar)


def theta_taylor(w0, mod, order, scale=1.0):
    """
    Taylor coefficients of eps -> theta1(w0 + scale * eps | tau) up to eps**order.

    Returns:
        LaurentSeries with valuation 0
    """
    w0 = complex(w0)
    m = _theta_indices(mod, abs(w0.imag), order)
    k = (2 * m - 1).astype(float)
    sign = np.where(m % 2 == 0, 1.0, -1.0)
    base = 1j * sign * np.exp(1j * PI * (mod.tau * (m - 0.5) ** 2 + k * w0))
    step = 1j * PI * k * scale
    coeffs = np.empty(order + 1, dtype=complex)
    term = base.astype(complex)
    for j in range(order + 1):
        coeffs[j] = np.sum(term)
        term = term * step / (j + 1)
    return LaurentSeries.from_taylor(coeffs)


def theta2(w, mod):
    w, scalar = _as_array(w)
    return _ret(theta1(w + 0.5, mod), scalar)


def theta4(w, mod):
    w, scalar = _as_array(w)
    values = -1j * np.exp(1j * PI * (mod.tau / 4 + w)) * theta1(w + mod.tau / 2, mod)
    return _ret(values, scalar)


def theta3(w, mod):
    w, scalar = _as_array(w)
    return _ret(theta4(w + 0.5, mod), scalar)


def log_theta1_derivative(w, mod):
    """(log theta1)'(w)."""
    return theta1(w, mod, 1) / theta1(w, mod, 0)


def modular_transform(w, mod):
    """
    theta1(w | tau) evaluated through theta1(w/tau | -1/tau).

    Uses (i / sqrt(-i tau)) e^(-i pi w^2 / tau) theta1(w/tau | -1/tau), which
    agrees with -(1/sqrt(i tau)) ... whenever Re(tau) >= 0.
    """
    w, scalar = _as_array(w)
    tau = mod.tau
    dual = Modulus.from_tau(-1.0 / tau, mod.tol)
    values = 1j / np.sqrt(-1j * tau) * np.exp(-1j * PI * w ** 2 / tau) * theta1(w / tau, dual)
    return _ret(values, scalar)


# ---------------------------------------------------------------------------
# complete elliptic integrals and Jacobi functions
# ---------------------------------------------------------------------------

def _agm(a, b, tol=1e-16):
    for _ in range(64):
        a_next = 0.5 * (a + b)
        root = np.sqrt(a * b)
        if abs(a_next - root) > abs(a_next + root):
            root = -root
        a, b = a_next, root
        if abs(a - b) <= tol * abs(a):
            break
    return 0.5 * (a + b)


def elliptic_K(k):
    """
    Complete elliptic integrals K(k) and K'(k) = K(sqrt(1 - k^2)) by the AGM.

    Args:
        k: modulus in (0, 1)

    Returns:
        tuple (K, K_prime)
    """
    k = float(k)
    if not 0.0 < k < 1.0:
        raise DomainError(f'elliptic modulus must lie in (0, 1), got {k}')
    kp = math.sqrt((1.0 - k) * (1.0 + k))
    return PI / (2.0 * _agm(1.0, kp)), PI / (2.0 * _agm(1.0, k))


def elliptic_K_complex(k):
    """Complex-modulus variant of elliptic_K, following the principal AGM branch."""
    k = complex(k)
    if k in (0, 1, -1):
        raise DomainError(f'degenerate elliptic modulus {k}')
    kp = np.sqrt((1 - k) * (1 + k))
    return PI / (2.0 * _agm(1.0 + 0j, kp)), PI / (2.0 * _agm(1.0 + 0j, k))


def periods_from_tau(mod):
    """(K, K') attached to the half-period ratio tau = iK/K'."""
    k_prime_period = 0.5 * PI * theta3(0.0, mod) ** 2
    return -1j * mod.tau * k_prime_period, k_prime_period


def modulus_from_k(k, tau_guess=None, tol=None, max_iter=30):
    """
    Modulus with tau = iK(k)/K'(k), i.e. k = (theta4(0|tau)/theta3(0|tau))^2.

    With ``tau_guess`` the AGM value is replaced by Newton iteration started
    at the guess, which keeps tau continuous along complex paths.
    """
    k = complex(k)
    if tau_guess is None:
        if abs(k.imag) < 1e-15 and 0 < k.real < 1:
            K, Kp = elliptic_K(k.real)
        else:
            K, Kp = elliptic_K_complex(k)
        return Modulus.from_tau(1j * K / Kp, tol)

    def residual(tau):
        mod = Modulus.from_tau(tau, tol)
        return (theta4(0.0, mod) / theta3(0.0, mod)) ** 2 - k

    tau = complex(tau_guess)
    for _ in range(max_iter):
        h = 1e-7 * max(abs(tau), 1.0)
        f = residual(tau)
        df = (residual(tau + h) - residual(tau - h)) / (2 * h)
        step = f / df
        tau = tau - step
        if tau.imag <= 0:
            raise DomainError('Newton iteration for tau left the upper half plane')
        if abs(step) < 1e-15 * max(abs(tau), 1.0):
            break
    return Modulus.from_tau(tau, tol)


def jacobi(phi, k):
    """
    Jacobi elliptic functions sn, cn, dn of modulus k at phi.

    Returns:
        tuple (sn, cn, dn)
    """
    K, Kp = elliptic_K(k)
    mod = Modulus.from_tau(1j * Kp / K)
    phi, scalar = _as_array(phi)
    w = phi / (2.0 * K)
    t2, t3, t4 = theta2(0.0, mod), theta3(0.0, mod), theta4(0.0, mod)
    den = theta4(w, mod)
    sn = t3 / t2 * theta1(w, mod) / den
    cn = t4 / t2 * theta2(w, mod) / den
    dn = t4 / t3 * theta3(w, mod) / den
    return _ret(sn, scalar), _ret(cn, scalar), _ret(dn, scalar)


# ---------------------------------------------------------------------------
# pi^2 / sin^2 building block and lattice sums
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _cot_polynomial(order):
    """P_d with d^d/dw^d [pi^2/sin^2(pi w)] = pi^(d+2) P_d(cot(pi w))."""
    poly = Polynomial([1.0, 0.0, 1.0])
    one_plus_c2 = Polynomial([1.0, 0.0, 1.0])
    for _ in range(order):
        poly = -one_plus_c2 * poly.deriv()
    return poly


def sin2_kernel(z, deriv=0):
    """
    d^deriv/dz^deriv of g(z) = pi^2 / sin^2(pi z), vectorised.

    Away from the real axis the exponential series in e^(2 pi i z) is used;
    close to it the cotangent polynomial recursion.
    """
    z, scalar = _as_array(z)
    sign = np.where(z.imag >= 0, 1.0, -1.0)
    zz = z * sign
    if deriv == 0:
        p = np.exp(2j * PI * zz)
        values = -4 * PI ** 2 * p / (1 - p) ** 2
        return _ret(values, scalar)
    values = np.empty_like(z)
    far = np.abs(z.imag) >= 0.2
    if np.any(far):
        zf = zz[far]
        p = np.exp(2j * PI * zf)
        decay = 2 * PI * float(np.min(zf.imag))
        kmax = int(math.ceil((2 * (deriv + 1) + 35) / decay)) + 5
        kk = np.arange(1, kmax + 1)
        terms = kk * (2j * PI * kk) ** deriv * p[..., None] ** kk
        values[far] = -4 * PI ** 2 * np.sum(terms, axis=-1) * sign[far] ** deriv
    near = ~far
    if np.any(near):
        cot = 1.0 / np.tan(PI * z[near])
        values[near] = PI ** (deriv + 2) * _cot_polynomial(deriv)(cot)
    return _ret(values, scalar)


def sin2_laurent_at_zero(order):
    """Laurent coefficients of pi^2/sin^2(pi w) at 0: dict power -> coefficient."""
    from scipy.special import bernoulli

    b = bernoulli(order + 2)
    out = {}
    for kk in range(0, order // 2 + 2):
        power = 2 * kk - 2
        if power > order:
            break
        coeff = (-1) ** (kk + 1) * (2 * kk - 1) * 2 ** (2 * kk) * b[2 * kk] / math.factorial(2 * kk)
        out[power] = PI ** (2 * kk) * coeff
    return out


def lattice_sum(w, mod, phase=0.0, deriv=0, cosine=False):
    """
    sum_m weight_m g^(deriv)(w + m tau), with weight e^(i pi phase m)
    (or cos(pi phase m) when ``cosine``).
    """
    w, scalar = _as_array(w)
    w_imag_max = float(np.max(np.abs(w.imag))) if w.size else 0.0
    m_max = mod.lattice_terms(w_imag_max)
    m = np.arange(-m_max, m_max + 1)
    weights = np.cos(PI * phase * m) if cosine else np.exp(1j * PI * phase * m)
    shifted = w[..., None] + m * mod.tau
    values = np.sum(weights * sin2_kernel(shifted, deriv), axis=-1)
    return _ret(values, scalar)


def _check_not_lattice(w, mod):
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    n2 = np.round(w.imag / mod.tau.imag)
    w1 = w - n2 * mod.tau
    dist = np.abs(w1 - np.round(w1.real))
    if np.any(dist < 1e-12):
        raise PoleError('evaluation at a lattice point')


def lattice_c0(mod):
    """c0 with wp_1 = wp + c0, i.e. pi^2/3 + sum_(m != 0) pi^2/sin^2(pi m tau)."""
    m_max = mod.lattice_terms(0.0)
    m = np.concatenate([np.arange(-m_max, 0), np.arange(1, m_max + 1)])
    return complex(PI ** 2 / 3 + np.sum(sin2_kernel(m * mod.tau)))


def wp(w, mod, deriv=0):
    """Weierstrass function with periods (1, tau), or its derivative."""
    _check_not_lattice(w, mod)
    values = lattice_sum(w, mod, 0.0, deriv)
    if deriv == 0:
        values = values - lattice_c0(mod)
    return values


def wp_mu(w, mod, mu, deriv=0):
    """
    wp_mu(w) = sum_m e^(i pi (mu - 1) m) pi^2 / sin^2(pi (w + m tau)).

    Near mu = 1 the removable limit wp + c0 is used.
    """
    _check_not_lattice(w, mod)
    if abs(mu - 1.0) < MU_ONE_FALLBACK:
        values = wp(w, mod, deriv)
        return values + lattice_c0(mod) if deriv == 0 else values
    return lattice_sum(w, mod, mu - 1.0, deriv)


def wp_mu_theta(w, mod, mu):
    """wp_mu from theta functions: C [theta1'(nu/2 - w) theta1(w) + theta1(nu/2 - w) theta1'(w)] / theta1(w)^2."""
    _check_not_lattice(w, mod)
    nu = 1.0 - mu
    w, scalar = _as_array(w)
    scale = theta1(0.0, mod, 1) / theta1(nu / 2, mod)
    th = theta1(w, mod)
    values = scale * (theta1(nu / 2 - w, mod, 1) * th + theta1(nu / 2 - w, mod) * theta1(w, mod, 1)) / th ** 2
    return _ret(values, scalar)


def wp_mu_constants(mod, mu, radius=None, nodes=64):
    """
    Expansion constants of wp_mu at 0 by a small-circle Cauchy transform.

    Args:
        mod: Modulus
        mu: deformation parameter
        radius: contour radius, defaults to min(1, |tau|)/4
        nodes: trapezoid points

    Returns:
        WpMuConstants
    """
    reach = min(1.0, abs(mod.tau), abs(1 + mod.tau), abs(1 - mod.tau))
    radius = radius or min(1.0, abs(mod.tau)) / 4
    if radius >= reach:
        raise ConfigurationError(f'contour radius {radius} touches a lattice point (distance {reach})')

    def regular(func):
        return lambda z: func(z) - 1.0 / z ** 2

    taylor_mu = circle_coefficients(regular(lambda z: wp_mu(z, mod, mu)), 0.0, radius, nodes, range(4))
    taylor_one = circle_coefficients(regular(lambda z: wp_mu(z, mod, 1.0)), 0.0, radius, nodes, range(3))
    c0_mu, c1_mu = taylor_mu[0], taylor_mu[1]
    c2_mu, c3_mu = 2 * taylor_mu[2], 6 * taylor_mu[3]
    c0, c2 = taylor_one[0], 2 * taylor_one[2]
    if abs(mu - 1.0) < MU_ONE_FALLBACK:
        lam = lam_prime = complex('nan')
        c0_closed = c0
    else:
        lam = (-(5.0 / 6.0) * c3_mu + 2 * c0_mu * c1_mu) / (c2_mu - c2)
        lam_prime = -3 * c1_mu / (c2_mu - c2)
        nu = 1.0 - mu
        c0_closed = (theta1(0.0, mod, 3) / (6 * theta1(0.0, mod, 1))
                     - 0.5 * theta1(nu / 2, mod, 2) / theta1(nu / 2, mod))
    return WpMuConstants(
        c0_mu=complex(c0_mu), c1_mu=complex(c1_mu), c2_mu=complex(c2_mu), c3_mu=complex(c3_mu),
        g2_mu=complex(6 * c2 + 4 * c2_mu), lam=complex(lam), lam_prime=complex(lam_prime),
        c0=complex(c0), c2=complex(c2), c0_mu_closed=complex(c0_closed),
    )


def q_mu(w, mod, mu, consts):
    p1, dp1 = wp_mu(w, mod, 1.0), wp_mu(w, mod, 1.0, 1)
    pm, dpm = wp_mu(w, mod, mu), wp_mu(w, mod, mu, 1)
    return p1 * dpm - dp1 * pm + (consts.c0_mu - consts.c0) * dpm - 3 * consts.c1_mu * pm


def wp_mu_second_order_residual(w, mod, mu, consts):
    """wp_mu'' - [6 wp_1 wp_mu - 6 (c0 + c0_mu) wp_mu + lambda' q_mu]."""
    p1, pm = wp_mu(w, mod, 1.0), wp_mu(w, mod, mu)
    rhs = 6 * p1 * pm - 6 * (consts.c0 + consts.c0_mu) * pm + consts.lam_prime * q_mu(w, mod, mu, consts)
    return wp_mu(w, mod, mu, 2) - rhs


def wp_mu_first_order_residual(w, mod, mu, consts):
    """
    wp_1' wp_mu' minus its expansion on wp_1^2 wp_mu, wp_1 wp_mu, wp_mu,
    wp_mu' and q_mu, the coefficients being fixed by the polar part at 0.
    """
    c0, c0m, c1m = consts.c0, consts.c0_mu, consts.c1_mu
    p1, dp1 = wp_mu(w, mod, 1.0), wp_mu(w, mod, 1.0, 1)
    pm, dpm = wp_mu(w, mod, mu), wp_mu(w, mod, mu, 1)
    rhs = (4 * p1 ** 2 * pm
           - 4 * (2 * c0 + c0m) * p1 * pm
           + (4 * c0 ** 2 + 4 * c0 * c0m + 4 * c0m ** 2 - consts.g2_mu) * pm
           + 3 * c1m * dpm
           + consts.lam * q_mu(w, mod, mu, consts))
    return dp1 * dpm - rhs


def wp_mu_primitive(w1, w2, mod, mu):
    """
    Integral of wp_mu from w1 to w2 (path avoiding lattice points):
    C (F(w1) - F(w2)) with F(w) = theta1(nu/2 - w)/theta1(w), C = theta1'(0)/theta1(nu/2).
    """
    _check_not_lattice([w1, w2], mod)
    if abs(mu - 1.0) < MU_ONE_FALLBACK:
        raise DomainError('wp_mu primitive is not single valued at mu = 1')
    nu = 1.0 - mu
    scale = theta1(0.0, mod, 1) / theta1(nu / 2, mod)

    def primitive(w):
        return theta1(nu / 2 - w, mod) / theta1(w, mod)

    return complex(scale * (primitive(w1) - primitive(w2)))
