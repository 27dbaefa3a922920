"""
Local expansions at the branch points v1 = tau and v2 = tau + 1/2.

Everything is expanded in the scaled coordinate eps, u = v + rho * eps, with
rho = JET_SCALE * min(Im tau, 1/2), so that the coefficients of the basis
functions stay of order one. A residue in u is rho times the residue in eps.

The basis of the stable correlators is

    chi_{l,q}(u) = rho^q / q! * d^q/dv^q omega-bar_2(u, v) at v = v_l,

indexed by l * (q_max + 1) + q.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from core.exceptions import ConfigurationError, IllConditionedError
from core.quadrature import circle_coefficients
from core.series import LaurentSeries
from correlators.services import KernelConfig, residue_radius, series_weights, wbar2
from elliptic.services import sin2_kernel, sin2_laurent_at_zero, theta1, theta_taylor
from spectral_curve.services import curve_polys, s_of_u, x_of_u, y_of

logger = logging.getLogger(__name__)

PI = math.pi
JET_METHODS = ('cauchy', 'theta')
Y_PRIME_FLOOR = 1e-8


@dataclass(frozen=True)
class BranchJet:
    """Expansion of one quantity at a branch point, in eps with u = center + scale * eps."""

    center: complex
    scale: float
    series: LaurentSeries

    @property
    def order_min(self):
        return self.series.val

    @property
    def order_max(self):
        return self.series.top

    @property
    def coeffs(self):
        return {k: self.series.coeff(k) for k in range(self.order_min, self.order_max + 1)}

    def derivative(self, k):
        """k-th u-derivative at the center of a regular jet."""
        return math.factorial(k) * self.series.coeff(k) / self.scale ** k

    def __call__(self, u):
        return self.series((np.asarray(u, dtype=complex) - self.center) / self.scale)


@dataclass
class BranchPointJets:
    """Everything the recursion needs at one branch point."""

    index: int
    center: complex
    scale: float
    x: BranchJet
    s: BranchJet
    y: BranchJet
    Y: BranchJet
    regularized: BranchJet
    chi: np.ndarray
    chi_lo: int

    @property
    def s1(self):
        return self.s.derivative(1)

    @property
    def s3(self):
        return self.s.derivative(3)

    @property
    def y1(self):
        return self.y.derivative(1)

    @property
    def y3(self):
        return self.y.derivative(3)

    @property
    def chi_hi(self):
        return self.chi_lo + self.chi.shape[1] - 1


@dataclass
class JetSet:
    """Jets at both branch points for basis functions up to derivative order q_max."""

    geom: object
    q_max: int
    scale: float
    c_B: complex
    method: str
    cfg: KernelConfig
    points: tuple = field(default_factory=tuple)

    @property
    def dim(self):
        return 2 * (self.q_max + 1)

    def index(self, l, q):
        return l * (self.q_max + 1) + q

    def chi_values(self, u):
        """chi_{l,q}(u) for every basis index, stacked along the first axis."""
        u = np.asarray(u, dtype=complex)
        out = np.empty((self.dim,) + u.shape, dtype=complex)
        for l, v in enumerate(self.geom.branch_points):
            for q in range(self.q_max + 1):
                factor = self.scale ** q / math.factorial(q)
                out[self.index(l, q)] = factor * wbar2(u, v, self.geom, self.cfg, deriv0=q)
        return out


def regularization_constant(geom, cfg=None):
    """c_B = -pi^2/3 - 2 sum_{m >= 1} cos(pi (1 - mu) m) pi^2 / sin^2(pi m tau)."""
    cfg = cfg or KernelConfig.from_settings()
    m = np.arange(1, cfg.m_max(geom.tau) + 1)
    terms = np.cos(PI * (1 - geom.mu) * m) * sin2_kernel(m * geom.tau)
    return complex(-PI ** 2 / 3 - 2 * np.sum(terms))


def _falling(power, q):
    out = 1.0
    for i in range(q):
        out *= power - i
    return out


def _is_lattice_zero(w):
    return (np.abs(w.imag) < 1e-12) & (np.abs(w.real - np.round(w.real)) < 1e-12)


def chi_window(geom, l, q_max, lo, hi, rho, cfg):
    """
    Coefficients of eps^lo ... eps^hi of every chi_{l',q}(v_l + rho eps).

    The lattice terms regular at v_l are Taylor expanded from the derivatives
    of g = pi^2/sin^2; the (at most one per family) singular term contributes
    the Laurent series of g at zero.
    """
    v = geom.branch_points[l]
    tau = geom.tau
    window = np.zeros((2 * (q_max + 1), hi - lo + 1), dtype=complex)
    p_max = q_max + hi
    m_max = cfg.m_max(tau, 2 * tau.imag) + 2
    m = np.arange(-m_max, m_max + 1)
    weights = series_weights(m, geom)
    laurent = sin2_laurent_at_zero(p_max)

    for l_other, v_other in enumerate(geom.branch_points):
        regular, singular = {}, {}
        for family, w0 in (('minus', v - v_other + m * tau), ('plus', v + v_other + m * tau)):
            at_pole = _is_lattice_zero(w0)
            singular[family] = complex(np.sum(weights[at_pole]))
            w_reg, c_reg = w0[~at_pole], weights[~at_pole]
            regular[family] = [complex(np.sum(c_reg * sin2_kernel(w_reg, p))) for p in range(p_max + 1)]

        for q in range(q_max + 1):
            row = window[l_other * (q_max + 1) + q]
            sign = (-1) ** q
            for j in range(max(lo, 0), hi + 1):
                combo = sign * regular['minus'][q + j] - regular['plus'][q + j]
                row[j - lo] += rho ** (q + j) / (math.factorial(q) * math.factorial(j)) * combo
            pole_weight = sign * singular['minus'] - singular['plus']
            if pole_weight == 0:
                continue
            for power, c in laurent.items():
                order = power - q
                if lo <= order <= hi:
                    row[order - lo] += rho ** power / math.factorial(q) * c * _falling(power, q) * pole_weight
    return window


# ---------------------------------------------------------------------------
# jets of x, s and y
# ---------------------------------------------------------------------------

def _cauchy_series(func, center, rho, top, nodes):
    coeffs = circle_coefficients(func, center, rho, nodes, range(top + 1))
    return LaurentSeries.from_taylor(coeffs * rho ** np.arange(top + 1))


def _cauchy_jets(geom, v, rho, top):
    nodes = max(128, 4 * (top + 1))
    x = _cauchy_series(lambda u: x_of_u(u, geom), v, rho, top, nodes)
    s = _cauchy_series(lambda u: s_of_u(u, geom), v, rho, top, nodes)
    y = _cauchy_series(lambda u: y_of(u, geom), v, rho, top, nodes)
    return x, s, y


def _horner(coeffs, x):
    result = LaurentSeries.constant(coeffs[-1], x.top)
    for c in coeffs[-2::-1]:
        result = result * x + complex(c)
    return result


def _theta_jets(geom, v, rho, top):
    """Jets by Laurent algebra on the theta Taylor series."""
    mod, mu, tau = geom.mod, geom.mu, geom.tau
    order = top + 8
    w0 = v - tau / 2
    den = theta_taylor(w0 + 0.5, mod, order, rho)
    x = (theta_taylor(w0, mod, order, rho) / den * geom.x_scale).even()
    s = (x.deriv() * (1 / rho)).odd().with_valuation(1)
    sigma = s * (-1j * geom.b / (2 * geom.K_prime))

    const = geom.x_scale * theta1(-0.5, mod) / theta1(-0.5 + mu / 2, mod)
    direct = theta_taylor(w0 + mu / 2, mod, order, rho) / den * const / sigma
    r0 = tau / 2 - v
    reflected = (theta_taylor(r0 + mu / 2, mod, order, -rho)
                 / theta_taylor(r0 + 0.5, mod, order, -rho) * const / sigma)

    E = geom.phase
    f_reflected = (reflected + direct * E) * (1 / (1 - E))
    fhat_reflected = -(sigma / x) * (reflected - direct * E) * (1 / (1 + E))

    polys = curve_polys(geom)
    common = x * sigma / (x * x - geom.e_mu ** 2)
    y = _horner(polys.A, x) * common * fhat_reflected - _horner(polys.B, x) * common * f_reflected
    y = y.odd().with_valuation(1)
    if y.top < top:
        raise ConfigurationError(f'theta jets reach order {y.top} only, {top} requested')
    return x.truncate(top), s.truncate(top), y.truncate(top)


def _regularized_bracket(s, rho, c_b):
    """omega_2(u, u-bar) regularized: S(x)/6 + c_B with S the Schwarzian of x in u."""
    d1 = s.deriv()
    d2 = d1.deriv()
    inv = s.inverse()
    schwarzian = (d2 * inv - (d1 * inv) ** 2 * 1.5) * (1 / rho ** 2)
    return schwarzian * (1 / 6) + c_b


def build_jets(geom, order, cfg=None, method='cauchy'):
    """
    Jets of s, y, y s, the regularized two-point bracket and the basis
    functions chi_{l,q}, q <= order, at both branch points.

    Args:
        geom: solved CurveGeometry
        order: highest derivative order q of the basis functions
        cfg: KernelConfig for the lattice sums
        method: 'cauchy' (discrete Cauchy transform) or 'theta' (theta Taylor algebra)

    Returns:
        JetSet

    Raises:
        ConfigurationError: unknown method
        IllConditionedError: y'(v_i) is numerically zero
    """
    if method not in JET_METHODS:
        raise ConfigurationError(f'unknown jet method {method!r}, expected one of {JET_METHODS}')
    cfg = cfg or KernelConfig.from_settings()
    rho = residue_radius(geom)
    c_b = regularization_constant(geom, cfg)
    # the kernel needs 1/(y s) to order 2 order + 3, i.e. y s to 2 order + 7
    top = 2 * order + 8
    chi_lo, chi_hi = -(order + 2), order + 2

    points = []
    for l, v in enumerate(geom.branch_points):
        if method == 'cauchy':
            x, s, y = _cauchy_jets(geom, v, rho, top)
        else:
            x, s, y = _theta_jets(geom, v, rho, top)
        defect = float(np.max(np.abs(s.even().coefficients()))) + float(np.max(np.abs(y.even().coefficients())))
        logger.debug('branch point %d: even-part defect of s and y %.2e', l, defect)
        s = s.odd().with_valuation(1)
        y = y.odd().with_valuation(1)
        x = x.even()

        jets = BranchPointJets(
            index=l,
            center=v,
            scale=rho,
            x=BranchJet(v, rho, x),
            s=BranchJet(v, rho, s),
            y=BranchJet(v, rho, y),
            Y=BranchJet(v, rho, y * s),
            regularized=BranchJet(v, rho, _regularized_bracket(s, rho, c_b)),
            chi=chi_window(geom, l, order, chi_lo, chi_hi, rho, cfg),
            chi_lo=chi_lo,
        )
        if abs(jets.y1) < Y_PRIME_FLOOR:
            raise IllConditionedError(f"y'(v{l + 1}) = {jets.y1:.3e}: branch point is (nearly) critical")
        points.append(jets)

    logger.info('jets built: q_max=%d method=%s rho=%.4f c_B=%s', order, method, rho, c_b)
    return JetSet(geom=geom, q_max=order, scale=rho, c_B=c_b, method=method, cfg=cfg, points=tuple(points))
