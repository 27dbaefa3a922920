"""
Minimal one-matrix, one-cut solver, used as the loop-free (n = 0) reference.

The cut [a, b] is parametrised by the Zhukovsky map x(z) = alpha + gamma (z + 1/z),
so that sigma1(x) = sqrt((x - a)(x - b)) = gamma (z - 1/z) and dx / sigma1 = dz / z.
Nothing here touches the torus construction.
"""

import cmath
import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from core.exceptions import ConvergenceError

logger = logging.getLogger(__name__)


def _constant_term(func, degree):
    """[z^0] of a Laurent polynomial in z of degree <= ``degree``."""
    nodes = 2 * degree + 2
    z = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    return complex(np.mean(func(z)))


@dataclass(frozen=True)
class OneCutSolution:
    """One-cut solution of the loop-free model for a polynomial V'."""

    dV: Polynomial
    t: complex
    a: complex
    b: complex

    @property
    def alpha(self):
        return (self.a + self.b) / 2

    @property
    def gamma(self):
        return (self.b - self.a) / 4

    def sigma1(self, x):
        x = np.asarray(x, dtype=complex)
        return x * np.sqrt(1 - self.a / x) * np.sqrt(1 - self.b / x)

    def inverse_root_series(self, order):
        """Coefficients h_k with 1/sigma1 = sum_k h_k x^(-k-1)."""
        g1, g2 = -(self.a + self.b), self.a * self.b
        h = np.zeros(order + 1, dtype=complex)
        h[0] = 1.0
        for k in range(order):
            previous = h[k - 1] if k >= 1 else 0.0
            h[k + 1] = -(g1 * (k + 0.5) * h[k] + g2 * k * previous) / (k + 1)
        return h

    def M(self):
        """Polynomial part of V'/sigma1."""
        v = self.dV.coef
        degree = len(v) - 1
        h = self.inverse_root_series(degree + 1)
        coeffs = [sum(v[j] * h[j - m - 1] for j in range(m + 1, degree + 1)) for m in range(max(degree, 1))]
        return Polynomial(coeffs or [0.0])

    def y(self, x):
        """y = 2W - V' = -M sigma1."""
        return -self.M()(x) * self.sigma1(x)

    def resolvent(self, x):
        return 0.5 * (self.dV(x) + self.y(x))

    def two_point(self, x0, x):
        """Planar W_2(x0, x) = [(x x0 - alpha (x + x0) + a b)/(sigma1(x) sigma1(x0)) - 1] / (2 (x - x0)^2)."""
        num = x * x0 - self.alpha * (x + x0) + self.a * self.b
        return (num / (self.sigma1(x) * self.sigma1(x0)) - 1) / (2 * (x - x0) ** 2)

    def two_point_diagonal(self, x):
        """Planar W_2(x, x) = (b - a)^2 / (16 sigma1^4)."""
        return (self.b - self.a) ** 2 / (16 * self.sigma1(x) ** 4)

    def torus_resolvent(self, x):
        """
        Genus-one resolvent from the loop equation,
        W_1^(1) = -(W_2(x, x) + P(x)) / y(x), where P cancels the zeros of M.
        """
        roots = self.M().roots()
        if len(roots):
            values = -self.two_point_diagonal(roots)
            vander = np.vander(roots, len(roots), increasing=True)
            P = Polynomial(np.linalg.solve(vander, values))
        else:
            P = Polynomial([0.0])
        return -(self.two_point_diagonal(x) + P(x)) / self.y(x)

    def f0_tt(self):
        """Second t-derivative of the planar free energy, ln(((b - a)/4)^2)."""
        return 2 * cmath.log(self.gamma)


def moment_conditions(dV, t, alpha, gamma):
    degree = len(dV.coef)

    def x_of_z(z):
        return alpha + gamma * (z + 1 / z)

    first = _constant_term(lambda z: dV(x_of_z(z)), degree)
    second = _constant_term(lambda z: x_of_z(z) * dV(x_of_z(z)), degree + 1)
    return np.array([first, second - 2 * t], dtype=complex)


def solve_one_cut(dV, t, seed=None, tol=1e-13, max_iter=60):
    """
    Endpoints of the one-cut solution from [z^0] V'(x(z)) = 0 and [z^0] x V'(x(z)) = 2t.

    Args:
        dV: numpy Polynomial V'
        t: vertex weight
        seed: optional (alpha, gamma)
        tol: residual tolerance

    Returns:
        OneCutSolution
    """
    dV = Polynomial(np.asarray(dV.coef, dtype=complex))
    t = complex(t)
    if seed is None:
        # minimum of V for small t
        critical = dV.roots()
        centre = critical[np.argmin(np.abs(critical))] if len(critical) else 0.0
        seed = (centre, cmath.sqrt(t))
    z = np.array(seed, dtype=complex)
    res = moment_conditions(dV, t, *z)
    for iteration in range(max_iter):
        norm = float(np.linalg.norm(res))
        if norm < tol:
            logger.debug('one-cut reference converged in %d iterations', iteration)
            break
        h = 1e-7 * max(abs(z[0]), 1.0)
        jac = np.column_stack([
            (moment_conditions(dV, t, *(z + dz)) - moment_conditions(dV, t, *(z - dz))) / (2 * h)
            for dz in (np.array([h, 0]), np.array([0, h]))
        ])
        z = z - np.linalg.solve(jac, res)
        res = moment_conditions(dV, t, *z)
    else:
        if float(np.linalg.norm(res)) >= math.sqrt(tol):
            raise ConvergenceError('one-cut reference did not converge', last_iterate=tuple(z),
                                   residual=float(np.linalg.norm(res)))
    alpha, gamma = z
    if t.imag == 0:
        alpha, gamma = alpha.real, abs(gamma.real)
    return OneCutSolution(dV=dV, t=t, a=alpha - 2 * gamma, b=alpha + 2 * gamma)
