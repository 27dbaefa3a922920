"""
Model parameters of the loop gas on random lattices.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial import Polynomial

from core.exceptions import DomainError


def mu_from_n(n):
    """mu in (0, 1) with n = -2 cos(pi mu)."""
    if not -2.0 < n < 2.0:
        raise DomainError(f'loop fugacity must satisfy |n| < 2, got n={n}')
    return math.acos(-n / 2.0) / math.pi


def shifted_potential(hat_pot, c):
    """
    Coefficients t_j of V(x) = t0 + sum_j t_j x^j / j, where
    V(x) = Vhat(x - c/2) and Vhat(xh) = xh^2/2 - sum_{j>=3} that_j xh^j / j.

    Args:
        hat_pot: sequence indexed by j (entries below 3 are ignored)
        c: loop-triangle coupling

    Returns:
        tuple of complex, index j holding t_j (index 0 holds t0)
    """
    degree = max(len(hat_pot) - 1, 2)
    vhat = np.zeros(degree + 1, dtype=complex)
    vhat[2] = 0.5
    for j in range(3, len(hat_pot)):
        vhat[j] = -complex(hat_pot[j]) / j
    composed = Polynomial(vhat)(Polynomial([-c / 2.0, 1.0]))
    coeffs = np.zeros(degree + 1, dtype=complex)
    coeffs[:len(composed.coef)] = composed.coef
    pot = [coeffs[0]] + [j * coeffs[j] for j in range(1, degree + 1)]
    return tuple(complex(v) for v in pot)


@dataclass(frozen=True)
class ModelParams:
    """
    Loop fugacity n = -2 cos(pi mu), vertex weight t, loop-triangle coupling c
    and the potential, both unshifted (hat_pot) and shifted (pot).
    """

    n: float
    t: complex
    c: float
    pot: tuple
    hat_pot: tuple = None
    mu: float = field(default=None)

    def __post_init__(self):
        mu = mu_from_n(self.n)
        if self.mu is None:
            object.__setattr__(self, 'mu', mu)
        elif abs(-2.0 * math.cos(math.pi * self.mu) - self.n) > 1e-14:
            raise DomainError(f'mu={self.mu} is inconsistent with n={self.n}')
        if self.c <= 0:
            raise DomainError(f'loop-triangle coupling must be positive, got c={self.c}')
        object.__setattr__(self, 'pot', tuple(complex(v) for v in self.pot))
        object.__setattr__(self, 't', complex(self.t))

    @classmethod
    def from_hat(cls, n, t, c, hat_pot):
        hat_pot = tuple(complex(v) for v in hat_pot)
        return cls(n=float(n), t=t, c=float(c), pot=shifted_potential(hat_pot, c), hat_pot=hat_pot)

    @classmethod
    def fpl(cls, n, t, c):
        """Fully packed loops: Vhat(xh) = xh^2/2."""
        return cls.from_hat(n, t, c, (0, 0, 0))

    @property
    def d_max(self):
        return len(self.pot) - 1

    def with_t(self, t):
        return replace(self, t=complex(t))

    def with_pot(self, pot):
        """Copy with explicit shifted coefficients; the unshifted ones no longer apply."""
        return replace(self, pot=tuple(complex(v) for v in pot), hat_pot=None)

    def potential(self, x):
        x = np.asarray(x, dtype=complex)
        total = np.full(x.shape, self.pot[0], dtype=complex)
        for j in range(1, len(self.pot)):
            total = total + self.pot[j] * x ** j / j
        return total

    def derivative_coefficients(self):
        """Ascending coefficients of V'(x) = sum_j t_j x^(j-1)."""
        return np.array(self.pot[1:], dtype=complex)

    def potential_derivative(self, x):
        return Polynomial(self.derivative_coefficients())(np.asarray(x, dtype=complex))

    def to_dict(self):
        return {
            'n': self.n,
            'mu': self.mu,
            't': [self.t.real, self.t.imag],
            'c': self.c,
            'pot': [[v.real, v.imag] for v in self.pot],
            'hat_pot': None if self.hat_pot is None else [[v.real, v.imag] for v in self.hat_pot],
        }
