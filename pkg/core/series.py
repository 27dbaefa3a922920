"""
Truncated Laurent series with complex coefficients.

A ``LaurentSeries`` represents

    f(eps) = c[0] eps**val + c[1] eps**(val + 1) + ... + c[N-1] eps**top + O(eps**(top + 1))

where ``top = val + N - 1``. Coefficients above ``top`` are unknown (not zero),
and arithmetic keeps track of how many are known, so that the result of an
expression never claims more precision than its operands carry.

    >>> eps = LaurentSeries.variable(order=4)
    >>> (1 / (1 - eps)).coefficients()
    array([1.+0.j, 1.+0.j, 1.+0.j, 1.+0.j, 1.+0.j])
"""

from numbers import Number

import numpy as np


class LaurentSeries:
    __slots__ = ('val', 'c')

    def __init__(self, coeffs, val=0):
        self.c = np.array(coeffs, dtype=complex).ravel()
        self.val = int(val)

    # construction -------------------------------------------------------

    @classmethod
    def constant(cls, value, order):
        """Constant ``value`` known up to eps**order."""
        coeffs = np.zeros(order + 1, dtype=complex)
        coeffs[0] = value
        return cls(coeffs, 0)

    @classmethod
    def variable(cls, order):
        """The expansion variable eps itself, known up to eps**order."""
        coeffs = np.zeros(order, dtype=complex)
        coeffs[0] = 1.0
        return cls(coeffs, 1)

    @classmethod
    def from_taylor(cls, coeffs):
        return cls(coeffs, 0)

    # bookkeeping --------------------------------------------------------

    @property
    def top(self):
        """Highest known order."""
        return self.val + len(self.c) - 1

    def __len__(self):
        return len(self.c)

    def coefficients(self):
        return self.c.copy()

    def coeff(self, k):
        if k < self.val:
            return 0j
        if k > self.top:
            raise IndexError(f'coefficient of order {k} is beyond the truncation order {self.top}')
        return complex(self.c[k - self.val])

    def __getitem__(self, k):
        return self.coeff(k)

    def residue(self):
        return self.coeff(-1)

    def truncate(self, top):
        if top >= self.top:
            return self
        return LaurentSeries(self.c[:max(top - self.val + 1, 0)], self.val)

    def normalized(self, rtol=0.0):
        """Drop leading coefficients that are zero (or below rtol relative to the largest)."""
        if len(self.c) == 0:
            return self
        scale = np.max(np.abs(self.c))
        if scale == 0:
            return LaurentSeries([], self.top + 1)
        small = np.abs(self.c) <= rtol * scale
        first = int(np.argmin(small)) if not small.all() else len(self.c)
        return LaurentSeries(self.c[first:], self.val + first)

    def with_valuation(self, val):
        """Declare that all orders below ``val`` vanish and drop them."""
        if val <= self.val:
            return LaurentSeries(np.concatenate([np.zeros(self.val - val, dtype=complex), self.c]), val)
        return LaurentSeries(self.c[val - self.val:], val)

    def shift(self, k):
        """Multiply by eps**k."""
        return LaurentSeries(self.c, self.val + k)

    def rescale(self, factor):
        """Series of f(factor * eps)."""
        powers = np.power(complex(factor), np.arange(self.val, self.top + 1).astype(float))
        return LaurentSeries(self.c * powers, self.val)

    def even(self):
        orders = np.arange(self.val, self.top + 1)
        return LaurentSeries(np.where(orders % 2 == 0, self.c, 0), self.val)

    def odd(self):
        orders = np.arange(self.val, self.top + 1)
        return LaurentSeries(np.where(orders % 2 != 0, self.c, 0), self.val)

    def __call__(self, eps):
        eps = np.asarray(eps, dtype=complex)
        powers = np.arange(self.val, self.top + 1)
        return np.sum(self.c * eps[..., None] ** powers, axis=-1)

    # arithmetic ---------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, LaurentSeries):
            return other
        if isinstance(other, (Number, np.number)):
            return LaurentSeries.constant(other, max(self.top, 0))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        lo = min(self.val, other.val)
        hi = min(self.top, other.top)
        out = np.zeros(max(hi - lo + 1, 0), dtype=complex)
        for s in (self, other):
            n = min(len(s.c), max(hi - s.val + 1, 0))
            out[s.val - lo:s.val - lo + n] += s.c[:n]
        return LaurentSeries(out, lo)

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries(-self.c, self.val)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (Number, np.number)):
            return LaurentSeries(self.c * other, self.val)
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        n = min(len(self.c), len(other.c))
        prod = np.convolve(self.c[:n], other.c[:n])[:n]
        return LaurentSeries(prod, self.val + other.val)

    __rmul__ = __mul__

    def inverse(self):
        if len(self.c) == 0 or self.c[0] == 0:
            raise ZeroDivisionError('leading coefficient of a series is zero')
        a = self.c
        n = len(a)
        b = np.zeros(n, dtype=complex)
        b[0] = 1.0 / a[0]
        for k in range(1, n):
            b[k] = -np.dot(a[1:k + 1], b[k - 1::-1][:k]) / a[0]
        return LaurentSeries(b, -self.val)

    def __truediv__(self, other):
        if isinstance(other, (Number, np.number)):
            return LaurentSeries(self.c / other, self.val)
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        if isinstance(other, (Number, np.number)):
            return self.inverse() * other
        return NotImplemented

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result = LaurentSeries.constant(1.0, len(self.c) - 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # calculus -----------------------------------------------------------

    def deriv(self):
        powers = np.arange(self.val, self.top + 1)
        out = LaurentSeries(self.c * powers, self.val - 1)
        if self.val == 0 and len(self.c) > 1:
            return LaurentSeries(out.c[1:], 0)
        return out

    def integ(self):
        """Primitive with zero constant term; the eps**-1 coefficient must vanish."""
        powers = np.arange(self.val, self.top + 1)
        res = self.c[powers == -1]
        if res.size and abs(res[0]) > 1e-8 * max(np.max(np.abs(self.c)), 1.0):
            raise ValueError('series with a residue has no Laurent primitive')
        coeffs = np.where(powers == -1, 0, self.c / np.where(powers == -1, 1, powers + 1))
        return LaurentSeries(coeffs, self.val + 1)

    def __repr__(self):
        return f'LaurentSeries(val={self.val}, top={self.top}, c={np.array2string(self.c, precision=4)})'


class TruncatedSeries:
    """
    Power series sum_v c[v] t**v known up to t**order, as produced by the
    enumeration oracle or by coefficient extraction.

    ``error`` holds a per-coefficient error estimate when one is available,
    ``consistent`` is False when that estimate exceeded the requested tolerance.
    """

    __slots__ = ('c', 'variable', 'error', 'consistent')

    def __init__(self, coeffs, variable='t', error=None, consistent=True):
        self.c = np.array(coeffs, dtype=complex).ravel()
        self.variable = variable
        self.error = None if error is None else np.array(error, dtype=float).ravel()
        self.consistent = bool(consistent)

    @property
    def order(self):
        return len(self.c) - 1

    def coefficients(self):
        return self.c.copy()

    def coeff(self, v):
        if v < 0:
            return 0j
        if v > self.order:
            raise IndexError(f'order {v} is beyond the truncation order {self.order}')
        return complex(self.c[v])

    def __call__(self, t):
        return np.polynomial.polynomial.polyval(t, self.c)

    def to_record(self):
        return {
            'variable': self.variable,
            'order': self.order,
            'coefficients': [[z.real, z.imag] for z in self.c],
            'error': None if self.error is None else self.error.tolist(),
            'consistent': self.consistent,
        }

    def __repr__(self):
        return f'TruncatedSeries({self.variable}, order={self.order}, {self.c!r})'
