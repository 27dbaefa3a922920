"""
Quadrature helpers for complex contours: Gauss-Legendre on straight
segments and the trapezoid rule on circles.
"""

from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre


@lru_cache(maxsize=32)
def gauss_legendre(order):
    """Nodes and weights on [-1, 1]."""
    nodes, weights = roots_legendre(order)
    return nodes, weights


def segment_integral(func, z0, z1, order=64):
    """
    Integrate a vectorised complex function along the straight segment z0 -> z1.

    Args:
        func: callable accepting an array of complex points
        z0: Start point
        z1: End point
        order: Gauss-Legendre order

    Returns:
        complex integral
    """
    nodes, weights = gauss_legendre(order)
    half = 0.5 * (z1 - z0)
    z = z0 + half * (nodes + 1.0)
    return complex(np.sum(weights * np.asarray(func(z))) * half)


def path_integral(func, points, order=64):
    """Integrate along the polygonal path through ``points``."""
    return sum(segment_integral(func, p, q, order) for p, q in zip(points[:-1], points[1:]))


def circle_nodes(centre, radius, nodes):
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    return centre + radius * np.exp(1j * theta)


def circle_integral(func, centre, radius, nodes=128):
    """Counter-clockwise contour integral of ``func`` around a circle (trapezoid rule)."""
    z = circle_nodes(centre, radius, nodes)
    return complex(np.sum(np.asarray(func(z)) * (z - centre)) * 2j * np.pi / nodes)


def circle_coefficients(func, centre, radius, nodes, orders):
    """
    Laurent coefficients of ``func`` around ``centre`` by the discrete Cauchy transform.

    Args:
        func: vectorised callable
        centre: Expansion point
        radius: Circle radius, inside the annulus of convergence
        nodes: Number of trapezoid points
        orders: iterable of integer orders k

    Returns:
        numpy array of coefficients, one per order
    """
    z = circle_nodes(centre, radius, nodes)
    values = np.asarray(func(z), dtype=complex)
    rel = (z - centre) / radius
    out = []
    for k in orders:
        out.append(np.mean(values * rel ** (-k)) / radius ** k)
    return np.array(out, dtype=complex)


def residue(func, centre, radius, nodes=128):
    """Residue of ``func`` at ``centre`` from a small circle."""
    return circle_integral(func, centre, radius, nodes) / (2j * np.pi)
