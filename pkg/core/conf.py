"""
Access to the numerical defaults configured in settings.LOOPCURVE.
"""

from django.conf import settings

DEFAULTS = {
    'THETA_TOL': 1e-13,
    'ENDPOINT_TOL': 1e-10,
    'NEWTON_MAX_ITER': 60,
    'INFINITY_NODES': 256,
    'QUAD_ORDER': 64,
    'SERIES_M_MAX': 0,
    'JET_SCALE': 0.25,
    'GENUS_CAP': 3,
    'ORACLE_MAX_VERTICES': 5,
    'REPORT_SCHEMA': 'loopcurve.report/1',
}


def numerics(**overrides):
    """
    Return the numerical defaults, with per-call overrides applied.

    Args:
        **overrides: Keys of DEFAULTS (case-insensitive) to replace

    Returns:
        dict with every key of DEFAULTS
    """
    values = dict(DEFAULTS)
    values.update(getattr(settings, 'LOOPCURVE', {}))
    for key, value in overrides.items():
        if value is not None:
            values[key.upper()] = value
    return values


def get(key):
    return numerics()[key]
