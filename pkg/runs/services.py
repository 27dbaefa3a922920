"""
Batch runs: validate a configuration, execute its tasks in order and
assemble the report document.
"""

import cmath
import logging
import math

import django
import numpy as np
import rest_framework
import scipy
import sympy

from core.conf import numerics
from core.exceptions import ConfigurationError, ConvergenceError, LoopCurveError
from correlators.services import w1, w2_closed
from critical.services import approach_geometries, phase_table, small_a_asymptotics
from oracle.services import oracle_comparison
from spectral_curve.params import ModelParams
from spectral_curve.services import solve_endpoints, uniformize
from toporec.services import CorrelatorTable, dF1_dt, f0, free_energy

from .models import RunRecord
from .serializers import RunConfigSerializer

logger = logging.getLogger(__name__)

PASSED = 'passed'
FAILED = 'failed'
ERROR = 'error'

DEFAULT_KG = ((1, 0), (2, 0), (1, 1))


def _pair(z):
    z = complex(z)
    return [z.real, z.imag]


def validate_config(config):
    """
    Schema check of a run configuration.

    Raises:
        ConfigurationError: the document does not validate; the DRF errors are in the message
    """
    serializer = RunConfigSerializer(data=config)
    if not serializer.is_valid():
        raise ConfigurationError(f'invalid run configuration: {dict(serializer.errors)}')
    return serializer.validated_data


def build_params(data):
    if 'hat_pot' in data:
        return ModelParams.from_hat(data['n'], data['t'], data['c'], tuple(data['hat_pot']))
    return ModelParams(n=data['n'], t=data['t'], c=data['c'], pot=tuple(data['pot']))


def library_versions():
    return {
        'django': django.get_version(),
        'djangorestframework': rest_framework.VERSION,
        'numpy': np.__version__,
        'scipy': scipy.__version__,
        'sympy': sympy.__version__,
    }


def comparison(name, value, tolerance, relative_to=None):
    """One pass/fail entry: |value| (or |value - relative_to|) against the tolerance."""
    deviation = abs(value) if relative_to is None else abs(value - relative_to)
    return {
        'name': name,
        'deviation': float(deviation),
        'tolerance': float(tolerance),
        'passed': bool(deviation <= tolerance),
    }


class RunContext:
    """Shared state of one run: parameters, tolerances, the seeded generator and the solved geometry."""

    def __init__(self, params, tolerances, seed):
        self.params = params
        self.tolerances = tolerances
        self.rng = np.random.default_rng(seed)
        self._geom = None
        self._geom_error = None

    @property
    def geom(self):
        if self._geom_error is not None:
            raise self._geom_error
        if self._geom is None:
            try:
                self._geom = solve_endpoints(self.params, tol=self.tolerances['endpoint'])
            except (LoopCurveError, ArithmeticError, ValueError) as exc:
                self._geom_error = exc
                raise
        return self._geom

    def probe_points(self, k, count):
        """``count`` sets of k points off the cut, at radius 1.5b to 3b and angles away from the real axis."""
        b = abs(self.geom.b)
        sets = []
        for _ in range(count):
            radius = b * (1.5 + 1.5 * self.rng.random(k))
            angle = 0.2 + (math.pi - 0.4) * self.rng.random(k)
            sign = np.where(self.rng.random(k) < 0.5, -1.0, 1.0)
            sets.append([complex(r * cmath.exp(1j * s * a)) for r, a, s in zip(radius, angle, sign)])
        return sets


# ---------------------------------------------------------------------------
# tasks
# ---------------------------------------------------------------------------

def task_curve(ctx, task):
    geom = ctx.geom
    return geom.to_record(), [comparison('endpoint_residual', geom.residual, ctx.tolerances['endpoint'])]


def task_correlator(ctx, task):
    k, g = task['k'], task['g']
    geom = ctx.geom
    point_sets = task.get('points') or ctx.probe_points(k, task['probes'])
    rows, checks = [], []
    table = None
    if (k, g) not in ((1, 0), (2, 0)):
        table = CorrelatorTable(geom, targets=[(k, g)])
    for points in point_sets:
        if (k, g) == (1, 0):
            value = w1(points[0], geom)
        elif (k, g) == (2, 0):
            value = w2_closed(points[0], points[1], geom)
            swapped = w2_closed(points[1], points[0], geom)
            checks.append(comparison('w2_symmetry', (value - swapped) / max(abs(value), 1e-300),
                                     ctx.tolerances['symmetry']))
        else:
            u = [uniformize(x, geom) for x in points]
            value = table.evaluate(k, g, u)
            if k > 1:
                checks.append(comparison(f'omega_{k}_{g}_symmetry', table.symmetry_defect(k, g, u),
                                         ctx.tolerances['symmetry']))
        rows.append({'points': [_pair(x) for x in points], 'value': _pair(value)})
    return {'k': k, 'g': g, 'values': rows}, checks


def task_free_energy(ctx, task):
    g = task['g']
    geom = ctx.geom
    if g == 0:
        return {'g': 0, 'F0': _pair(f0(geom))}, []
    table = CorrelatorTable(geom, targets=[(1, g)])
    if g == 1:
        closed = dF1_dt(table, route='closed')
        path = dF1_dt(table, route='path')
        check = comparison('dF1_dt_routes', closed, ctx.tolerances['route'], relative_to=path)
        return {'g': 1, 'dF1_dt': _pair(closed), 'dF1_dt_path': _pair(path)}, [check]
    return {'g': g, f'F{g}': _pair(free_energy(g, table))}, []


def task_oracle_compare(ctx, task):
    result = oracle_comparison(ctx.params, task['v_max'], task['x_points'], t_scale=task['t_scale'],
                               tol=ctx.tolerances['oracle'])
    checks = [
        comparison(f"t^{row['v']} at x={row['x'][0]:+.4g}{row['x'][1]:+.4g}j", row['deviation'],
                   ctx.tolerances['oracle'])
        for row in result['rows']
    ]
    return result, checks


def task_critical_report(ctx, task):
    kg = [tuple(pair) for pair in task.get('kg', DEFAULT_KG)]
    records = phase_table(ctx.params.d_max, ctx.params.mu)
    result = {'phases': [record.to_record(kg) for record in records]}
    checks = []
    if task.get('t_grid'):
        geoms = approach_geometries(ctx.params, task['t_grid'])
        fits = small_a_asymptotics(geoms)
        result['fits'] = {name: (fit.to_record() if hasattr(fit, 'to_record') else fit) for name, fit in fits.items()}
        for name, fit in fits.items():
            if getattr(fit, 'expected', None):
                checks.append(comparison(f'exponent_{name}', (fit.slope - fit.expected) / abs(fit.expected),
                                         ctx.tolerances['exponent']))
    return result, checks


TASKS = {
    'curve': task_curve,
    'correlator': task_correlator,
    'free-energy': task_free_energy,
    'oracle-compare': task_oracle_compare,
    'critical-report': task_critical_report,
}


def _diagnostics(exc):
    if isinstance(exc, ConvergenceError):
        return exc.diagnostics()
    return {'message': str(exc)}


def execute_task(ctx, task):
    """Run one task; library errors become an 'error' entry instead of stopping the run."""
    name = task['task']
    logger.info('task %s started', name)
    try:
        result, checks = TASKS[name](ctx, task)
    except (LoopCurveError, ArithmeticError, ValueError) as exc:
        logger.error('task %s failed: %s', name, exc)
        return {'task': name, 'status': ERROR, 'error': type(exc).__name__, 'diagnostics': _diagnostics(exc),
                'comparisons': []}
    status = PASSED if all(check['passed'] for check in checks) else FAILED
    logger.info('task %s %s (%d comparisons)', name, status, len(checks))
    return {'task': name, 'status': status, 'result': result, 'comparisons': checks}


def _echo(data):
    """Validated config in plain JSON types."""
    if isinstance(data, dict):
        return {key: _echo(value) for key, value in data.items()}
    if isinstance(data, (list, tuple)):
        return [_echo(value) for value in data]
    if isinstance(data, complex):
        return _pair(data)
    return data


def run(config, store=False):
    """
    Execute a run configuration.

    Args:
        config: run configuration document (dict)
        store: save the run as a RunRecord

    Returns:
        tuple (report dict, RunRecord or None)

    Raises:
        ConfigurationError: the configuration does not validate
    """
    data = validate_config(config)
    params = build_params(data['params'])
    ctx = RunContext(params, data['tolerances'], data['seed'])

    tasks = [execute_task(ctx, task) for task in data['tasks']]
    statuses = {task['status'] for task in tasks}
    if ERROR in statuses:
        status = ERROR
    elif FAILED in statuses:
        status = FAILED
    else:
        status = PASSED

    report = {
        'schema': numerics()['REPORT_SCHEMA'],
        'inputs': _echo(data),
        'params': params.to_dict(),
        'numerics': numerics(),
        'versions': library_versions(),
        'status': status,
        'passed': status == PASSED,
        'tasks': tasks,
    }
    logger.info('run finished: %s (%d tasks)', status, len(tasks))

    record = None
    if store:
        errors = [f"{task['task']}: {task['diagnostics']['message']}" for task in tasks if task['status'] == ERROR]
        record = RunRecord.objects.create(
            config=_echo(data),
            report=report,
            status=status,
            seed=data['seed'],
            output_path=data['output'],
            error_message=errors[0] if errors else '',
        )
    return report, record
